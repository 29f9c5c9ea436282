/* Mean curvature flow of spacelike graph fields: the graph heat system
 * d_t f = v with v the g-trace of the map Hessian, integrated by guarded
 * midpoint steps under a parabolic time-step bound.
 *
 *   v^g = g^{ij} (d_i d_j f^g - G1^k_ij d_k f^g + G2^g_ab d_i f^a d_j f^b)
 *
 * with g the induced metric of the current slice and G1, G2 the factor
 * Christoffels. Projecting (0, v) onto the normal bundle gives exactly the
 * mean curvature vector, so stationary points of the system are maximal
 * graphs. Steps that would push the stretch margin below the guard are
 * rejected and retried with half the step; the azimuthal low-pass keeps
 * sphere charts inside the same stability budget the time step assumes.
 *
 * The monitor emits one record per stride (plus the initial and final
 * states); the record layout is the CSV column order.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "graphflow/grid.hpp"

namespace graphflow {

struct FlowConfig {
  double cfl = 0.2;            // fraction of the parabolic stability budget
  double t_max = 10.0;
  double tol_H = 1e-8;         // maximal-converged: sup ||H|| below this
  double tol_osc = 1e-8;       // slice-converged: value spread below this
  double guard_margin = 1e-6;  // reject steps that reach this margin
  double mono_slack = 1e-9;    // allowed uptick of max cosh between records
  int monitor_stride = 64;
  int checkpoint_stride = 0;   // 0: no periodic checkpoints
  std::string checkpoint_path;
};

enum class Termination {
  SliceConverged,    // spread of f below tol_osc
  MaximalConverged,  // sup ||H|| below tol_H with spread above tol_osc
  TMaxReached,
  SpacelikeGuard,    // margin guard tripped and retries exhausted
  NumericFailure,    // non-finite state or velocity
};
const char* to_string(Termination t);

// One monitor row; field order is the CSV column order.
struct DiagnosticsRecord {
  double t = 0.0;
  double dt = 0.0;
  double max_cosh_theta = 0.0;
  double min_margin = 0.0;
  double sup_H = 0.0;
  double max_B2 = 0.0;
  double volume = 0.0;
  double volume_law_residual = 0.0;
  double eq3_max_residual = std::numeric_limits<double>::quiet_NaN();
  double eq4_gap = std::numeric_limits<double>::quiet_NaN();
  bool monotonicity_ok = true;
};

// Continuation data that rides along in checkpoints so a resumed run
// reproduces the remaining records.
struct FlowScalars {
  double t = 0.0;
  std::int64_t step = 0;
  double vol0 = -1.0;          // volume at the first record
  double law_integral = 0.0;   // trapezoid of s = int ||H||^2 dVol / Vol
  double s_prev = 0.0;
  double t_prev_record = 0.0;
  double eq4_running_max = 0.0;
  double prev_max_cosh = std::numeric_limits<double>::infinity();
};

// Per-node domain data that never changes during a run.
struct DomainCache {
  std::vector<Mat> g1;
  std::vector<Mat> g1inv;
  std::vector<Ten3> gamma1;
  std::vector<double> sqrt_det1;
};
DomainCache build_domain_cache(const ProductSpace& space, const Grid& grid);

struct VelocityPass {
  double min_margin = std::numeric_limits<double>::infinity();
  double lambda_eff_max = 0.0;  // stability coefficient for the time step
  bool finite = true;
};

// Fills v (n components) with the tension field at every jet node; nodes
// with margin <= 0 get zero velocity and only count toward min_margin.
// Pass v = nullptr for the margin/stability scan alone.
VelocityPass tension_velocity(const ProductSpace& space, const Grid& grid,
                              const std::vector<GraphJet>& jets,
                              const DomainCache& dom, Field* v);

// Convenience wrapper: jets and cache computed internally.
Field tension_velocity(const ProductSpace& space, const Field& f);

// Independent mean-curvature route: the divergence-form Laplacian of the
// graph map plus analytic curvature terms, normally projected, against the
// normal projection of (0, v). Returns the max gbar-associated norm of the
// difference over the measurement window (sphere grids exclude a fixed
// polar cap, where one-sided pole error dominates).
double normal_velocity_check(const ProductSpace& space, const Field& f);

// Measurement window shared by the sup-norm residual checks: everything on
// tori and bounded charts, colatitude in [0.5, pi - 0.5] on sphere grids.
bool residual_window(const Grid& grid, std::int64_t node);

class FlowEngine {
 public:
  // The grid must be a closed chart (periodic box or sphere).
  FlowEngine(const ProductSpace& space, const Grid& grid, FlowConfig cfg);

  Field& map() { return f_; }
  const Field& map() const { return f_; }
  const Grid& grid() const { return grid_; }
  FlowScalars& scalars() { return sc_; }
  const FlowConfig& config() const { return cfg_; }

  // Monitor view handed to the deep-residual hook.
  struct Frame {
    const ProductSpace& space;
    const Grid& grid;
    const Field& f;
    const Field& v;
    const std::vector<GraphJet>& jets;
    const std::vector<PointGeometry>& geom;
    double t;
    double dt;
  };
  using MonitorHook = std::function<void(const Frame&, DiagnosticsRecord&)>;
  using RecordSink = std::function<void(const DiagnosticsRecord&)>;

  // Runs until a termination condition holds and returns it. Records flow
  // to the sink; the hook (optional) fills the residual fields that need
  // the velocity field.
  Termination run(const RecordSink& sink, const MonitorHook& hook = {});

 private:
  struct StepStatus {
    bool accepted = false;
    bool numeric_failure = false;
  };
  StepStatus try_step(double dt);
  void monitor(double dt_next, const MonitorHook& hook, DiagnosticsRecord& rec);

  ProductSpace space_;
  Grid grid_;
  FlowConfig cfg_;
  DomainCache dom_;
  Field f_, mid_, next_, v1_, v2_;
  std::vector<GraphJet> jets_, jets_scratch_;
  std::vector<PointGeometry> geom_;
  FlowScalars sc_;
  double h_min_sq_ = 0.0;
  double last_osc_ = 0.0;
};

// Checkpoint files: 16-byte header (magic "GRAPHFLW", version, component
// count), grid descriptor, wrap periods, continuation scalars, the nodal
// values, and a CRC32 trailer (polynomial 0xEDB88320), all little-endian.
void save_checkpoint(const std::string& path, const Field& f,
                     const FlowScalars& sc);

// Grid reconstructed from the stored descriptor.
Grid load_checkpoint_grid(const std::string& path);

// Fills f (already sized on the matching grid) and the scalars; throws
// FormatError on damage, VersionError on an unknown version, ConfigError
// when the stored descriptor does not match f's grid.
void load_checkpoint_into(const std::string& path, Field& f, FlowScalars& sc);

}  // namespace graphflow
