/* Residual checks for the identities and inequalities the flow is supposed
 * to satisfy, plus trajectory-level fits and the CSV record format.
 *
 * Identity checks are convergence tests: each residual is O(h^2) (or O(h)
 * where stated) on exact states, so tests refine grids instead of pinning
 * absolute tolerances. Inequality checks carry slack proportional to h^2.
 */
#pragma once

#include <string>
#include <vector>

#include "graphflow/analytic.hpp"
#include "graphflow/flow.hpp"

namespace graphflow {

// --------------------------------------------------------------------------
// Trajectory-level checks
// --------------------------------------------------------------------------

struct VolumeLawReport {
  double max_residual = 0.0;   // worst |Vol - Vol0 exp(int ||H||^2)| / Vol0
  bool nondecreasing = true;
  bool bounded = true;         // Vol <= Vol(Sigma_1, g_1) + 1e-6 when known
  double volume_cap = 0.0;     // the bound used (inf when the chart is open)
};

// Scans the per-record law residuals the engine accumulated and the two
// volume inequalities. Needs at least three records.
VolumeLawReport volume_law_check(const std::vector<DiagnosticsRecord>& recs,
                                 const ProductSpace& space);

enum class DecayQuantity { CoshThetaMinus1, NormB };

struct DecayFit {
  const char* quantity = "";
  double rate = 0.0;           // tau-hat: minus the log-linear slope
  double t0 = 0.0, t1 = 0.0;   // fit window
  double fit_residual = 0.0;   // rms deviation of log values from the line
  bool shortened = false;      // window truncated by the rounding floor
};

// Least-squares decay rate of the chosen max-quantity over the records
// where it lies in [1e-10, 1e-2] (below: rounding noise, above: nonlinear).
DecayFit decay_fit(const std::vector<DiagnosticsRecord>& recs, DecayQuantity q);

// --------------------------------------------------------------------------
// State-level residuals
// --------------------------------------------------------------------------

struct Eq3Result {
  std::vector<double> residual;    // per node; zero outside the window
  double max_residual = 0.0;
  double braced_slack_min = 0.0;   // min of braced - delta ||B||^2
  double curvature_min = 0.0;      // min of the curvature bracket
  bool applicable = true;          // Ricci_1 >= 0 and K_1 >= K_2 hold
};

// Residual of the hyperbolic-angle evolution identity
//   D_t ln cosh(theta) = Lap_g ln cosh(theta) - {braced} - {curvature},
// with D_t the instantaneous rate at a fixed target point: the chart value
// moves with the tangential drift xi^i = -g^{ij} df_j^T g2' v, and
// d/dt ln cosh(theta) = -1/2 tr(g^{-1} dg/dt) closed-form in (v, dv).
Eq3Result eq3_residual(const ProductSpace& space, const Field& f, const Field& v,
                       const std::vector<GraphJet>& jets,
                       const std::vector<PointGeometry>& geom);
Eq3Result eq3_residual(const ProductSpace& space, const Field& f, const Field& v);

struct Eq1Result {
  std::vector<double> residual;  // per node, 0 outside the evaluated set
  double max_residual = 0.0;
  double sup_H = 0.0;
  bool applicable = true;  // requires (numerically) parallel mean curvature
};

// Residual of the Laplacian identity for cosh(theta) on maximal states.
// Flagged inapplicable when sup ||H|| >= tol_H. The geometry overload takes
// per-node data indexed by grid node (unpopulated slots stay non-spacelike),
// so closed-form jets can stand in for stencil jets on exact solutions.
Eq1Result eq1_residual(const ProductSpace& space, const Grid& grid,
                       const std::vector<PointGeometry>& geom,
                       double tol_H = 1e-6);
Eq1Result eq1_residual(const ProductSpace& space, const Field& f,
                       double tol_H = 1e-6);

// Worst-node signed gap d/dt ||B||^2 - Lap_g ||B||^2 + (1/n) ||B||^4.
// The time derivative pairs a centered epsilon-perturbation of the 2-jet
// along (v, dv, d2v) with the same tangential drift as the angle identity.
double eq4_gap(const ProductSpace& space, const Field& f, const Field& v,
               const std::vector<GraphJet>& jets,
               const std::vector<PointGeometry>& geom);

// Monitor hook wiring the two deep residuals into the record stream.
void fill_deep_residuals(const FlowEngine::Frame& frame, DiagnosticsRecord& rec);

struct HeinzChern {
  double lhs = 0.0;   // m * min-node ||H||
  double rhs = 0.0;   // sup cosh(theta) * (m / r)
  bool holds = false;
};

// Mean-curvature bound over a Euclidean ball of radius r, with the flat
// Cheeger constant h(B_r) = m/r. The min-node left side keeps numerical
// non-constancy of H from manufacturing a violation.
HeinzChern heinz_chern_check(const ProductSpace& space,
                             const std::vector<PointGeometry>& nodes, double r);

struct CalabiResult {
  std::vector<double> residual;  // per node; zero off the valid set
  double max_residual = 0.0;
};

// Divergence-form maximal-graph residual sum_i d_i(f_i / sqrt(1 - c|Df|^2))
// for scalar graphs over a flat base (c = the constant target rescale).
CalabiResult calabi_residual(const ProductSpace& space, const Field& f);

// Pointwise Simons identity residual in flat ambient at p0, from an
// analytic third-order jet source; h_fd sets the nested finite-difference
// spacing (the refinement knob). Requires parallel mean curvature (the
// states of interest are maximal), which drops the Hess H pairing term.
double simons_flat_residual(const ProductSpace& space,
                            const std::function<ThirdJet(const Vec&)>& jet3,
                            const Vec& p0, double h_fd, double tol_H = 1e-6);

// --------------------------------------------------------------------------
// Record CSV (fixed column set, %.17g round trip)
// --------------------------------------------------------------------------

extern const char* const kRecordHeader;

void write_records(const std::string& path,
                   const std::vector<DiagnosticsRecord>& recs);
std::vector<DiagnosticsRecord> read_records(const std::string& path);

}  // namespace graphflow
