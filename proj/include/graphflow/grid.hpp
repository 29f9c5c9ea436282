/* Structured finite-difference grids over the domain factor: periodic
 * boxes, the latitude-longitude sphere chart, and masked bounded charts.
 *
 * Sphere rings sit at theta_j = (j + 1/2) h_theta, so no node touches a
 * pole. Stencils crossing a pole reflect to the antipodal column; scalar
 * samples pass through unchanged. Densitized fluxes also pass through
 * unchanged: the theta reversal and the sign of the smoothly continued
 * density sin(theta) cancel. Physical vector components would flip, and
 * NeighborRef records the crossing for that purpose.
 *
 * Angle-valued field components declare a wrap period; stencils adjust
 * each sampled value to the branch nearest the stencil center, which keeps
 * winding maps (f(x) = c x + periodic) exactly representable.
 */
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "graphflow/immersion.hpp"

namespace graphflow {

enum class GridTopology { PeriodicBox, LatLongSphere, BoundedChart };

struct NeighborRef {
  std::int64_t node = -1;  // -1: outside a bounded chart
  bool pole_flip = false;  // crossed a pole an odd number of times
};

class Grid {
 public:
  // Box [0, L_a) per axis, wrap-around indexing. dim 1 or 2.
  static Grid periodic_box(const Vec& lengths, const std::vector<int>& res,
                           int order);
  // Colatitude rings x (power-of-two) longitude columns; n_theta >= 4,
  // n_phi >= 8.
  static Grid lat_long_sphere(int n_theta, int n_phi, int order);
  // Closed box [lo, hi] sampled inclusively; optional mask trims the
  // valid region. Stencil results exist only on interior node sets.
  static Grid bounded_chart(const Vec& lo, const Vec& hi,
                            const std::vector<int>& res, int order,
                            std::function<bool(const Vec&)> mask = {});

  GridTopology topology() const { return topology_; }
  int dim() const { return dim_; }
  int order() const { return order_; }
  std::int64_t size() const { return size_; }
  int res(int axis) const { return res_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  Vec point(std::int64_t node) const;
  NeighborRef neighbor(std::int64_t node, int axis, int offset) const;

  bool valid(std::int64_t node) const;
  // Full stencil box of radius order/2 valid: jets exist here.
  const std::vector<std::int64_t>& jet_nodes() const { return jet_nodes_; }
  bool jet_interior(std::int64_t node) const;
  // Radius-2 box valid: divergence-form Laplacian exists here.
  const std::vector<std::int64_t>& lap_nodes() const { return lap_nodes_; }
  bool lap_interior(std::int64_t node) const;

  // Quadrature weight of one node (uniform per topology; the sphere
  // weight 2 sin(h_theta/2) h_phi telescopes slice volumes exactly).
  double cell_weight() const;
  // sin^2 of the colatitude distance to the nearest pole; 1 off-sphere.
  double pole_cap(std::int64_t node) const;

  bool operator==(const Grid& o) const;

 private:
  Grid() = default;
  void build_interior_sets();

  GridTopology topology_ = GridTopology::PeriodicBox;
  int dim_ = 0;
  int order_ = 2;
  std::int64_t size_ = 0;
  int res_[2] = {1, 1};
  double h_[2] = {0.0, 0.0};
  double lo_[2] = {0.0, 0.0};
  double len_[2] = {0.0, 0.0};  // periodic box lengths / chart extents
  std::vector<std::uint8_t> valid_;
  std::vector<std::int64_t> jet_nodes_;
  std::vector<std::int64_t> lap_nodes_;
  std::vector<std::uint8_t> jet_mask_;
  std::vector<std::uint8_t> lap_mask_;
};

class Field {
 public:
  Field(const Grid& grid, int comps);

  const Grid& grid() const { return *grid_; }
  int comps() const { return comps_; }
  double at(std::int64_t node, int c) const { return v_[plane_ * c + node]; }
  double& at(std::int64_t node, int c) { return v_[plane_ * c + node]; }

  void set_wrap(int c, double period);
  double wrap(int c) const { return wrap_[c]; }

  // Value at `nbr` shifted to the branch nearest the value at `center`.
  double sampled(std::int64_t center, std::int64_t nbr, int c) const;

  std::vector<double>& raw() { return v_; }
  const std::vector<double>& raw() const { return v_; }

 private:
  const Grid* grid_;
  int comps_;
  std::int64_t plane_;
  std::vector<double> v_;
  std::vector<double> wrap_;
};

// Chart 2-jets of the map field at every jet-interior node (other slots
// are default-constructed). Mixed partials are symmetric by construction.
// Non-finite samples raise DataError naming the node.
std::vector<GraphJet> jets(const Field& f);
// Same, reusing the output buffer (stepping loops call this every stage).
void jets_into(const Field& f, std::vector<GraphJet>& out);

// Centered first derivative of one component (order 2, wrap-aware).
double deriv1(const Field& f, int c, std::int64_t node, int axis);

// Divergence-form Laplace-Beltrami of component c: d_a(sqrt(det g)
// g^{ab} d_b u) / sqrt(det g) with centered differencing of the flux.
// ginv and sqrt_det are per-node; results valid on lap_nodes().
std::vector<double> laplace_beltrami(const Field& f, int c,
                                     const std::vector<Mat>& ginv,
                                     const std::vector<double>& sqrt_det);

// Quadrature of a nodal density over the listed nodes.
double integrate(const Grid& grid, const std::vector<double>& density,
                 const std::vector<std::int64_t>& nodes);

// Ring-wise azimuthal low-pass on sphere grids: ring at colatitude theta
// keeps modes k <= max(1, floor(1.8 min(theta, pi-theta) / h_phi)), which
// caps the azimuthal symbol at a bounded multiple of the polar-distance
// scale the time step already resolves. Winding ramps of wrapped
// components are removed before filtering and restored after. No-op on
// other topologies.
void polar_lowpass(Field& f);

// In-place radix-2 FFT (size a power of two).
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

struct RefinementFit {
  double order = 0.0;
  bool conclusive = false;
};

// Least-squares slope of log(err) against log(h). Inconclusive when fewer
// than 3 grids, errors not strictly decreasing, or any error at the
// rounding floor.
RefinementFit refinement_order(const std::vector<double>& hs,
                               const std::vector<double>& errs,
                               double floor_abs = 1e-13);

}  // namespace graphflow
