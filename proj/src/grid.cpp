/// @file
/// @brief Structured grids, wrap-aware stencils, divergence-form
///        Laplacian, quadrature, and the sphere polar low-pass.

#include "graphflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "graphflow/core.hpp"

namespace graphflow {

namespace {

constexpr double kPi = std::numbers::pi;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_order(int order) {
  if (order != 2 && order != 4) {
    throw ConfigError("stencil order must be 2 or 4");
  }
}

void check_dim(std::size_t d) {
  if (d < 1 || d > 2) {
    throw ConfigError("grid dimension must be 1 or 2");
  }
}

}  // namespace

Grid Grid::periodic_box(const Vec& lengths, const std::vector<int>& res,
                        int order) {
  check_order(order);
  check_dim(res.size());
  if (static_cast<std::size_t>(lengths.size()) != res.size()) {
    throw ConfigError("periodic box: lengths/res dimension mismatch");
  }
  Grid g;
  g.topology_ = GridTopology::PeriodicBox;
  g.dim_ = static_cast<int>(res.size());
  g.order_ = order;
  g.size_ = 1;
  for (int a = 0; a < g.dim_; ++a) {
    if (res[a] < 8) throw ConfigError("periodic box: need at least 8 nodes per axis");
    if (!(lengths[a] > 0.0)) throw ConfigError("periodic box: lengths must be positive");
    g.res_[a] = res[a];
    g.len_[a] = lengths[a];
    g.h_[a] = lengths[a] / res[a];
    g.size_ *= res[a];
  }
  g.build_interior_sets();
  return g;
}

Grid Grid::lat_long_sphere(int n_theta, int n_phi, int order) {
  check_order(order);
  if (n_theta < 4) throw ConfigError("sphere grid: need at least 4 rings");
  if (n_phi < 8 || !power_of_two(n_phi)) {
    throw ConfigError("sphere grid: longitude count must be a power of two >= 8");
  }
  Grid g;
  g.topology_ = GridTopology::LatLongSphere;
  g.dim_ = 2;
  g.order_ = order;
  g.res_[0] = n_theta;
  g.res_[1] = n_phi;
  g.h_[0] = kPi / n_theta;
  g.h_[1] = 2.0 * kPi / n_phi;
  g.len_[0] = kPi;
  g.len_[1] = 2.0 * kPi;
  g.size_ = static_cast<std::int64_t>(n_theta) * n_phi;
  g.build_interior_sets();
  return g;
}

Grid Grid::bounded_chart(const Vec& lo, const Vec& hi,
                         const std::vector<int>& res, int order,
                         std::function<bool(const Vec&)> mask) {
  check_order(order);
  check_dim(res.size());
  if (static_cast<std::size_t>(lo.size()) != res.size() ||
      static_cast<std::size_t>(hi.size()) != res.size()) {
    throw ConfigError("bounded chart: lo/hi/res dimension mismatch");
  }
  Grid g;
  g.topology_ = GridTopology::BoundedChart;
  g.dim_ = static_cast<int>(res.size());
  g.order_ = order;
  g.size_ = 1;
  for (int a = 0; a < g.dim_; ++a) {
    if (res[a] < 2 * order + 1) {
      throw ConfigError("bounded chart: resolution too small for the stencil");
    }
    if (!(hi[a] > lo[a])) throw ConfigError("bounded chart: need hi > lo");
    g.res_[a] = res[a];
    g.lo_[a] = lo[a];
    g.len_[a] = hi[a] - lo[a];
    g.h_[a] = (hi[a] - lo[a]) / (res[a] - 1);
    g.size_ *= res[a];
  }
  g.valid_.assign(static_cast<std::size_t>(g.size_), 1);
  if (mask) {
    for (std::int64_t n = 0; n < g.size_; ++n) {
      g.valid_[static_cast<std::size_t>(n)] = mask(g.point(n)) ? 1 : 0;
    }
  }
  g.build_interior_sets();
  return g;
}

void Grid::build_interior_sets() {
  jet_mask_.assign(static_cast<std::size_t>(size_), 1);
  lap_mask_.assign(static_cast<std::size_t>(size_), 1);
  if (topology_ == GridTopology::BoundedChart) {
    // Composed passes (stencils over per-node data built from jets) need jet
    // support at every read node: deriv1 reads order/2 away, the divergence
    // laplacian reads values two away and metric data one away.
    const int rj = order_ / 2;
    const int rl = std::max(order_, order_ / 2 + 2);
    for (std::int64_t n = 0; n < size_; ++n) {
      const int i0 = static_cast<int>(dim_ == 2 ? n / res_[1] : n);
      const int i1 = static_cast<int>(dim_ == 2 ? n % res_[1] : 0);
      auto box_valid = [&](int radius) {
        const int rb = dim_ == 2 ? radius : 0;
        for (int a = -radius; a <= radius; ++a) {
          const int j0 = i0 + a;
          if (j0 < 0 || j0 >= res_[0]) return false;
          for (int b = -rb; b <= rb; ++b) {
            const int j1 = i1 + b;
            if (dim_ == 2 && (j1 < 0 || j1 >= res_[1])) return false;
            const std::int64_t q = dim_ == 2
                ? static_cast<std::int64_t>(j0) * res_[1] + j1
                : static_cast<std::int64_t>(j0);
            if (!valid_[static_cast<std::size_t>(q)]) return false;
          }
        }
        return true;
      };
      jet_mask_[static_cast<std::size_t>(n)] = box_valid(rj) ? 1 : 0;
      lap_mask_[static_cast<std::size_t>(n)] = box_valid(rl) ? 1 : 0;
    }
  }
  jet_nodes_.clear();
  lap_nodes_.clear();
  for (std::int64_t n = 0; n < size_; ++n) {
    if (jet_mask_[static_cast<std::size_t>(n)]) jet_nodes_.push_back(n);
    if (lap_mask_[static_cast<std::size_t>(n)]) lap_nodes_.push_back(n);
  }
}

Vec Grid::point(std::int64_t node) const {
  Vec x(dim_);
  const int i0 = static_cast<int>(dim_ == 2 ? node / res_[1] : node);
  const int i1 = static_cast<int>(dim_ == 2 ? node % res_[1] : 0);
  switch (topology_) {
    case GridTopology::PeriodicBox:
      x(0) = i0 * h_[0];
      if (dim_ == 2) x(1) = i1 * h_[1];
      break;
    case GridTopology::LatLongSphere:
      x(0) = (i0 + 0.5) * h_[0];
      x(1) = i1 * h_[1];
      break;
    case GridTopology::BoundedChart:
      x(0) = lo_[0] + i0 * h_[0];
      if (dim_ == 2) x(1) = lo_[1] + i1 * h_[1];
      break;
  }
  return x;
}

NeighborRef Grid::neighbor(std::int64_t node, int axis, int offset) const {
  int i0 = static_cast<int>(dim_ == 2 ? node / res_[1] : node);
  int i1 = static_cast<int>(dim_ == 2 ? node % res_[1] : 0);
  bool flip = false;
  int* idx = axis == 0 ? &i0 : &i1;
  *idx += offset;
  switch (topology_) {
    case GridTopology::PeriodicBox: {
      const int r = res_[axis];
      *idx = ((*idx % r) + r) % r;
      break;
    }
    case GridTopology::LatLongSphere: {
      if (axis == 1) {
        const int r = res_[1];
        i1 = ((i1 % r) + r) % r;
      } else {
        // Reflect across a pole: ring j -> -1-j (south: 2N-1-j), column
        // shifts by half a revolution, theta direction reverses.
        while (i0 < 0 || i0 >= res_[0]) {
          if (i0 < 0) i0 = -1 - i0; else i0 = 2 * res_[0] - 1 - i0;
          i1 = (i1 + res_[1] / 2) % res_[1];
          flip = !flip;
        }
      }
      break;
    }
    case GridTopology::BoundedChart: {
      if (*idx < 0 || *idx >= res_[axis]) return NeighborRef{-1, false};
      break;
    }
  }
  const std::int64_t q = dim_ == 2
      ? static_cast<std::int64_t>(i0) * res_[1] + i1
      : static_cast<std::int64_t>(i0);
  if (topology_ == GridTopology::BoundedChart &&
      !valid_[static_cast<std::size_t>(q)]) {
    return NeighborRef{-1, false};
  }
  return NeighborRef{q, flip};
}

bool Grid::valid(std::int64_t node) const {
  if (node < 0 || node >= size_) return false;
  if (valid_.empty()) return true;
  return valid_[static_cast<std::size_t>(node)] != 0;
}

bool Grid::jet_interior(std::int64_t node) const {
  return node >= 0 && node < size_ &&
         jet_mask_[static_cast<std::size_t>(node)] != 0;
}

bool Grid::lap_interior(std::int64_t node) const {
  return node >= 0 && node < size_ &&
         lap_mask_[static_cast<std::size_t>(node)] != 0;
}

double Grid::cell_weight() const {
  switch (topology_) {
    case GridTopology::LatLongSphere:
      return 2.0 * std::sin(0.5 * h_[0]) * h_[1];
    default: {
      double w = 1.0;
      for (int a = 0; a < dim_; ++a) w *= h_[a];
      return w;
    }
  }
}

double Grid::pole_cap(std::int64_t node) const {
  if (topology_ != GridTopology::LatLongSphere) return 1.0;
  const double s = std::sin(point(node)(0));
  return s * s;
}

bool Grid::operator==(const Grid& o) const {
  if (topology_ != o.topology_ || dim_ != o.dim_ || order_ != o.order_) {
    return false;
  }
  for (int a = 0; a < dim_; ++a) {
    if (res_[a] != o.res_[a] || h_[a] != o.h_[a] || lo_[a] != o.lo_[a]) {
      return false;
    }
  }
  return valid_ == o.valid_;
}

Field::Field(const Grid& grid, int comps)
    : grid_(&grid),
      comps_(comps),
      plane_(grid.size()),
      v_(static_cast<std::size_t>(grid.size()) * comps, 0.0),
      wrap_(static_cast<std::size_t>(comps), 0.0) {
  if (comps < 1 || comps > kMaxDim) {
    throw ConfigError("field component count out of range");
  }
}

void Field::set_wrap(int c, double period) {
  if (period < 0.0) throw ConfigError("wrap period must be >= 0");
  wrap_[static_cast<std::size_t>(c)] = period;
}

double Field::sampled(std::int64_t center, std::int64_t nbr, int c) const {
  double v = at(nbr, c);
  const double T = wrap_[static_cast<std::size_t>(c)];
  if (T > 0.0) {
    v -= T * std::round((v - at(center, c)) / T);
  }
  return v;
}

namespace {

// Composed neighbor offset (a along axis 0, b along axis 1).
std::int64_t offset_node(const Grid& g, std::int64_t node, int a, int b) {
  NeighborRef r{node, false};
  if (a != 0) r = g.neighbor(r.node, 0, a);
  if (r.node >= 0 && b != 0) r = g.neighbor(r.node, 1, b);
  return r.node;
}

}  // namespace

std::vector<GraphJet> jets(const Field& f) {
  std::vector<GraphJet> out;
  jets_into(f, out);
  return out;
}

void jets_into(const Field& f, std::vector<GraphJet>& out) {
  const Grid& g = f.grid();
  const int m = g.dim();
  const int n = f.comps();
  const int order = g.order();
  const bool all_jet = g.jet_nodes().size() == static_cast<std::size_t>(g.size());
  if (!all_jet) {
    out.assign(static_cast<std::size_t>(g.size()), GraphJet{});
  } else {
    out.resize(static_cast<std::size_t>(g.size()));
  }
  const auto& nodes = g.jet_nodes();

  parallel_blocks(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t lo,
                                                               std::int64_t hi) {
    for (std::int64_t t = lo; t < hi; ++t) {
      const std::int64_t node = nodes[static_cast<std::size_t>(t)];
      GraphJet& jet = out[static_cast<std::size_t>(node)];
      jet.p = g.point(node);
      jet.f = Vec(n);
      jet.df = Mat::Zero(n, m);
      jet.d2f.resize(n, m, m);

      auto sample = [&](int a, int b, int c) {
        const std::int64_t q = offset_node(g, node, a, b);
        return f.sampled(node, q, c);
      };

      for (int c = 0; c < n; ++c) {
        const double u0 = f.at(node, c);
        if (!std::isfinite(u0)) {
          std::ostringstream os;
          os << "non-finite field value at node " << node << " component " << c;
          throw DataError(os.str());
        }
        jet.f(c) = u0;
        for (int ax = 0; ax < m; ++ax) {
          const double h = g.spacing(ax);
          auto sax = [&](int s) { return ax == 0 ? sample(s, 0, c) : sample(0, s, c); };
          double d1, d2;
          if (order == 2) {
            const double up = sax(1), um = sax(-1);
            d1 = (up - um) / (2.0 * h);
            d2 = (up - 2.0 * u0 + um) / (h * h);
          } else {
            const double up = sax(1), um = sax(-1), up2 = sax(2), um2 = sax(-2);
            d1 = (-up2 + 8.0 * up - 8.0 * um + um2) / (12.0 * h);
            d2 = (-up2 + 16.0 * up - 30.0 * u0 + 16.0 * um - um2) / (12.0 * h * h);
          }
          if (!std::isfinite(d1) || !std::isfinite(d2)) {
            std::ostringstream os;
            os << "non-finite field value near node " << node << " component " << c;
            throw DataError(os.str());
          }
          jet.df(c, ax) = d1;
          jet.d2f[c](ax, ax) = d2;
        }
        if (m == 2) {
          double dxy;
          if (order == 2) {
            dxy = (sample(1, 1, c) - sample(1, -1, c) - sample(-1, 1, c) +
                   sample(-1, -1, c)) /
                  (4.0 * g.spacing(0) * g.spacing(1));
          } else {
            static constexpr double kC[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0,
                                             8.0 / 12.0, -1.0 / 12.0};
            double acc = 0.0;
            for (int a = -2; a <= 2; ++a) {
              if (kC[a + 2] == 0.0) continue;
              for (int b = -2; b <= 2; ++b) {
                if (kC[b + 2] == 0.0) continue;
                acc += kC[a + 2] * kC[b + 2] * sample(a, b, c);
              }
            }
            dxy = acc / (g.spacing(0) * g.spacing(1));
          }
          if (!std::isfinite(dxy)) {
            std::ostringstream os;
            os << "non-finite field value near node " << node << " component " << c;
            throw DataError(os.str());
          }
          jet.d2f[c](0, 1) = dxy;
          jet.d2f[c](1, 0) = dxy;
        }
      }
    }
  });
}

double deriv1(const Field& f, int c, std::int64_t node, int axis) {
  const Grid& g = f.grid();
  const std::int64_t qp = g.neighbor(node, axis, 1).node;
  const std::int64_t qm = g.neighbor(node, axis, -1).node;
  return (f.sampled(node, qp, c) - f.sampled(node, qm, c)) / (2.0 * g.spacing(axis));
}

std::vector<double> laplace_beltrami(const Field& f, int c,
                                     const std::vector<Mat>& ginv,
                                     const std::vector<double>& sqrt_det) {
  const Grid& g = f.grid();
  const int m = g.dim();
  std::vector<double> out(static_cast<std::size_t>(g.size()), 0.0);
  const auto& nodes = g.lap_nodes();

  // Flux component a at node q, in q's own chart orientation.
  auto flux = [&](std::int64_t q, int a) {
    double F = 0.0;
    for (int b = 0; b < m; ++b) {
      const std::int64_t qp = g.neighbor(q, b, 1).node;
      const std::int64_t qm = g.neighbor(q, b, -1).node;
      const double Pb =
          (f.sampled(q, qp, c) - f.sampled(q, qm, c)) / (2.0 * g.spacing(b));
      F += ginv[static_cast<std::size_t>(q)](a, b) * Pb;
    }
    return sqrt_det[static_cast<std::size_t>(q)] * F;
  };

  parallel_blocks(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t lo,
                                                               std::int64_t hi) {
    for (std::int64_t t = lo; t < hi; ++t) {
      const std::int64_t node = nodes[static_cast<std::size_t>(t)];
      double div = 0.0;
      for (int a = 0; a < m; ++a) {
        const NeighborRef rp = g.neighbor(node, a, 1);
        const NeighborRef rm = g.neighbor(node, a, -1);
        // Across a pole the theta direction reverses AND the metric
        // density sqrt(det g) = sin(theta) continues with a sign change;
        // the two cancel, so the densitized flux is sampled plainly.
        div += (flux(rp.node, a) - flux(rm.node, a)) / (2.0 * g.spacing(a));
      }
      out[static_cast<std::size_t>(node)] =
          div / sqrt_det[static_cast<std::size_t>(node)];
    }
  });
  return out;
}

double integrate(const Grid& grid, const std::vector<double>& density,
                 const std::vector<std::int64_t>& nodes) {
  const double w = grid.cell_weight();
  return w * block_sum(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t t) {
    return density[static_cast<std::size_t>(nodes[static_cast<std::size_t>(t)])];
  });
}

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw NumericError("fft size must be a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& z : a) z /= static_cast<double>(n);
  }
}

void polar_lowpass(Field& f) {
  const Grid& g = f.grid();
  if (g.topology() != GridTopology::LatLongSphere) return;
  const int nt = g.res(0);
  const int np = g.res(1);
  const double hphi = g.spacing(1);
  std::vector<std::complex<double>> ring(static_cast<std::size_t>(np));
  std::vector<double> unwrapped(static_cast<std::size_t>(np));

  for (int j = 0; j < nt; ++j) {
    const double theta = (j + 0.5) * g.spacing(0);
    const double dist = std::min(theta, kPi - theta);
    const int keep = std::max(1, static_cast<int>(std::floor(1.8 * dist / hphi)));
    if (keep >= np / 2) continue;
    const std::int64_t base = static_cast<std::int64_t>(j) * np;

    for (int c = 0; c < f.comps(); ++c) {
      const double T = f.wrap(c);
      double ramp_step = 0.0;
      if (T > 0.0) {
        // Unwrap the ring, extract the winding ramp.
        double acc = f.at(base, c);
        unwrapped[0] = acc;
        double total = 0.0;
        for (int i = 1; i <= np; ++i) {
          const int i0 = i % np;
          const double prev = f.at(base + (i - 1) % np, c);
          double d = f.at(base + i0, c) - prev;
          d -= T * std::round(d / T);
          total += d;
          if (i < np) {
            acc += d;
            unwrapped[static_cast<std::size_t>(i)] = acc;
          }
        }
        const double winding = std::round(total / T);
        ramp_step = winding * T / np;
        for (int i = 0; i < np; ++i) {
          ring[static_cast<std::size_t>(i)] =
              unwrapped[static_cast<std::size_t>(i)] - ramp_step * i;
        }
      } else {
        for (int i = 0; i < np; ++i) {
          ring[static_cast<std::size_t>(i)] = f.at(base + i, c);
        }
      }
      fft_pow2(ring, false);
      for (int k = 0; k < np; ++k) {
        const int mode = std::min(k, np - k);
        if (mode > keep) ring[static_cast<std::size_t>(k)] = 0.0;
      }
      fft_pow2(ring, true);
      for (int i = 0; i < np; ++i) {
        f.at(base + i, c) = ring[static_cast<std::size_t>(i)].real() + ramp_step * i;
      }
    }
  }
}

RefinementFit refinement_order(const std::vector<double>& hs,
                               const std::vector<double>& errs,
                               double floor_abs) {
  RefinementFit fit;
  const std::size_t n = hs.size();
  if (n != errs.size() || n < 3) return fit;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(hs[i] > 0.0) || !std::isfinite(errs[i])) return fit;
    if (errs[i] <= floor_abs) return fit;  // at the rounding floor
    if (i > 0 && !(hs[i] < hs[i - 1] && errs[i] < errs[i - 1])) return fit;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(errs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double d = n * sxx - sx * sx;
  fit.order = (n * sxy - sx * sy) / d;
  fit.conclusive = true;
  return fit;
}

}  // namespace graphflow
