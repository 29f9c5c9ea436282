/// @file
/// @brief Guarded midpoint integration of the graph heat system, the
///        tension field and its divergence-form cross-check, and binary
///        checkpoints.

#include "graphflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace graphflow {

namespace {

// Sphere residual window: nodes within this colatitude of a pole are
// excluded from sup-norm diagnostics (one-sided pole error scales like
// h^2 / colatitude and would mask the interior order).
constexpr double kPolarWindow = 0.5;

// Largest eigenvalue of g1^{-1} W for m <= 2 without an eigensolver.
double max_stretch_sq(const Mat& g1inv, const Mat& W) {
  const int m = static_cast<int>(W.rows());
  if (m == 1) return g1inv(0, 0) * W(0, 0);
  if (m == 2) {
    const Mat A = g1inv * W;
    const double tr = A(0, 0) + A(1, 1);
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    return 0.5 * (tr + disc);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (g1inv * W + (g1inv * W).transpose()));
  return eig.eigenvalues().maxCoeff();
}

Mat inverse_small(const Mat& g) {
  const int m = static_cast<int>(g.rows());
  Mat inv(m, m);
  if (m == 1) {
    inv(0, 0) = 1.0 / g(0, 0);
  } else if (m == 2) {
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    inv(0, 0) = g(1, 1) / det;
    inv(1, 1) = g(0, 0) / det;
    inv(0, 1) = -g(0, 1) / det;
    inv(1, 0) = -g(1, 0) / det;
  } else {
    inv = g.inverse();
  }
  return inv;
}

// Stability coefficient of the node: spectral max of ginv with the
// azimuthal entry damped by the pole cap the low-pass enforces.
double lambda_eff(const Mat& ginv, double cap) {
  const int m = static_cast<int>(ginv.rows());
  if (m == 1) return ginv(0, 0);
  const double b00 = ginv(0, 0);
  const double b11 = ginv(1, 1) * cap;
  const double b01 = ginv(0, 1) * std::sqrt(cap);
  return 0.5 * (b00 + b11) + std::sqrt(0.25 * (b00 - b11) * (b00 - b11) + b01 * b01);
}

}  // namespace

bool residual_window(const Grid& grid, std::int64_t node) {
  if (grid.topology() != GridTopology::LatLongSphere) return true;
  const double th = grid.point(node)(0);
  return th >= kPolarWindow && th <= M_PI - kPolarWindow;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::SliceConverged: return "slice-converged";
    case Termination::MaximalConverged: return "maximal-converged";
    case Termination::TMaxReached: return "t-max-reached";
    case Termination::SpacelikeGuard: return "spacelike-guard";
    case Termination::NumericFailure: return "numeric-failure";
  }
  return "unknown";
}

DomainCache build_domain_cache(const ProductSpace& space, const Grid& grid) {
  const std::int64_t N = grid.size();
  DomainCache dom;
  dom.g1.resize(static_cast<std::size_t>(N));
  dom.g1inv.resize(static_cast<std::size_t>(N));
  dom.gamma1.resize(static_cast<std::size_t>(N));
  dom.sqrt_det1.resize(static_cast<std::size_t>(N));
  parallel_blocks(N, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      const Vec x = grid.point(i);
      const std::size_t s = static_cast<std::size_t>(i);
      dom.g1[s] = space.g1(x);
      dom.g1inv[s] = space.sigma1().metric_inverse(x);
      dom.gamma1[s] = space.sigma1().christoffels(x);
      dom.sqrt_det1[s] = space.sigma1().volume_weight(x);
    }
  });
  return dom;
}

VelocityPass tension_velocity(const ProductSpace& space, const Grid& grid,
                              const std::vector<GraphJet>& jets,
                              const DomainCache& dom, Field* v) {
  const std::int64_t N = grid.size();
  const int m = space.m();
  const int n = space.n();
  const std::int64_t nb = block_count(N);
  std::vector<double> blk_margin(static_cast<std::size_t>(nb),
                                 std::numeric_limits<double>::infinity());
  std::vector<double> blk_lam(static_cast<std::size_t>(nb), 0.0);
  std::vector<std::uint8_t> blk_fin(static_cast<std::size_t>(nb), 1);

  parallel_blocks(N, [&](std::int64_t lo, std::int64_t hi) {
    const std::size_t blk = static_cast<std::size_t>(lo / kBlockSize);
    double mmin = std::numeric_limits<double>::infinity();
    double lmax = 0.0;
    bool fin = true;
    for (std::int64_t node = lo; node < hi; ++node) {
      const GraphJet& jt = jets[static_cast<std::size_t>(node)];
      if (jt.p.size() == 0) {
        if (v) {
          for (int c = 0; c < n; ++c) v->at(node, c) = 0.0;
        }
        continue;
      }
      const std::size_t s = static_cast<std::size_t>(node);
      const Mat g2 = space.g2(jt.f);
      const Mat W = jt.df.transpose() * g2 * jt.df;
      const double margin = 1.0 - max_stretch_sq(dom.g1inv[s], W);
      mmin = std::min(mmin, margin);
      if (margin <= 0.0) {
        if (v) {
          for (int c = 0; c < n; ++c) v->at(node, c) = 0.0;
        }
        continue;
      }
      const Mat ginv = inverse_small(dom.g1[s] - W);
      lmax = std::max(lmax, lambda_eff(ginv, grid.pole_cap(node)));
      if (!v) continue;
      const Ten3& G1 = dom.gamma1[s];
      const Ten3 G2 = space.christoffels2(jt.f);
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            double t = jt.d2f[c](i, j);
            for (int k = 0; k < m; ++k) t -= G1[k](i, j) * jt.df(c, k);
            for (int al = 0; al < n; ++al) {
              for (int be = 0; be < n; ++be) {
                t += G2[c](al, be) * jt.df(al, i) * jt.df(be, j);
              }
            }
            acc += ginv(i, j) * t;
          }
        }
        fin = fin && std::isfinite(acc);
        v->at(node, c) = acc;
      }
    }
    blk_margin[blk] = mmin;
    blk_lam[blk] = lmax;
    blk_fin[blk] = fin ? 1 : 0;
  });

  VelocityPass out;
  for (std::int64_t b = 0; b < nb; ++b) {
    const std::size_t s = static_cast<std::size_t>(b);
    out.min_margin = std::min(out.min_margin, blk_margin[s]);
    out.lambda_eff_max = std::max(out.lambda_eff_max, blk_lam[s]);
    out.finite = out.finite && blk_fin[s] != 0;
  }
  return out;
}

Field tension_velocity(const ProductSpace& space, const Field& f) {
  Field v(f.grid(), f.comps());
  const DomainCache dom = build_domain_cache(space, f.grid());
  const std::vector<GraphJet> J = jets(f);
  tension_velocity(space, f.grid(), J, dom, &v);
  return v;
}

double normal_velocity_check(const ProductSpace& space, const Field& f) {
  const Grid& grid = f.grid();
  const int m = grid.dim();
  const int n = f.comps();
  const std::int64_t N = grid.size();
  const DomainCache dom = build_domain_cache(space, grid);
  const std::vector<GraphJet> J = jets(f);
  Field v(grid, n);
  const VelocityPass pass = tension_velocity(space, grid, J, dom, &v);
  if (!(pass.min_margin > 0.0)) {
    throw GuardError("normal velocity check on a non-spacelike state");
  }

  // Induced inverse metric and volume density fields for the flux route.
  std::vector<Mat> ginv(static_cast<std::size_t>(N), Mat::Identity(m, m));
  std::vector<double> sdet(static_cast<std::size_t>(N), 1.0);
  for (std::int64_t node = 0; node < N; ++node) {
    const GraphJet& jt = J[static_cast<std::size_t>(node)];
    if (jt.p.size() == 0) continue;
    const Mat g = dom.g1[static_cast<std::size_t>(node)] -
                  jt.df.transpose() * space.g2(jt.f) * jt.df;
    ginv[static_cast<std::size_t>(node)] = inverse_small(g);
    sdet[static_cast<std::size_t>(node)] = std::sqrt(g.determinant());
  }

  std::vector<std::vector<double>> lap(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) lap[static_cast<std::size_t>(c)] = laplace_beltrami(f, c, ginv, sdet);

  // Densitized metric fluxes sqrt(det g) g^{ak}, differenced per axis.
  Field flux(grid, m * m);
  for (std::int64_t node = 0; node < N; ++node) {
    const std::size_t s = static_cast<std::size_t>(node);
    for (int a = 0; a < m; ++a) {
      for (int k = 0; k < m; ++k) flux.at(node, a * m + k) = sdet[s] * ginv[s](a, k);
    }
  }

  double worst = 0.0;
  for (std::int64_t node : grid.lap_nodes()) {
    if (!residual_window(grid, node)) continue;
    const std::size_t s = static_cast<std::size_t>(node);
    const GraphJet& jt = J[s];
    const PointGeometry pg = point_geometry(jt, space);
    const Ten3& G1 = dom.gamma1[s];
    const Ten3 G2 = space.christoffels2(jt.f);

    PVec trace_vec = PVec::Zero(m + n);
    for (int k = 0; k < m; ++k) {
      double d = 0.0;
      for (int a = 0; a < m; ++a) {
        d += deriv1(flux, a * m + k, node, a);
      }
      d /= sdet[s];
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) d += ginv[s](i, j) * G1[k](i, j);
      }
      trace_vec(k) = d;
    }
    for (int c = 0; c < n; ++c) {
      double t = lap[static_cast<std::size_t>(c)][s];
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          double curv = 0.0;
          for (int al = 0; al < n; ++al) {
            for (int be = 0; be < n; ++be) {
              curv += G2[c](al, be) * jt.df(al, i) * jt.df(be, j);
            }
          }
          t += ginv[s](i, j) * curv;
        }
      }
      trace_vec(m + c) = t;
    }

    PVec via_v = PVec::Zero(m + n);
    for (int c = 0; c < n; ++c) via_v(m + c) = v.at(node, c);

    const PMat gbar = space.gbar(jt.p, jt.f);
    const ProductProjectors proj =
        product_projectors(gbar, pg.frames.e_tan, pg.frames.e_nor);
    const PVec diff = proj.normal * (via_v - trace_vec);
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double c_a = -pg.frames.e_nor.col(a).dot(gbar * diff);
      r2 += c_a * c_a;
    }
    worst = std::max(worst, std::sqrt(r2));
  }
  return worst;
}

// ============================================================================
// FlowEngine
// ============================================================================

FlowEngine::FlowEngine(const ProductSpace& space, const Grid& grid, FlowConfig cfg)
    : space_(space),
      grid_(grid),
      cfg_(std::move(cfg)),
      dom_(build_domain_cache(space_, grid_)),
      f_(grid_, space_.n()),
      mid_(grid_, space_.n()),
      next_(grid_, space_.n()),
      v1_(grid_, space_.n()),
      v2_(grid_, space_.n()) {
  if (grid_.topology() == GridTopology::BoundedChart) {
    throw ConfigError("flow needs a closed chart (periodic box or sphere)");
  }
  if (!(cfg_.cfl > 0.0 && cfg_.cfl <= 1.0)) {
    throw ConfigError("cfl must lie in (0, 1]");
  }
  if (!(cfg_.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (cfg_.monitor_stride < 1) throw ConfigError("monitor_stride must be >= 1");
  if (cfg_.checkpoint_stride < 0) throw ConfigError("checkpoint_stride must be >= 0");
  if (!(cfg_.tol_H > 0.0) || !(cfg_.tol_osc > 0.0) || !(cfg_.guard_margin >= 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  h_min_sq_ = grid_.spacing(0) * grid_.spacing(0);
  for (int a = 1; a < grid_.dim(); ++a) {
    h_min_sq_ = std::min(h_min_sq_, grid_.spacing(a) * grid_.spacing(a));
  }
}

void FlowEngine::monitor(double dt_next, const MonitorHook& hook,
                         DiagnosticsRecord& rec) {
  const std::int64_t N = grid_.size();
  geom_.resize(static_cast<std::size_t>(N));
  parallel_blocks(N, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      if (jets_[s].p.size() != 0) geom_[s] = point_geometry(jets_[s], space_);
    }
  });

  rec.t = sc_.t;
  rec.dt = dt_next;
  rec.max_cosh_theta =
      block_max(N, [&](std::int64_t i) { return geom_[static_cast<std::size_t>(i)].cosh_theta.product; });
  rec.min_margin =
      block_min(N, [&](std::int64_t i) { return geom_[static_cast<std::size_t>(i)].sing.margin; });
  const double max_H2 =
      block_max(N, [&](std::int64_t i) { return geom_[static_cast<std::size_t>(i)].sff.H2; });
  rec.sup_H = std::sqrt(max_H2);
  rec.max_B2 =
      block_max(N, [&](std::int64_t i) { return geom_[static_cast<std::size_t>(i)].sff.B2; });

  std::vector<double> dens(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t i = 0; i < N; ++i) {
    dens[static_cast<std::size_t>(i)] = std::sqrt(std::max(geom_[static_cast<std::size_t>(i)].metric.det, 0.0));
  }
  rec.volume = integrate(grid_, dens, grid_.jet_nodes());
  for (std::int64_t i = 0; i < N; ++i) {
    dens[static_cast<std::size_t>(i)] *= geom_[static_cast<std::size_t>(i)].sff.H2;
  }
  const double s_rate = integrate(grid_, dens, grid_.jet_nodes()) / rec.volume;

  if (sc_.vol0 < 0.0) {
    sc_.vol0 = rec.volume;
    sc_.law_integral = 0.0;
    rec.volume_law_residual = 0.0;
  } else {
    sc_.law_integral += 0.5 * (sc_.s_prev + s_rate) * (sc_.t - sc_.t_prev_record);
    rec.volume_law_residual =
        std::abs(rec.volume - sc_.vol0 * std::exp(sc_.law_integral)) / sc_.vol0;
  }
  sc_.s_prev = s_rate;
  sc_.t_prev_record = sc_.t;

  rec.monotonicity_ok = rec.max_cosh_theta <= sc_.prev_max_cosh + cfg_.mono_slack;
  sc_.prev_max_cosh = rec.max_cosh_theta;

  // Value spread, for the slice-convergence decision.
  last_osc_ = 0.0;
  for (int c = 0; c < f_.comps(); ++c) {
    const double hi = block_max(N, [&](std::int64_t i) { return f_.at(i, c); });
    const double lo = block_min(N, [&](std::int64_t i) { return f_.at(i, c); });
    last_osc_ = std::max(last_osc_, hi - lo);
  }

  if (hook) {
    Frame frame{space_, grid_, f_, v1_, jets_, geom_, sc_.t, dt_next};
    hook(frame, rec);
  }
  if (std::isfinite(rec.eq4_gap)) {
    sc_.eq4_running_max = std::max(sc_.eq4_running_max, std::abs(rec.eq4_gap));
  }
}

FlowEngine::StepStatus FlowEngine::try_step(double dt) {
  StepStatus st;
  const std::vector<double>& f0 = f_.raw();
  std::vector<double>& fm = mid_.raw();
  const std::vector<double>& w1 = v1_.raw();
  for (std::size_t i = 0; i < f0.size(); ++i) fm[i] = f0[i] + 0.5 * dt * w1[i];
  polar_lowpass(mid_);
  jets_into(mid_, jets_scratch_);
  const VelocityPass pm = tension_velocity(space_, grid_, jets_scratch_, dom_, &v2_);
  if (!pm.finite) {
    st.numeric_failure = true;
    return st;
  }
  if (!(pm.min_margin > cfg_.guard_margin)) return st;

  std::vector<double>& fn = next_.raw();
  const std::vector<double>& w2 = v2_.raw();
  for (std::size_t i = 0; i < f0.size(); ++i) fn[i] = f0[i] + dt * w2[i];
  polar_lowpass(next_);
  jets_into(next_, jets_scratch_);
  const VelocityPass pn = tension_velocity(space_, grid_, jets_scratch_, dom_, nullptr);
  if (!pn.finite) {
    st.numeric_failure = true;
    return st;
  }
  if (!(pn.min_margin > cfg_.guard_margin)) return st;

  std::swap(f_.raw(), next_.raw());
  st.accepted = true;
  return st;
}

Termination FlowEngine::run(const RecordSink& sink, const MonitorHook& hook) {
  for (int c = 0; c < f_.comps(); ++c) {
    mid_.set_wrap(c, f_.wrap(c));
    next_.set_wrap(c, f_.wrap(c));
  }
  try {
    for (;;) {
      jets_into(f_, jets_);
      const VelocityPass p1 = tension_velocity(space_, grid_, jets_, dom_, &v1_);
      if (!p1.finite) return Termination::NumericFailure;
      if (!(p1.min_margin > cfg_.guard_margin)) return Termination::SpacelikeGuard;

      const double dt_stab =
          cfg_.cfl * h_min_sq_ / (2.0 * space_.m() * p1.lambda_eff_max);
      const double remaining = cfg_.t_max - sc_.t;
      const bool tmax_due = remaining <= 1e-14 * std::max(1.0, cfg_.t_max);
      const double dt = std::min(dt_stab, std::max(remaining, 0.0));

      if (sc_.step % cfg_.monitor_stride == 0 || tmax_due) {
        DiagnosticsRecord rec;
        monitor(dt, hook, rec);
        if (sink) sink(rec);
        if (last_osc_ < cfg_.tol_osc) return Termination::SliceConverged;
        if (rec.sup_H < cfg_.tol_H) return Termination::MaximalConverged;
        if (tmax_due) return Termination::TMaxReached;
      }
      if (cfg_.checkpoint_stride > 0 && !cfg_.checkpoint_path.empty() &&
          sc_.step > 0 && sc_.step % cfg_.checkpoint_stride == 0) {
        save_checkpoint(cfg_.checkpoint_path, f_, sc_);
      }

      double dt_try = dt;
      for (int tries = 0;; ++tries) {
        const StepStatus st = try_step(dt_try);
        if (st.numeric_failure) return Termination::NumericFailure;
        if (st.accepted) break;
        if (tries >= 8) return Termination::SpacelikeGuard;
        dt_try *= 0.5;
      }
      sc_.t += dt_try;
      ++sc_.step;
    }
  } catch (const DataError&) {
    return Termination::NumericFailure;
  }
}

// ============================================================================
// Checkpoints
// ============================================================================

namespace {

constexpr char kMagic[8] = {'G', 'R', 'A', 'P', 'H', 'F', 'L', 'W'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32_bytes(const unsigned char* p, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

struct ByteWriter {
  std::string buf;
  void bytes(const void* p, std::size_t len) {
    buf.append(static_cast<const char*>(p), len);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void i64(std::int64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
};

struct ByteReader {
  const unsigned char* p;
  std::size_t len;
  std::size_t off = 0;
  void need(std::size_t k) const {
    if (off + k > len) throw FormatError("checkpoint truncated");
  }
  void bytes(void* out, std::size_t k) {
    need(k);
    std::memcpy(out, p + off, k);
    off += k;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    bytes(&v, 8);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
};

struct Descriptor {
  std::uint32_t topology = 0, order = 0, dim = 0, res0 = 0, res1 = 0;
  double len0 = 0.0, len1 = 0.0;
};

void write_descriptor(ByteWriter& w, const Grid& g) {
  w.u32(static_cast<std::uint32_t>(g.topology()));
  w.u32(static_cast<std::uint32_t>(g.order()));
  w.u32(static_cast<std::uint32_t>(g.dim()));
  w.u32(static_cast<std::uint32_t>(g.res(0)));
  w.u32(static_cast<std::uint32_t>(g.dim() > 1 ? g.res(1) : 1));
  const double l0 = g.spacing(0) * g.res(0);
  const double l1 = g.dim() > 1 ? g.spacing(1) * g.res(1) : 0.0;
  w.f64(g.topology() == GridTopology::PeriodicBox ? l0 : 0.0);
  w.f64(g.topology() == GridTopology::PeriodicBox ? l1 : 0.0);
}

Grid grid_from_descriptor(const Descriptor& d) {
  if (d.topology == static_cast<std::uint32_t>(GridTopology::PeriodicBox)) {
    Vec lengths(static_cast<int>(d.dim));
    lengths(0) = d.len0;
    std::vector<int> res{static_cast<int>(d.res0)};
    if (d.dim > 1) {
      lengths(1) = d.len1;
      res.push_back(static_cast<int>(d.res1));
    }
    return Grid::periodic_box(lengths, res, static_cast<int>(d.order));
  }
  if (d.topology == static_cast<std::uint32_t>(GridTopology::LatLongSphere)) {
    return Grid::lat_long_sphere(static_cast<int>(d.res0), static_cast<int>(d.res1),
                                 static_cast<int>(d.order));
  }
  throw FormatError("checkpoint holds an unsupported grid topology");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

// Parses and CRC-checks everything up to the value block; the caller
// finishes with the values.
ByteReader open_checkpoint(const std::string& data, std::uint32_t* ncomp,
                           Descriptor* desc) {
  if (data.size() < 20) throw FormatError("checkpoint truncated");
  const unsigned char* raw = reinterpret_cast<const unsigned char*>(data.data());
  if (std::memcmp(raw, kMagic, 8) != 0) throw FormatError("bad checkpoint magic");
  ByteReader r{raw, data.size() - 4};
  r.off = 8;
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw VersionError("unsupported checkpoint version " + std::to_string(version));
  }
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, raw + data.size() - 4, 4);
  if (crc32_bytes(raw, data.size() - 4) != stored_crc) {
    throw FormatError("checkpoint CRC mismatch");
  }
  *ncomp = r.u32();
  desc->topology = r.u32();
  desc->order = r.u32();
  desc->dim = r.u32();
  desc->res0 = r.u32();
  desc->res1 = r.u32();
  desc->len0 = r.f64();
  desc->len1 = r.f64();
  return r;
}

}  // namespace

void save_checkpoint(const std::string& path, const Field& f,
                     const FlowScalars& sc) {
  const Grid& g = f.grid();
  if (g.topology() == GridTopology::BoundedChart) {
    throw ConfigError("checkpoints are limited to closed charts");
  }
  ByteWriter w;
  w.bytes(kMagic, 8);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(f.comps()));
  write_descriptor(w, g);
  for (int c = 0; c < kMaxDim; ++c) {
    w.f64(c < f.comps() ? f.wrap(c) : 0.0);
  }
  w.f64(sc.t);
  w.i64(sc.step);
  w.f64(sc.vol0);
  w.f64(sc.law_integral);
  w.f64(sc.s_prev);
  w.f64(sc.t_prev_record);
  w.f64(sc.eq4_running_max);
  w.f64(sc.prev_max_cosh);
  for (double x : f.raw()) w.f64(x);
  const std::uint32_t crc =
      crc32_bytes(reinterpret_cast<const unsigned char*>(w.buf.data()), w.buf.size());
  w.u32(crc);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write checkpoint: " + tmp);
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    if (!out) throw FormatError("short checkpoint write: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Grid load_checkpoint_grid(const std::string& path) {
  const std::string data = read_file(path);
  std::uint32_t ncomp = 0;
  Descriptor desc;
  open_checkpoint(data, &ncomp, &desc);
  return grid_from_descriptor(desc);
}

void load_checkpoint_into(const std::string& path, Field& f, FlowScalars& sc) {
  const std::string data = read_file(path);
  std::uint32_t ncomp = 0;
  Descriptor desc;
  ByteReader r = open_checkpoint(data, &ncomp, &desc);
  if (ncomp != static_cast<std::uint32_t>(f.comps())) {
    throw ConfigError("checkpoint component count does not match the scenario");
  }
  const Grid stored = grid_from_descriptor(desc);
  if (!(stored == f.grid())) {
    throw ConfigError("checkpoint grid does not match the scenario grid");
  }
  std::array<double, kMaxDim> wraps{};
  for (int c = 0; c < kMaxDim; ++c) wraps[static_cast<std::size_t>(c)] = r.f64();
  sc.t = r.f64();
  sc.step = r.i64();
  sc.vol0 = r.f64();
  sc.law_integral = r.f64();
  sc.s_prev = r.f64();
  sc.t_prev_record = r.f64();
  sc.eq4_running_max = r.f64();
  sc.prev_max_cosh = r.f64();
  for (int c = 0; c < f.comps(); ++c) f.set_wrap(c, wraps[static_cast<std::size_t>(c)]);
  for (double& x : f.raw()) x = r.f64();
  if (r.off != r.len) throw FormatError("checkpoint has trailing bytes");
}

}  // namespace graphflow
