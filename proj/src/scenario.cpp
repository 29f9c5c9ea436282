#include "graphflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "graphflow/analytic.hpp"
#include "graphflow/expr.hpp"
#include "graphflow/immersion.hpp"
#include "graphflow/plot.hpp"

namespace graphflow {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

const char* const kKnownChecks[] = {"monotone-cosh", "volume-law", "decay-cosh",
                                    "decay-B",       "margin-floor", "spacelike",
                                    "converged"};

void validate_checks(const std::vector<std::string>& names) {
  for (const std::string& n : names) {
    bool known = false;
    for (const char* k : kKnownChecks) known = known || n == k;
    if (!known) throw ConfigError("unknown check '" + n + "'");
  }
}

Grid make_grid(const FactorConfig& fc) {
  if (fc.dim < 1 || fc.dim > 2) {
    throw ConfigError("domain grids support dim 1 or 2");
  }
  switch (fc.kind) {
    case FactorKind::FlatTorus: {
      if (static_cast<int>(fc.resolution.size()) != fc.dim) {
        throw ConfigError("resolution needs one entry per domain dimension");
      }
      Vec lengths = Vec::Constant(fc.dim, fc.scale);
      return Grid::periodic_box(lengths, fc.resolution, fc.order);
    }
    case FactorKind::RoundSphere: {
      if (fc.dim != 2) throw ConfigError("round-sphere grids need dim = 2");
      if (fc.resolution.size() != 2) {
        throw ConfigError("sphere resolution needs [n_theta, n_phi]");
      }
      return Grid::lat_long_sphere(fc.resolution[0], fc.resolution[1],
                                   fc.order);
    }
    case FactorKind::EuclideanChart: {
      if (static_cast<int>(fc.resolution.size()) != fc.dim) {
        throw ConfigError("resolution needs one entry per domain dimension");
      }
      Vec lo = Vec::Constant(fc.dim, -fc.scale / 2.0);
      Vec hi = Vec::Constant(fc.dim, fc.scale / 2.0);
      std::function<bool(const Vec&)> mask;
      if (fc.mask == FactorConfig::Mask::Annulus) {
        if (!(fc.mask_r0 > 0.0) || !(fc.mask_r1 > fc.mask_r0)) {
          throw ConfigError("annulus mask needs 0 < r0 < r1");
        }
        const double r0 = fc.mask_r0, r1 = fc.mask_r1;
        mask = [r0, r1](const Vec& p) {
          const double r = p.norm();
          return r >= r0 && r <= r1;
        };
      } else if (fc.mask == FactorConfig::Mask::Disk) {
        if (!(fc.mask_r0 > 0.0)) throw ConfigError("disk mask needs r > 0");
        const double r0 = fc.mask_r0;
        mask = [r0](const Vec& p) { return p.norm() <= r0; };
      }
      return Grid::bounded_chart(lo, hi, fc.resolution, fc.order, mask);
    }
    case FactorKind::HyperbolicDisk:
      throw ConfigError("no grid chart for hyperbolic-disk domains");
  }
  throw ConfigError("unhandled domain kind");
}

void fill_initial(const ScenarioConfig& cfg, const Grid& grid, Field& f) {
  const InitialConfig& ini = cfg.initial;
  const int n = f.comps();
  Vec base = Vec::Zero(n);
  if (!ini.value.empty()) {
    if (static_cast<int>(ini.value.size()) != n) {
      throw ConfigError("initial.value needs one entry per target dimension");
    }
    for (int c = 0; c < n; ++c) base(c) = ini.value[c];
  }
  for (int c = 0; c < n; ++c) {
    for (std::int64_t s = 0; s < grid.size(); ++s) f.at(s, c) = base(c);
  }

  switch (ini.preset) {
    case InitialPreset::Constant:
      break;
    case InitialPreset::Sinusoid: {
      // mode counts whole waves on a torus; plain frequency elsewhere.
      const double k = cfg.sigma1.kind == FactorKind::FlatTorus
                           ? ini.mode * kTau / cfg.sigma1.scale
                           : static_cast<double>(ini.mode);
      for (std::int64_t s = 0; s < grid.size(); ++s) {
        f.at(s, 0) = base(0) + ini.amplitude * std::sin(k * grid.point(s)(0));
      }
      break;
    }
    case InitialPreset::LinearWrap: {
      if (cfg.sigma1.kind != FactorKind::FlatTorus || cfg.sigma1.dim != 1 ||
          cfg.sigma2.kind != FactorKind::FlatTorus || cfg.sigma2.dim != 1) {
        throw ConfigError("linear-wrap needs circle domain and circle target");
      }
      const double L1 = cfg.sigma1.scale;
      const double L2 = cfg.sigma2.scale;
      const double wrapv = ini.slope * L1;
      const double turns = wrapv / L2;
      if (std::abs(turns - std::round(turns)) > 1e-9) {
        throw ConfigError("linear-wrap slope " + std::to_string(ini.slope) +
                          " does not close up on the target circle");
      }
      const double k = ini.mode * kTau / L1;
      for (std::int64_t s = 0; s < grid.size(); ++s) {
        const double x = grid.point(s)(0);
        f.at(s, 0) = ini.slope * x + ini.amplitude * std::sin(k * x);
      }
      f.set_wrap(0, wrapv);
      break;
    }
    case InitialPreset::Catenoid: {
      if (cfg.sigma1.kind != FactorKind::EuclideanChart ||
          cfg.sigma1.dim != 2 || n != 1) {
        throw ConfigError(
            "catenoid initial data needs a planar chart domain and a line "
            "target");
      }
      if (!(ini.c > 0.0)) throw ConfigError("catenoid parameter c must be > 0");
      for (std::int64_t s = 0; s < grid.size(); ++s) {
        const double r = grid.point(s).norm();
        f.at(s, 0) = ini.c * std::asinh(r / ini.c);
      }
      break;
    }
    case InitialPreset::Expression: {
      if (static_cast<int>(ini.exprs.size()) != n) {
        throw ConfigError("initial.f needs one expression per target dimension");
      }
      std::vector<Expression> ex;
      ex.reserve(ini.exprs.size());
      for (const std::string& e : ini.exprs) ex.push_back(Expression::parse(e));
      for (std::int64_t s = 0; s < grid.size(); ++s) {
        const Vec p = grid.point(s);
        const double y = grid.dim() > 1 ? p(1) : 0.0;
        for (int c = 0; c < n; ++c) f.at(s, c) = ex[c].eval(p(0), y);
      }
      break;
    }
  }
}

double max_spacing(const Grid& grid) {
  double h = 0.0;
  for (int a = 0; a < grid.dim(); ++a) h = std::max(h, grid.spacing(a));
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CheckVerdict make_verdict(const std::string& name, bool pass, double value,
                          const std::string& detail) {
  return CheckVerdict{name, pass ? "pass" : "fail", value, detail};
}

CheckVerdict inapplicable(const std::string& name, double value,
                          const std::string& detail) {
  return CheckVerdict{name, "inapplicable", value, detail};
}

std::vector<CheckVerdict> evaluate_checks(
    const ScenarioConfig& cfg, const ProductSpace& space, const Grid& grid,
    double initial_margin, const std::vector<DiagnosticsRecord>& recs,
    Termination term) {
  std::vector<CheckVerdict> out;
  const bool stopped_clean =
      term != Termination::SpacelikeGuard && term != Termination::NumericFailure;
  double min_margin = initial_margin;
  for (const DiagnosticsRecord& r : recs) {
    min_margin = std::min(min_margin, r.min_margin);
  }

  for (const std::string& name : cfg.checks) {
    if (name == "monotone-cosh") {
      int bad = 0;
      double t_bad = 0.0;
      for (const DiagnosticsRecord& r : recs) {
        if (!r.monotonicity_ok && bad++ == 0) t_bad = r.t;
      }
      out.push_back(make_verdict(
          name, bad == 0, static_cast<double>(bad),
          bad == 0 ? "max cosh(theta) nonincreasing at every record"
                   : "first uptick beyond slack at t = " + fmt(t_bad)));
    } else if (name == "volume-law") {
      if (recs.size() < 3) {
        out.push_back(inapplicable(name, 0.0, "needs at least three records"));
        continue;
      }
      const VolumeLawReport rep = volume_law_check(recs, space);
      const bool pass =
          rep.nondecreasing && rep.bounded && rep.max_residual < 1e-4;
      std::string detail = "max residual " + fmt(rep.max_residual);
      if (!rep.nondecreasing) detail += "; volume decreased";
      if (!rep.bounded) detail += "; volume exceeded " + fmt(rep.volume_cap);
      out.push_back(make_verdict(name, pass, rep.max_residual, detail));
    } else if (name == "decay-cosh" || name == "decay-B") {
      const DecayFit fit = decay_fit(recs, name == "decay-cosh"
                                               ? DecayQuantity::CoshThetaMinus1
                                               : DecayQuantity::NormB);
      if (fit.shortened && fit.rate == 0.0) {
        out.push_back(
            inapplicable(name, 0.0, "too few records inside the fit band"));
        continue;
      }
      out.push_back(make_verdict(
          name, fit.rate > 0.0, fit.rate,
          std::string("fitted decay rate over t in [") + fmt(fit.t0) + ", " +
              fmt(fit.t1) + "]"));
    } else if (name == "margin-floor") {
      const double h = max_spacing(grid);
      const double floor = initial_margin - cfg.margin_slack * h * h;
      out.push_back(make_verdict(
          name, min_margin >= floor, min_margin,
          "floor " + fmt(floor) + " from initial margin " +
              fmt(initial_margin) + " minus " + fmt(cfg.margin_slack) +
              " h^2"));
    } else if (name == "spacelike") {
      out.push_back(make_verdict(name, stopped_clean, min_margin,
                                 stopped_clean
                                     ? "margin stayed above the guard"
                                     : std::string("stopped: ") +
                                           to_string(term)));
    } else if (name == "converged") {
      const bool pass = term == Termination::SliceConverged ||
                        term == Termination::MaximalConverged;
      out.push_back(make_verdict(name, pass,
                                 recs.empty() ? 0.0 : recs.back().t,
                                 to_string(term)));
    }
  }
  return out;
}

void write_verdicts(const std::string& path, const std::string& label,
                    const std::vector<CheckVerdict>& verdicts,
                    const Termination* term, int exit_code) {
  nlohmann::json j;
  j["label"] = label;
  if (term) j["termination"] = to_string(*term);
  j["exit_code"] = exit_code;
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckVerdict& v : verdicts) {
    arr.push_back({{"name", v.name},
                   {"status", v.status},
                   {"value", v.value},
                   {"detail", v.detail}});
  }
  j["checks"] = arr;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

ProductSpace scenario_space(const ScenarioConfig& cfg) {
  FactorManifold s1(cfg.sigma1.kind, cfg.sigma1.dim, cfg.sigma1.scale);
  FactorManifold s2(cfg.sigma2.kind, cfg.sigma2.dim, cfg.sigma2.scale);
  double rho = cfg.rho;
  if (cfg.rho_auto) {
    const double k2 = s2.curvature();
    if (!(k2 > 0.0)) {
      throw ConfigError("rho_auto needs a positively curved target");
    }
    rho = s1.curvature() / k2;
    if (!(rho > 0.0)) {
      throw ConfigError("rho_auto needs a positively curved domain");
    }
  } else if (!(rho > 0.0)) {
    throw ConfigError("product.rho must be positive");
  }
  return ProductSpace(s1, s2, rho);
}

Grid scenario_grid(const ScenarioConfig& cfg) { return make_grid(cfg.sigma1); }

double scenario_initial(const ScenarioConfig& cfg, const ProductSpace& space,
                        Field& f) {
  validate_checks(cfg.checks);
  fill_initial(cfg, f.grid(), f);
  const DomainCache dom = build_domain_cache(space, f.grid());
  const std::vector<GraphJet> js = jets(f);
  const VelocityPass pass =
      tension_velocity(space, f.grid(), js, dom, nullptr);
  if (!pass.finite || !(pass.min_margin > cfg.flow.guard_margin)) {
    throw ConfigError("initial state is not spacelike enough: min margin " +
                      fmt(pass.min_margin) + " at guard " +
                      fmt(cfg.flow.guard_margin));
  }
  return pass.min_margin;
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg,
                             const std::string& out_dir,
                             const std::string& resume_path,
                             int checkpoint_every) {
  const ProductSpace space = scenario_space(cfg);
  const Grid grid = scenario_grid(cfg);
  if (grid.topology() == GridTopology::BoundedChart) {
    throw ConfigError("the flow engine needs a closed domain chart");
  }
  Field initial(grid, space.n());
  const double margin0 = scenario_initial(cfg, space, initial);

  std::filesystem::create_directories(out_dir);
  FlowConfig fc = cfg.flow;
  if (checkpoint_every >= 0) fc.checkpoint_stride = checkpoint_every;
  if (fc.checkpoint_stride > 0) fc.checkpoint_path = out_dir + "/state.ckpt";

  FlowEngine engine(space, grid, fc);
  Field& m = engine.map();
  for (int c = 0; c < initial.comps(); ++c) {
    for (std::int64_t s = 0; s < grid.size(); ++s) {
      m.at(s, c) = initial.at(s, c);
    }
    m.set_wrap(c, initial.wrap(c));
  }
  if (!resume_path.empty()) {
    load_checkpoint_into(resume_path, engine.map(), engine.scalars());
  }

  ScenarioOutcome out;
  const Termination term = engine.run(
      [&](const DiagnosticsRecord& rec) { out.records.push_back(rec); },
      fill_deep_residuals);
  out.termination = term;

  write_records(out_dir + "/series.csv", out.records);
  save_checkpoint(out_dir + "/final.ckpt", engine.map(), engine.scalars());
  if (out.records.size() >= 2) emit_plots(out.records, term, out_dir);

  out.verdicts =
      evaluate_checks(cfg, space, grid, margin0, out.records, term);
  if (term == Termination::SpacelikeGuard ||
      term == Termination::NumericFailure) {
    out.exit_code = 3;
  } else {
    out.exit_code = all_pass(out.verdicts) ? 0 : 2;
  }
  write_verdicts(out_dir + "/verdicts.json", "simulate", out.verdicts, &term,
                 out.exit_code);
  return out;
}

bool all_pass(const std::vector<CheckVerdict>& verdicts) {
  for (const CheckVerdict& v : verdicts) {
    if (v.status == "fail") return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

namespace {

ProductSpace flat_plane_to_line() {
  return ProductSpace(FactorManifold(FactorKind::EuclideanChart, 2, 4.4),
                      FactorManifold(FactorKind::EuclideanChart, 1, 1.0));
}

Grid annulus_grid(int nx) {
  const Vec lo = Vec::Constant(2, -2.2);
  const Vec hi = Vec::Constant(2, 2.2);
  // Order 2 keeps every pointwise residual at the design rate of the
  // divergence-form Laplacian, which dominates these checks anyway.
  return Grid::bounded_chart(lo, hi, {nx, nx}, 2, [](const Vec& p) {
    const double r = p.norm();
    return r >= 1.0 && r <= 2.0;
  });
}

// Max over a fixed sub-annulus, so refinement comparisons see the same
// region instead of nodes creeping toward the mask edge.
double windowed_max(const Grid& grid, const std::vector<double>& residual) {
  double mx = 0.0;
  for (std::int64_t s = 0; s < grid.size(); ++s) {
    const double r = grid.point(s).norm();
    if (r >= 1.15 && r <= 1.85) mx = std::max(mx, residual[s]);
  }
  return mx;
}

double eq1_catenoid_max(int nx) {
  const ProductSpace space = flat_plane_to_line();
  const Grid grid = annulus_grid(nx);
  std::vector<PointGeometry> geom(grid.size());
  for (std::int64_t s = 0; s < grid.size(); ++s) {
    if (!grid.valid(s)) continue;
    geom[s] = point_geometry(catenoid_jet(grid.point(s), 0.5).jet, space);
  }
  const Eq1Result res = eq1_residual(space, grid, geom);
  return windowed_max(grid, res.residual);
}

Grid circle_grid(int nx) {
  return Grid::periodic_box(Vec::Constant(1, kTau), {nx}, 4);
}

ProductSpace circle_to_line() {
  return ProductSpace(FactorManifold(FactorKind::FlatTorus, 1, kTau),
                      FactorManifold(FactorKind::EuclideanChart, 1, 1.0));
}

void fill_sine(Field& f, double amp) {
  const Grid& g = f.grid();
  for (std::int64_t s = 0; s < g.size(); ++s) {
    f.at(s, 0) = amp * std::sin(g.point(s)(0));
  }
}

double eq3_sine_max(int nx) {
  const ProductSpace space = circle_to_line();
  const Grid grid = circle_grid(nx);
  Field f(grid, 1);
  fill_sine(f, 0.05);
  const Field v = tension_velocity(space, f);
  return eq3_residual(space, f, v).max_residual;
}

double calabi_catenoid_max(int nx) {
  const ProductSpace space = flat_plane_to_line();
  const Grid grid = annulus_grid(nx);
  Field f(grid, 1);
  for (std::int64_t s = 0; s < grid.size(); ++s) {
    f.at(s, 0) = 0.5 * std::asinh(grid.point(s).norm() / 0.5);
  }
  return windowed_max(grid, calabi_residual(space, f).residual);
}

double normal_velocity_sine(int nx) {
  const ProductSpace space = circle_to_line();
  const Grid grid = circle_grid(nx);
  Field f(grid, 1);
  fill_sine(f, 0.05);
  return normal_velocity_check(space, f);
}

CheckVerdict order_verdict(const std::string& name, double coarse, double fine,
                           double lo, double hi) {
  const double order = std::log2(coarse / fine);
  return make_verdict(name, order > lo && order < hi, order,
                      "refinement order from " + fmt(coarse) + " to " +
                          fmt(fine));
}

void identities_suite(std::vector<CheckVerdict>& out) {
  out.push_back(order_verdict("eq1-catenoid-order", eq1_catenoid_max(96),
                              eq1_catenoid_max(192), 1.7, 2.3));
  out.push_back(order_verdict("eq3-sine-order", eq3_sine_max(128),
                              eq3_sine_max(256), 1.7, 2.3));
  out.push_back(order_verdict("calabi-catenoid-order", calabi_catenoid_max(128),
                              calabi_catenoid_max(256), 1.6, 2.4));

  {
    const ProductSpace space = circle_to_line();
    const Grid grid = circle_grid(128);
    Field f(grid, 1);
    fill_sine(f, 0.3);
    const double res = calabi_residual(space, f).max_residual;
    out.push_back(make_verdict("calabi-negative-control", res > 1e-2, res,
                               "non-maximal state must leave a visible "
                               "residual"));
  }

  {
    const ProductSpace space = flat_plane_to_line();
    const auto jet3 = [](const Vec& p) { return catenoid_jet(p, 0.5); };
    const Vec q0 = (Vec(2) << 1.5, 0.3).finished();
    const double r1 = simons_flat_residual(space, jet3, q0, 4e-2);
    const double r2 = simons_flat_residual(space, jet3, q0, 2e-2);
    const double r3 = simons_flat_residual(space, jet3, q0, 1e-2);
    const bool mono = r1 > r2 && r2 > r3;
    const double order = std::log2(r1 / r2);
    out.push_back(make_verdict("simons-catenoid", mono && order >= 1.0, order,
                               "residuals " + fmt(r1) + " > " + fmt(r2) +
                                   " > " + fmt(r3) + " under spacing halving"));
  }

  out.push_back(order_verdict("normal-velocity-order",
                              normal_velocity_sine(128),
                              normal_velocity_sine(256), 1.7, 2.3));

  {
    ProductSpace space(FactorManifold(FactorKind::RoundSphere, 2, 1.0),
                       FactorManifold(FactorKind::RoundSphere, 2, 2.0));
    const double a = std::sqrt(3.9) / 2.0;
    std::vector<GraphJet> jets;
    for (double theta : {M_PI / 2.0, M_PI / 3.0, M_PI / 4.0, 0.9, 2.1}) {
      GraphJet j;
      j.p = (Vec(2) << theta, 1.0).finished();
      j.f = (Vec(2) << M_PI / 2.0 - a * std::cos(theta), 2.0).finished();
      j.df = Mat::Zero(2, 2);
      j.df(0, 0) = a * std::sin(theta);
      j.d2f.resize(2, 2, 2);
      jets.push_back(j);
    }
    const GraphPredicates pred = graph_predicates(jets, space);
    const bool pass = pred.rho_certificate && !pred.spacelike &&
                      std::abs(pred.rho - 4.0) < 1e-12 &&
                      std::abs(pred.max_lambda1_sq - 3.9) < 1e-10;
    out.push_back(make_verdict(
        "curvature-ratio-certificate", pass, pred.rho,
        "stretch " + fmt(pred.max_lambda1_sq) + " certified below the ratio"));
  }
}

// Shared mini-run driver for the flow suite.
struct MiniRun {
  Termination term = Termination::TMaxReached;
  std::vector<DiagnosticsRecord> recs;
};

MiniRun mini_run(const ScenarioConfig& cfg) {
  const ProductSpace space = scenario_space(cfg);
  const Grid grid = scenario_grid(cfg);
  Field f(grid, space.n());
  scenario_initial(cfg, space, f);
  FlowEngine engine(space, grid, cfg.flow);
  Field& m = engine.map();
  for (int c = 0; c < f.comps(); ++c) {
    for (std::int64_t s = 0; s < grid.size(); ++s) m.at(s, c) = f.at(s, c);
    m.set_wrap(c, f.wrap(c));
  }
  MiniRun out;
  out.term = engine.run(
      [&](const DiagnosticsRecord& r) { out.recs.push_back(r); },
      fill_deep_residuals);
  return out;
}

ScenarioConfig circle_scenario() {
  ScenarioConfig cfg;
  cfg.sigma1.kind = FactorKind::FlatTorus;
  cfg.sigma1.dim = 1;
  cfg.sigma1.scale = kTau;
  cfg.sigma1.resolution = {64};
  cfg.sigma1.order = 4;
  cfg.sigma2.kind = FactorKind::EuclideanChart;
  cfg.sigma2.dim = 1;
  cfg.sigma2.scale = 1.0;
  cfg.flow.cfl = 0.5;
  cfg.flow.t_max = 2.0;
  cfg.flow.monitor_stride = 16;
  return cfg;
}

void flows_suite(std::vector<CheckVerdict>& out) {
  {
    ScenarioConfig cfg = circle_scenario();
    cfg.initial.preset = InitialPreset::Sinusoid;
    cfg.initial.amplitude = 0.05;
    const MiniRun run = mini_run(cfg);
    bool mono = true;
    double eq3 = 0.0;
    for (const DiagnosticsRecord& r : run.recs) {
      mono = mono && r.monotonicity_ok;
      if (std::isfinite(r.eq3_max_residual)) {
        eq3 = std::max(eq3, r.eq3_max_residual);
      }
    }
    const double drop = (run.recs.back().max_cosh_theta - 1.0) /
                        (run.recs.front().max_cosh_theta - 1.0);
    out.push_back(make_verdict("sine-decay", mono && drop < 0.1, drop,
                               "max cosh(theta) - 1 contraction over t = 2"));
    out.push_back(make_verdict("angle-identity-on-flow", eq3 < 1e-3, eq3,
                               "worst eq3 residual along the run"));
  }

  {
    ScenarioConfig cfg = circle_scenario();
    cfg.sigma2.kind = FactorKind::FlatTorus;
    cfg.sigma2.scale = M_PI;
    cfg.initial.preset = InitialPreset::LinearWrap;
    cfg.initial.slope = 0.5;
    const MiniRun run = mini_run(cfg);
    const double sup_h = run.recs.back().sup_H;
    out.push_back(make_verdict(
        "wrap-fixed-point",
        run.term == Termination::MaximalConverged && sup_h < 1e-10, sup_h,
        "linear wrap map must sit still"));
  }

  {
    ScenarioConfig cfg = circle_scenario();
    cfg.sigma2.kind = FactorKind::FlatTorus;
    cfg.sigma2.scale = M_PI;
    cfg.initial.preset = InitialPreset::LinearWrap;
    cfg.initial.slope = 0.5;
    cfg.initial.amplitude = 0.01;
    const MiniRun run = mini_run(cfg);
    const double drop =
        run.recs.back().max_B2 / std::max(run.recs.front().max_B2, 1e-300);
    out.push_back(make_verdict("wrap-return", drop < 0.5, drop,
                               "perturbed wrap map must contract ||B||^2"));
  }

  {
    ScenarioConfig cfg;
    cfg.sigma1.kind = FactorKind::FlatTorus;
    cfg.sigma1.dim = 2;
    cfg.sigma1.scale = kTau;
    cfg.sigma1.resolution = {16, 16};
    cfg.sigma1.order = 4;
    cfg.sigma2.kind = FactorKind::RoundSphere;
    cfg.sigma2.dim = 2;
    cfg.sigma2.scale = 2.0;
    cfg.initial.preset = InitialPreset::Constant;
    cfg.initial.value = {0.7, 0.3};
    cfg.flow.t_max = 1.0;
    const MiniRun run = mini_run(cfg);
    const double spread = run.recs.back().max_cosh_theta - 1.0;
    out.push_back(make_verdict(
        "constant-slice",
        run.term == Termination::SliceConverged && spread < 1e-12, spread,
        "constant map is a totally geodesic slice"));
  }
}

}  // namespace

std::vector<CheckVerdict> run_suite(const std::string& suite,
                                    const std::string& out_dir) {
  std::vector<CheckVerdict> out;
  if (suite == "identities" || suite == "all") identities_suite(out);
  if (suite == "flows" || suite == "all") flows_suite(out);
  if (out.empty()) throw ConfigError("unknown suite '" + suite + "'");
  std::filesystem::create_directories(out_dir);
  write_verdicts(out_dir + "/verdicts.json", "verify:" + suite, out, nullptr,
                 all_pass(out) ? 0 : 2);
  return out;
}

}  // namespace graphflow
