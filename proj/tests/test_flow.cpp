/// @file
/// @brief Flow engine tests: velocity oracle checks, termination logic,
///        the divergence-form velocity cross-check, and checkpoints.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "graphflow/factors.hpp"
#include "graphflow/flow.hpp"
#include "graphflow/grid.hpp"

using namespace graphflow;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

Grid circle_grid(int nx, int order = 4) {
  Vec len(1);
  len(0) = kTau;
  return Grid::periodic_box(len, {nx}, order);
}

ProductSpace line_target() {
  return ProductSpace(FactorManifold(FactorKind::FlatTorus, 1, kTau),
                      FactorManifold(FactorKind::EuclideanChart, 1, 1.0));
}

// Graph of amp*sin(x) over the unit circle into the real line.
Field sine_state(const Grid& grid, double amp) {
  Field f(grid, 1);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    f.at(i, 0) = amp * std::sin(grid.point(i)(0));
  }
  return f;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("tension velocity matches the closed form on a 1-d graph") {
  const ProductSpace space = line_target();
  const double amp = 0.3;
  double prev_err = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    const int nx = 32 << pass;
    const Grid grid = circle_grid(nx, 2);
    const Field f = sine_state(grid, amp);
    const Field v = tension_velocity(space, f);
    double err = 0.0;
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      const double x = grid.point(i)(0);
      const double ux = amp * std::cos(x);
      const double exact = -amp * std::sin(x) / (1.0 - ux * ux);
      err = std::max(err, std::abs(v.at(i, 0) - exact));
    }
    if (pass > 0) {
      const double order = std::log2(prev_err / err);
      CHECK(order > 1.7);
      CHECK(order < 2.3);
    }
    prev_err = err;
  }
}

TEST_CASE("winding map into a sphere reproduces the exact velocity") {
  // Constant colatitude, unit-speed longitude: the jets are exact, so the
  // velocity isolates the target Christoffel wiring.
  const double th0 = 0.45;
  const double r = 2.0;
  const ProductSpace space(FactorManifold(FactorKind::FlatTorus, 1, kTau),
                           FactorManifold(FactorKind::RoundSphere, 2, r));
  const Grid grid = circle_grid(64);
  Field f(grid, 2);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    f.at(i, 0) = th0;
    f.at(i, 1) = grid.point(i)(0);
  }
  f.set_wrap(1, kTau);

  const double s = std::sin(th0);
  const double c = std::cos(th0);
  const double margin = 1.0 - r * r * s * s;
  const double v_th = -s * c / margin;

  const DomainCache dom = build_domain_cache(space, grid);
  const std::vector<GraphJet> J = jets(f);
  Field v(grid, 2);
  const VelocityPass pass = tension_velocity(space, grid, J, dom, &v);
  CHECK(pass.finite);
  CHECK(pass.min_margin == doctest::Approx(margin).epsilon(1e-12));
  CHECK(pass.lambda_eff_max == doctest::Approx(1.0 / margin).epsilon(1e-12));
  // Second differences of the rounded linear ramp leave eps/h^2 noise.
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(v.at(i, 0) - v_th) < 1e-11);
    CHECK(std::abs(v.at(i, 1)) < 1e-11);
  }
}

TEST_CASE("divergence-form velocity cross-check converges at second order") {
  const ProductSpace space = line_target();
  std::vector<double> res;
  for (int nx : {64, 128, 256}) {
    const Grid grid = circle_grid(nx);
    const Field f = sine_state(grid, 0.05);
    res.push_back(normal_velocity_check(space, f));
  }
  CHECK(res[0] > 1e-10);
  for (int k = 0; k + 1 < 3; ++k) {
    const double order = std::log2(res[k] / res[k + 1]);
    CHECK(order > 1.7);
    CHECK(order < 2.3);
  }
}

TEST_CASE("totally geodesic winding map is a maximal fixed point") {
  // Slope-1/2 wrap into a half-size circle: zero tension exactly, but the
  // raw values spread over a period, so it must not read as a slice.
  const ProductSpace space(FactorManifold(FactorKind::FlatTorus, 1, kTau),
                           FactorManifold(FactorKind::FlatTorus, 1, 0.5 * kTau));
  const Grid grid = circle_grid(128);
  FlowConfig cfg;
  cfg.t_max = 1.0;
  FlowEngine engine(space, grid, cfg);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    engine.map().at(i, 0) = 0.5 * grid.point(i)(0);
  }
  engine.map().set_wrap(0, 0.5 * kTau);

  const Field v = tension_velocity(space, engine.map());
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(v.at(i, 0)) < 1e-12);
  }

  std::vector<DiagnosticsRecord> recs;
  const Termination term =
      engine.run([&](const DiagnosticsRecord& r) { recs.push_back(r); });
  CHECK(term == Termination::MaximalConverged);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].t == 0.0);
  CHECK(recs[0].sup_H < 1e-11);
  CHECK(recs[0].max_cosh_theta ==
        doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-12));
  CHECK(std::string(to_string(term)) == "maximal-converged");
}

TEST_CASE("constant map reads as a slice immediately") {
  const ProductSpace space(FactorManifold(FactorKind::FlatTorus, 2, kTau),
                           FactorManifold(FactorKind::RoundSphere, 2, 2.0));
  Vec len(2);
  len(0) = kTau;
  len(1) = kTau;
  const Grid grid = Grid::periodic_box(len, {24, 24}, 4);
  FlowConfig cfg;
  cfg.t_max = 1.0;
  FlowEngine engine(space, grid, cfg);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    engine.map().at(i, 0) = 0.8;
    engine.map().at(i, 1) = 0.3;
  }
  std::vector<DiagnosticsRecord> recs;
  const Termination term =
      engine.run([&](const DiagnosticsRecord& r) { recs.push_back(r); });
  CHECK(term == Termination::SliceConverged);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].t == 0.0);
  CHECK(recs[0].max_cosh_theta == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(recs[0].min_margin == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(recs[0].volume == doctest::Approx(kTau * kTau).epsilon(1e-12));
}

TEST_CASE("small sine graph relaxes with the expected rate and volume law") {
  const ProductSpace space = line_target();
  const Grid grid = circle_grid(64);
  FlowConfig cfg;
  cfg.cfl = 0.5;
  cfg.t_max = 2.0;
  cfg.monitor_stride = 16;
  FlowEngine engine(space, grid, cfg);
  engine.map() = sine_state(grid, 0.05);

  std::vector<DiagnosticsRecord> recs;
  const Termination term =
      engine.run([&](const DiagnosticsRecord& r) { recs.push_back(r); });
  CHECK(term == Termination::TMaxReached);
  REQUIRE(recs.size() > 5);
  CHECK(recs.front().t == 0.0);
  CHECK(recs.back().t == doctest::Approx(cfg.t_max).epsilon(1e-13));

  for (std::size_t k = 0; k < recs.size(); ++k) {
    CHECK(recs[k].monotonicity_ok);
    CHECK(recs[k].volume_law_residual < 1e-3);
    if (k > 0) {
      CHECK(recs[k].t > recs[k - 1].t);
      CHECK(recs[k].max_cosh_theta <= recs[k - 1].max_cosh_theta + 1e-9);
      CHECK(recs[k].volume >= recs[k - 1].volume - 1e-12);
    }
  }
  CHECK(recs.back().volume <= kTau + 1e-6);

  // Graph heat decay: the angle excess falls like exp(-2t).
  const double ratio = (recs.back().max_cosh_theta - 1.0) /
                       (recs.front().max_cosh_theta - 1.0);
  CHECK(ratio > 0.010);
  CHECK(ratio < 0.030);
}

TEST_CASE("entry guard rejects a thin spacelike margin") {
  const double slope = 0.97;
  const ProductSpace space(FactorManifold(FactorKind::FlatTorus, 1, kTau),
                           FactorManifold(FactorKind::FlatTorus, 1, slope * kTau));
  const Grid grid = circle_grid(64);
  FlowConfig cfg;
  cfg.t_max = 1.0;
  cfg.guard_margin = 0.1;
  FlowEngine engine(space, grid, cfg);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    engine.map().at(i, 0) = slope * grid.point(i)(0);
  }
  engine.map().set_wrap(0, slope * kTau);

  std::vector<DiagnosticsRecord> recs;
  const Termination term =
      engine.run([&](const DiagnosticsRecord& r) { recs.push_back(r); });
  CHECK(term == Termination::SpacelikeGuard);
  CHECK(recs.empty());
}

TEST_CASE("checkpoint resume reproduces the tail of a run exactly") {
  const std::string path = temp_path("graphflow_ck_test.bin");
  std::filesystem::remove(path);

  const ProductSpace space = line_target();
  const Grid grid = circle_grid(64);
  FlowConfig cfg;
  cfg.cfl = 0.5;
  cfg.t_max = 0.5;
  cfg.monitor_stride = 8;
  cfg.checkpoint_stride = 50;
  cfg.checkpoint_path = path;

  FlowEngine full(space, grid, cfg);
  full.map() = sine_state(grid, 0.05);
  std::vector<DiagnosticsRecord> recs_full;
  const Termination term_full =
      full.run([&](const DiagnosticsRecord& r) { recs_full.push_back(r); });
  CHECK(term_full == Termination::TMaxReached);
  REQUIRE(std::filesystem::exists(path));

  const Grid stored = load_checkpoint_grid(path);
  CHECK(stored == grid);

  FlowEngine resumed(space, grid, cfg);
  load_checkpoint_into(path, resumed.map(), resumed.scalars());
  CHECK(resumed.scalars().step > 0);
  CHECK(resumed.scalars().step % cfg.checkpoint_stride == 0);
  const double t_ck = resumed.scalars().t;
  CHECK(t_ck > 0.0);

  std::vector<DiagnosticsRecord> recs_res;
  const Termination term_res =
      resumed.run([&](const DiagnosticsRecord& r) { recs_res.push_back(r); });
  CHECK(term_res == term_full);

  REQUIRE(!recs_res.empty());
  REQUIRE(recs_full.size() >= recs_res.size());
  // When the save step is also a monitor step, the resume re-emits that
  // record before stepping, so the first tail time may equal t_ck.
  const std::size_t off = recs_full.size() - recs_res.size();
  CHECK(recs_full[off].t >= t_ck);
  for (std::size_t k = 0; k < recs_res.size(); ++k) {
    const DiagnosticsRecord& a = recs_full[off + k];
    const DiagnosticsRecord& b = recs_res[k];
    CHECK(std::abs(a.t - b.t) <= 1e-12);
    CHECK(std::abs(a.max_cosh_theta - b.max_cosh_theta) <= 1e-12);
    CHECK(std::abs(a.min_margin - b.min_margin) <= 1e-12);
    CHECK(std::abs(a.sup_H - b.sup_H) <= 1e-12);
    CHECK(std::abs(a.volume - b.volume) <= 1e-12);
    CHECK(std::abs(a.volume_law_residual - b.volume_law_residual) <= 1e-12);
    CHECK(a.monotonicity_ok == b.monotonicity_ok);
  }
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects damaged and mismatched files") {
  const std::string path = temp_path("graphflow_ck_damage.bin");
  const ProductSpace space = line_target();
  const Grid grid = circle_grid(64);
  Field f = sine_state(grid, 0.05);
  FlowScalars sc;
  sc.t = 0.25;
  sc.step = 123;
  sc.vol0 = 6.28;
  save_checkpoint(path, f, sc);

  std::string data;
  {
    std::ifstream in(path, std::ios::binary);
    data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  REQUIRE(data.size() > 120);

  auto write_variant = [&](const std::string& bytes) {
    const std::string p = temp_path("graphflow_ck_variant.bin");
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return p;
  };

  // Round trip of the untouched file.
  Field g(grid, 1);
  FlowScalars sc2;
  load_checkpoint_into(path, g, sc2);
  CHECK(sc2.t == sc.t);
  CHECK(sc2.step == sc.step);
  CHECK(sc2.vol0 == sc.vol0);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    CHECK(g.at(i, 0) == f.at(i, 0));
  }

  // One flipped payload byte trips the CRC.
  std::string bad = data;
  bad[bad.size() / 2] = static_cast<char>(bad[bad.size() / 2] ^ 0x40);
  CHECK_THROWS_AS(load_checkpoint_grid(write_variant(bad)), FormatError);

  // Truncation.
  CHECK_THROWS_AS(load_checkpoint_grid(write_variant(data.substr(0, 60))), FormatError);

  // Future version.
  std::string vers = data;
  vers[8] = 2;
  CHECK_THROWS_AS(load_checkpoint_grid(write_variant(vers)), VersionError);

  // Wrong magic.
  std::string magic = data;
  magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint_grid(write_variant(magic)), FormatError);

  // Grid and component mismatches.
  const Grid coarse = circle_grid(32);
  Field wrong_grid(coarse, 1);
  FlowScalars sink;
  CHECK_THROWS_AS(load_checkpoint_into(path, wrong_grid, sink), ConfigError);
  Field wrong_comps(grid, 2);
  CHECK_THROWS_AS(load_checkpoint_into(path, wrong_comps, sink), ConfigError);

  std::filesystem::remove(path);
  std::filesystem::remove(temp_path("graphflow_ck_variant.bin"));
}

TEST_CASE("engine configuration is validated") {
  const ProductSpace space = line_target();
  const Grid grid = circle_grid(16);
  FlowConfig cfg;
  cfg.cfl = 0.0;
  CHECK_THROWS_AS(FlowEngine(space, grid, cfg), ConfigError);
  cfg = FlowConfig{};
  cfg.t_max = -1.0;
  CHECK_THROWS_AS(FlowEngine(space, grid, cfg), ConfigError);
  cfg = FlowConfig{};
  cfg.monitor_stride = 0;
  CHECK_THROWS_AS(FlowEngine(space, grid, cfg), ConfigError);

  Vec lo(1), hi(1);
  lo(0) = 0.0;
  hi(0) = 1.0;
  const Grid bounded = Grid::bounded_chart(lo, hi, {17}, 4);
  CHECK_THROWS_AS(FlowEngine(space, bounded, FlowConfig{}), ConfigError);
  CHECK_THROWS_AS(save_checkpoint(temp_path("no.bin"), Field(bounded, 1), FlowScalars{}),
                  ConfigError);
}
