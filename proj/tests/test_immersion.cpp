/// @file test_immersion.cpp
/// @brief Pointwise graph geometry against frozen values and independent oracles.
///
/// The frozen numbers (angle 1/sqrt(0.6144), frame (1, 0.5)/sqrt(0.75),
/// determinant product 3.2761) come from hand evaluation of the defining
/// formulas on diagonal stretches, where every quantity reduces to closed
/// form. Randomized cases then pin the invariants that must survive frame
/// ambiguity: Gram signature, symmetry, and agreement of the three angle
/// routes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "graphflow/analytic.hpp"
#include "graphflow/immersion.hpp"

using namespace graphflow;

namespace {

GraphJet stretch_jet(const Vec& p, const Vec& f, const Mat& df) {
  GraphJet j;
  j.p = p;
  j.f = f;
  j.df = df;
  j.d2f.resize(static_cast<int>(f.size()), static_cast<int>(p.size()),
               static_cast<int>(p.size()));
  return j;
}

Vec vec1(double a) { return Vec::Constant(1, a); }
Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ProductSpace flat_flat(int m, int n) {
  return ProductSpace(FactorManifold(FactorKind::FlatTorus, m, 2.0 * M_PI),
                      FactorManifold(FactorKind::FlatTorus, n, 2.0 * M_PI));
}

Vec random_point(const FactorManifold& M, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x = Vec::Zero(M.dim());
  switch (M.kind()) {
    case FactorKind::FlatTorus:
      for (int d = 0; d < M.dim(); ++d) x(d) = u(rng) * M.scale();
      break;
    case FactorKind::EuclideanChart:
      for (int d = 0; d < M.dim(); ++d) x(d) = (u(rng) - 0.5) * M.scale();
      break;
    case FactorKind::RoundSphere:
      x(0) = 0.4 + u(rng) * (M_PI - 0.8);
      x(1) = u(rng) * 2.0 * M_PI;
      break;
    case FactorKind::HyperbolicDisk: {
      double r = 0.6 * u(rng);
      double ang = 2.0 * M_PI * u(rng);
      x(0) = r * std::cos(ang);
      if (M.dim() > 1) x(1) = r * std::sin(ang);
      break;
    }
  }
  return x;
}

// Spacelike 2-jet with stretches bounded away from 1, all entries random.
GraphJet random_spacelike_jet(const ProductSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GraphJet j;
  j.p = random_point(space.sigma1(), rng);
  j.f = random_point(space.sigma2(), rng);
  j.df = Mat::Zero(space.n(), space.m());
  for (int c = 0; c < space.n(); ++c)
    for (int i = 0; i < space.m(); ++i) j.df(c, i) = 0.5 * u(rng);
  SingularData s = singular_values(j, space);
  if (s.lambda(0) > 0.9) {
    j.df *= 0.85 / s.lambda(0);
  }
  j.d2f.resize(space.n(), space.m(), space.m());
  for (int c = 0; c < space.n(); ++c)
    for (int i = 0; i < space.m(); ++i)
      for (int l = i; l < space.m(); ++l) {
        j.d2f[c](i, l) = u(rng);
        j.d2f[c](l, i) = j.d2f[c](i, l);
      }
  return j;
}

// Gram matrix of the combined frame [e_tan e_nor] in gbar; want diag(+1,-1).
double gram_signature_error(const ProductSpace& space, const GraphJet& jet,
                            const AdaptedFrames& fr) {
  const int m = space.m(), n = space.n();
  PMat E(m + n, m + n);
  E.leftCols(m) = fr.e_tan;
  E.rightCols(n) = fr.e_nor;
  PMat G = E.transpose() * space.gbar(jet.p, jet.f) * E;
  PMat want = PMat::Zero(m + n, m + n);
  for (int i = 0; i < m; ++i) want(i, i) = 1.0;
  for (int a = 0; a < n; ++a) want(m + a, m + a) = -1.0;
  return (G - want).cwiseAbs().maxCoeff();
}

double angle_route_spread(const CoshTheta& ct) {
  double lo = std::min({ct.product, ct.volume_ratio, ct.frame_det});
  double hi = std::max({ct.product, ct.volume_ratio, ct.frame_det});
  return (hi - lo) / hi;
}

}  // namespace

// ============================================================================
// Frozen diagonal-stretch values
// ============================================================================

TEST_CASE("slope one-half line graph: frames and angle") {
  ProductSpace space(FactorManifold(FactorKind::FlatTorus, 1, 2.0 * M_PI),
                     FactorManifold(FactorKind::EuclideanChart, 1, 4.0));
  GraphJet jet = stretch_jet(vec1(0.3), vec1(0.15), Mat::Constant(1, 1, 0.5));

  SingularData s = singular_values(jet, space);
  CHECK(s.lambda(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.margin == doctest::Approx(0.75).epsilon(1e-14));

  InducedMetric im = induced_metric(jet, space);
  CHECK(im.spacelike);
  CHECK(im.g(0, 0) == doctest::Approx(0.75).epsilon(1e-14));

  AdaptedFrames fr = adapted_frames(jet, space, s);
  CHECK(fr.paired == 1);
  // e_1 is (1, 0.5)/sqrt(0.75) up to the overall eigenvector sign.
  const double norm = std::sqrt(0.75);
  CHECK(std::abs(fr.e_tan(0, 0)) == doctest::Approx(1.0 / norm).epsilon(1e-13));
  CHECK(fr.e_tan(1, 0) / fr.e_tan(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(fr.e_nor(0, 0) / fr.e_nor(1, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(gram_signature_error(space, jet, fr) < 1e-13);

  // df sends a_1 to -lambda_1 times the paired target direction.
  double pair_residual =
      std::abs(jet.df(0, 0) * fr.a_tan(0, 0) + s.lambda(0) * fr.a_nor(1, 0));
  CHECK(pair_residual < 1e-13);

  CoshTheta ct = hyperbolic_angle(jet, space, im, s, fr);
  const double want = 1.0 / std::sqrt(0.75);
  CHECK(ct.product == doctest::Approx(want).epsilon(1e-14));
  CHECK(ct.volume_ratio == doctest::Approx(want).epsilon(1e-14));
  CHECK(ct.frame_det == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("diagonal stretch (0.6, 0.2): metric, angle routes, Gram") {
  ProductSpace space = flat_flat(2, 2);
  Mat df = Mat::Zero(2, 2);
  df(0, 0) = 0.6;
  df(1, 1) = 0.2;
  GraphJet jet = stretch_jet(vec2(1.0, 2.0), vec2(0.5, 0.7), df);

  SingularData s = singular_values(jet, space);
  CHECK(s.lambda(0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(s.lambda(1) == doctest::Approx(0.2).epsilon(1e-14));

  InducedMetric im = induced_metric(jet, space);
  CHECK(im.g(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(im.g(1, 1) == doctest::Approx(0.96).epsilon(1e-14));
  CHECK(std::abs(im.g(0, 1)) < 1e-15);
  CHECK(im.det == doctest::Approx(0.6144).epsilon(1e-14));

  AdaptedFrames fr = adapted_frames(jet, space, s);
  CHECK(fr.paired == 2);
  CHECK(gram_signature_error(space, jet, fr) < 1e-13);
  for (int i = 0; i < 2; ++i) {
    PVec img = PVec::Zero(4);
    img.tail(2) = jet.df * fr.a_tan.col(i).head(2);
    PVec want = -s.lambda(i) * fr.a_nor.col(i);
    CHECK((img - want).cwiseAbs().maxCoeff() < 1e-13);
  }

  CoshTheta ct = hyperbolic_angle(jet, space, im, s, fr);
  const double want = 1.0 / std::sqrt(0.6144);
  CHECK(ct.product == doctest::Approx(want).epsilon(1e-13));
  CHECK(ct.volume_ratio == doctest::Approx(want).epsilon(1e-13));
  CHECK(ct.frame_det == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("target rescale divides the stretch but not the predicates") {
  ProductSpace plain = flat_flat(2, 2);
  ProductSpace scaled(plain.sigma1(), plain.sigma2(), 4.0);
  Mat df = Mat::Zero(2, 2);
  df(0, 0) = 1.2;
  GraphJet jet = stretch_jet(vec2(1.0, 1.0), vec2(0.5, 0.5), df);

  CHECK_FALSE(induced_metric(jet, plain).spacelike);
  SingularData s = singular_values(jet, scaled);
  CHECK(s.lambda(0) * s.lambda(0) == doctest::Approx(1.44 / 4.0).epsilon(1e-13));
  CHECK(induced_metric(jet, scaled).spacelike);

  // Predicates read the raw target metric, so the rescale does not rescue them.
  GraphPredicates pred = graph_predicates({jet}, scaled);
  CHECK_FALSE(pred.spacelike);
  CHECK(pred.max_lambda1_sq == doctest::Approx(1.44).epsilon(1e-13));
}

// ============================================================================
// Degenerate and unpaired directions
// ============================================================================

TEST_CASE("null and timelike stretches are data for the metric, errors for frames") {
  ProductSpace space(FactorManifold(FactorKind::FlatTorus, 1, 2.0 * M_PI),
                     FactorManifold(FactorKind::EuclideanChart, 1, 4.0));
  for (double slope : {1.0, 1.2}) {
    GraphJet jet = stretch_jet(vec1(0.1), vec1(0.0), Mat::Constant(1, 1, slope));
    InducedMetric im = induced_metric(jet, space);
    CHECK_FALSE(im.spacelike);
    CHECK(im.g(0, 0) <= 1e-15);
    SingularData s = singular_values(jet, space);
    CHECK(s.margin <= 0.0);
    CHECK_THROWS_AS(adapted_frames(jet, space, s), NotSpacelikeError);
    CHECK_THROWS_AS(point_geometry(jet, space), NotSpacelikeError);
  }
}

TEST_CASE("slice frames complete the target basis and read d2f directly") {
  ProductSpace space = flat_flat(2, 2);
  GraphJet jet = stretch_jet(vec2(0.3, 0.4), vec2(1.0, 2.0), Mat::Zero(2, 2));
  jet.d2f[0](0, 0) = 0.3;
  jet.d2f[0](0, 1) = jet.d2f[0](1, 0) = 0.1;
  jet.d2f[0](1, 1) = -0.2;
  jet.d2f[1](0, 0) = 0.05;
  jet.d2f[1](1, 1) = 0.07;

  PointGeometry pg = point_geometry(jet, space);
  CHECK(pg.frames.paired == 0);
  CHECK(gram_signature_error(space, jet, pg.frames) < 1e-13);
  CHECK(pg.cosh_theta.product == doctest::Approx(1.0).epsilon(1e-14));

  // At a slice the normal frame is a g2-orthonormal basis of the target
  // factor, so h^alpha_ij recovers d2f in that basis.
  Mat b(2, 2);
  b.col(0) = pg.frames.e_nor.col(0).tail(2);
  b.col(1) = pg.frames.e_nor.col(1).tail(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec want = Vec::Zero(2);
      for (int c = 0; c < 2; ++c) want(c) = jet.d2f[c](i, j);
      Vec got = b * vec2(pg.sff.h[0](i, j), pg.sff.h[1](i, j));
      CHECK((want - got).cwiseAbs().maxCoeff() < 1e-13);
    }
  double b2 = 0.0;
  for (int c = 0; c < 2; ++c) b2 += jet.d2f[c].squaredNorm();
  CHECK(pg.sff.B2 == doctest::Approx(b2).epsilon(1e-13));
}

TEST_CASE("rank-one map still yields a full orthonormal target frame") {
  ProductSpace space = flat_flat(2, 2);
  Mat df = Mat::Zero(2, 2);
  df(0, 0) = 0.6;
  GraphJet jet = stretch_jet(vec2(0.0, 0.0), vec2(0.0, 0.0), df);
  SingularData s = singular_values(jet, space);
  AdaptedFrames fr = adapted_frames(jet, space, s);
  CHECK(fr.paired == 1);
  CHECK(gram_signature_error(space, jet, fr) < 1e-13);
}

// ============================================================================
// Curve and catenoid oracles
// ============================================================================

TEST_CASE("curve second fundamental form matches the graph curvature formula") {
  ProductSpace space(FactorManifold(FactorKind::FlatTorus, 1, 2.0 * M_PI),
                     FactorManifold(FactorKind::EuclideanChart, 1, 4.0));
  const double A = 0.4;
  for (double x : {0.3, 1.1, 2.0, 4.4}) {
    GraphJet jet = sinusoid_jet(x, A, 1);
    const double u1 = A * std::cos(x);
    const double u2 = -A * std::sin(x);
    const double want = u2 * u2 / std::pow(1.0 - u1 * u1, 3.0);
    PointGeometry pg = point_geometry(jet, space);
    CHECK(pg.sff.B2 == doctest::Approx(want).epsilon(1e-12));
    CHECK(pg.sff.H2 == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("radial maximal graph has vanishing mean curvature and known margin") {
  ProductSpace space(FactorManifold(FactorKind::EuclideanChart, 2, 6.0),
                     FactorManifold(FactorKind::EuclideanChart, 1, 6.0));
  const double c = 0.5;
  for (double r : {1.0, 1.3, 2.0}) {
    for (double ang : {0.0, 0.7, 2.9}) {
      Vec p = vec2(r * std::cos(ang), r * std::sin(ang));
      ThirdJet tj = catenoid_jet(p, c);
      PointGeometry pg = point_geometry(tj.jet, space);
      CHECK(std::sqrt(pg.sff.H2) < 1e-10);
      CHECK(pg.sff.B2 > 1e-6);
      CHECK(pg.sing.margin ==
            doctest::Approx(r * r / (r * r + c * c)).epsilon(1e-12));
    }
  }
}

// ============================================================================
// Predicates
// ============================================================================

TEST_CASE("graph predicates on stretch families") {
  ProductSpace space = flat_flat(2, 2);

  SUBCASE("constant map satisfies everything, flat target gives infinite rho") {
    GraphJet jet = stretch_jet(vec2(0.1, 0.2), vec2(0.3, 0.4), Mat::Zero(2, 2));
    GraphPredicates pred = graph_predicates({jet}, space);
    CHECK(pred.spacelike);
    CHECK(pred.area_decreasing);
    CHECK(pred.det_condition);
    CHECK(pred.rho_certificate);
    CHECK(std::isinf(pred.rho));
    CHECK(pred.max_lambda1_sq == doctest::Approx(0.0));
  }

  SUBCASE("stretch (0.9, 0.9) is spacelike but fails the determinant bound") {
    Mat df = Mat::Zero(2, 2);
    df(0, 0) = df(1, 1) = 0.9;
    GraphPredicates pred =
        graph_predicates({stretch_jet(vec2(0, 0), vec2(0, 0), df)}, space);
    CHECK(pred.spacelike);
    CHECK(pred.area_decreasing);
    // (1 + 0.81)^2 = 3.2761 >= 2.
    CHECK_FALSE(pred.det_condition);
  }

  SUBCASE("area-decreasing splits timelike stretches") {
    Mat df = Mat::Zero(2, 2);
    df(0, 0) = 1.5;
    df(1, 1) = 0.3;
    GraphPredicates pred =
        graph_predicates({stretch_jet(vec2(0, 0), vec2(0, 0), df)}, space);
    CHECK_FALSE(pred.spacelike);
    CHECK(pred.area_decreasing);  // 1.5 * 0.3 < 1
    df(1, 1) = 0.8;
    pred = graph_predicates({stretch_jet(vec2(0, 0), vec2(0, 0), df)}, space);
    CHECK_FALSE(pred.area_decreasing);  // 1.5 * 0.8 >= 1
  }

  SUBCASE("empty and placeholder-only lists are data errors") {
    CHECK_THROWS_AS(graph_predicates({}, space), DataError);
    GraphJet placeholder;
    CHECK_THROWS_AS(graph_predicates({placeholder}, space), DataError);
  }
}

TEST_CASE("curvature ratio certificate on sphere-to-sphere maps") {
  ProductSpace space(FactorManifold(FactorKind::RoundSphere, 2, 1.0),
                     FactorManifold(FactorKind::RoundSphere, 2, 2.0));
  const double a = std::sqrt(3.9) / 2.0;

  // Meridian compression theta2 = pi/2 - a cos(theta): stretch 4 a^2 sin^2.
  auto meridian_jet = [&](double theta) {
    Mat df = Mat::Zero(2, 2);
    df(0, 0) = a * std::sin(theta);
    return stretch_jet(vec2(theta, 1.0),
                       vec2(M_PI / 2.0 - a * std::cos(theta), 2.0), df);
  };

  GraphJet placeholder;
  GraphPredicates pred = graph_predicates(
      {meridian_jet(M_PI / 2.0), meridian_jet(M_PI / 4.0), placeholder}, space);
  CHECK(pred.rho == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(pred.max_lambda1_sq == doctest::Approx(3.9).epsilon(1e-12));
  CHECK(pred.rho_certificate);  // 3.9 < 4
  CHECK_FALSE(pred.spacelike);  // 3.9 >= 1 against the raw target
}

// ============================================================================
// Randomized invariants (the frame-ambiguity contract)
// ============================================================================

TEST_CASE("random jets: Gram, symmetry, pairing, and angle routes") {
  std::mt19937_64 rng(20240517);
  std::vector<ProductSpace> spaces;
  spaces.push_back(flat_flat(1, 1));
  spaces.push_back(flat_flat(2, 1));
  spaces.push_back(flat_flat(1, 2));
  spaces.push_back(flat_flat(2, 2));
  spaces.push_back(ProductSpace(FactorManifold(FactorKind::FlatTorus, 2, 2.0 * M_PI),
                                FactorManifold(FactorKind::RoundSphere, 2, 2.0)));
  spaces.push_back(ProductSpace(FactorManifold(FactorKind::RoundSphere, 2, 1.0),
                                FactorManifold(FactorKind::FlatTorus, 2, 2.0 * M_PI)));
  spaces.push_back(ProductSpace(FactorManifold(FactorKind::RoundSphere, 2, 1.0),
                                FactorManifold(FactorKind::RoundSphere, 2, 2.0)));
  spaces.push_back(ProductSpace(FactorManifold(FactorKind::EuclideanChart, 2, 2.0),
                                FactorManifold(FactorKind::HyperbolicDisk, 2, 1.0)));

  for (const ProductSpace& space : spaces) {
    for (int trial = 0; trial < 50; ++trial) {
      GraphJet jet = random_spacelike_jet(space, rng);
      PointGeometry pg = point_geometry(jet, space);

      CHECK(gram_signature_error(space, jet, pg.frames) < 1e-10);
      CHECK(angle_route_spread(pg.cosh_theta) < 1e-10);

      // Eigenbasis columns are g1-orthonormal.
      Mat gram1 = pg.sing.basis.transpose() *
                  space.g1(jet.p) * pg.sing.basis;
      CHECK((gram1 - Mat::Identity(space.m(), space.m())).cwiseAbs().maxCoeff() <
            1e-10);

      // Paired directions satisfy the defining relation of the frames.
      for (int i = 0; i < pg.frames.paired; ++i) {
        Vec img = jet.df * pg.frames.a_tan.col(i).head(space.m());
        Vec want = -pg.frames.lambda(i) *
                   pg.frames.a_nor.col(i).tail(space.n());
        CHECK((img - want).cwiseAbs().maxCoeff() < 1e-10);
      }

      // Symmetry of the frame components of B, positivity of the norms.
      double scale = 1.0 + pg.sff.B2;
      for (int al = 0; al < space.n(); ++al)
        CHECK((pg.sff.h[al] - pg.sff.h[al].transpose()).cwiseAbs().maxCoeff() <
              1e-10 * scale);
      CHECK(pg.sff.B2 >= 0.0);
      CHECK(pg.sff.H2 >= 0.0);
      CHECK(pg.sff.H2 <= space.m() * pg.sff.B2 + 1e-12);

      // Coordinate-basis B is normal-valued and symmetric.
      PMat B = coordinate_sff(jet, space, pg.metric, pg.frames);
      PMat gb = space.gbar(jet.p, jet.f);
      for (int i = 0; i < space.m(); ++i)
        for (int l = 0; l < space.m(); ++l) {
          PVec bij = B.col(i * space.m() + l);
          PVec bji = B.col(l * space.m() + i);
          CHECK((bij - bji).cwiseAbs().maxCoeff() < 1e-10 * scale);
          for (int t = 0; t < space.m(); ++t)
            CHECK(std::abs(pg.frames.e_tan.col(t).dot(gb * bij)) <
                  1e-9 * scale);
        }
    }
  }
}

TEST_CASE("tied singular values: exported scalars ignore the eigenbasis choice") {
  ProductSpace space = flat_flat(2, 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  Mat df = 0.5 * Mat::Identity(2, 2);  // both stretches 0.5: fully tied
  GraphJet jet = stretch_jet(vec2(0.2, 0.9), vec2(0.4, 0.6), df);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 2; ++i)
      for (int l = i; l < 2; ++l) {
        jet.d2f[c](i, l) = u(rng);
        jet.d2f[c](l, i) = jet.d2f[c](i, l);
      }

  InducedMetric im = induced_metric(jet, space);
  SingularData base = singular_values(jet, space);
  AdaptedFrames fr0 = adapted_frames(jet, space, base);
  CoshTheta ct0 = hyperbolic_angle(jet, space, im, base, fr0);
  SecondFundamental sf0 = fundamental_forms(jet, space, im, fr0);

  for (int trial = 0; trial < 20; ++trial) {
    double ang = M_PI * u(rng);
    Mat Q(2, 2);
    Q << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
    SingularData rot = base;
    rot.basis = base.basis * Q;

    AdaptedFrames fr = adapted_frames(jet, space, rot);
    CHECK(gram_signature_error(space, jet, fr) < 1e-12);
    CoshTheta ct = hyperbolic_angle(jet, space, im, rot, fr);
    SecondFundamental sf = fundamental_forms(jet, space, im, fr);

    CHECK(ct.product == doctest::Approx(ct0.product).epsilon(1e-12));
    CHECK(ct.frame_det == doctest::Approx(ct0.frame_det).epsilon(1e-12));
    CHECK(sf.B2 == doctest::Approx(sf0.B2).epsilon(1e-11));
    CHECK(sf.H2 == doctest::Approx(sf0.H2).epsilon(1e-11));
  }
}

// ============================================================================
// Christoffels and curvature of the induced metric
// ============================================================================

TEST_CASE("induced Christoffels match differences of the induced metric") {
  ProductSpace space(FactorManifold(FactorKind::FlatTorus, 2, 2.0 * M_PI),
                     FactorManifold(FactorKind::RoundSphere, 2, 2.0));
  // Smooth map into the sphere chart, kept well inside (0, pi) x [0, 2pi).
  std::vector<std::vector<TrigWave>> comps(2);
  comps[0] = {{1.3, vec2(0.0, 0.0), M_PI / 2.0},
              {0.25, vec2(1.0, 0.0), 0.4},
              {0.15, vec2(0.0, 1.0), 1.1}};
  comps[1] = {{2.0, vec2(0.0, 0.0), M_PI / 2.0}, {0.3, vec2(1.0, 1.0), 0.2}};

  auto jet_at = [&](const Vec& x) { return trig_jet(x, comps); };
  const double h = 1e-5;
  for (Vec x : {vec2(0.3, 1.2), vec2(2.2, 4.0), vec2(5.1, 0.4)}) {
    GraphJet jet = jet_at(x);
    InducedMetric im = induced_metric(jet, space);
    REQUIRE(im.spacelike);
    Ten3 got = induced_christoffels(jet, space, im);

    Ten3 dg;
    dg.resize(2, 2, 2);
    for (int k = 0; k < 2; ++k) {
      Vec xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      dg[k] = (induced_metric(jet_at(xp), space).g -
               induced_metric(jet_at(xm), space).g) /
              (2.0 * h);
    }
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double want = 0.0;
          for (int l = 0; l < 2; ++l)
            want += 0.5 * im.ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          CHECK(got[k](i, j) == doctest::Approx(want).epsilon(5e-7));
        }
  }
}

TEST_CASE("surface curvature: formula against Brioschi") {
  SUBCASE("round sphere metric gives 1 both ways") {
    FactorManifold sph(FactorKind::RoundSphere, 2, 1.0);
    Vec x = vec2(1.1, 0.7);
    double k = brioschi_curvature(sph.metric(x), sph.metric_deriv(x),
                                  [&](int a, int b) { return sph.metric_dd(x, a, b); });
    CHECK(k == doctest::Approx(1.0).epsilon(1e-12));

    ProductSpace space(sph, FactorManifold(FactorKind::EuclideanChart, 1, 4.0));
    GraphJet jet = stretch_jet(x, vec1(0.0), Mat::Zero(1, 2));
    PointGeometry pg = point_geometry(jet, space);
    CHECK(gauss_curvature_formula(space, pg.sing, pg.sff) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("flat metric gives 0") {
    Mat g = Mat::Identity(2, 2);
    Ten3 dg;
    dg.resize(2, 2, 2);
    double k = brioschi_curvature(g, dg, [](int, int) { return Mat::Zero(2, 2); });
    CHECK(k == doctest::Approx(0.0));
  }

  SUBCASE("maximal graph: formula vs differences of the induced metric") {
    ProductSpace space(FactorManifold(FactorKind::EuclideanChart, 2, 6.0),
                       FactorManifold(FactorKind::EuclideanChart, 1, 6.0));
    const double c = 0.5, h = 1e-4;
    for (double r : {1.1, 1.5, 1.9}) {
      Vec p = vec2(r * std::cos(0.5), r * std::sin(0.5));
      ThirdJet tj = catenoid_jet(p, c);
      PointGeometry pg = point_geometry(tj.jet, space);
      double k_formula = gauss_curvature_formula(space, pg.sing, pg.sff);

      auto metric_at = [&](const Vec& q) {
        return induced_metric(catenoid_jet(q, c).jet, space).g;
      };
      Ten3 dg;
      dg.resize(2, 2, 2);
      for (int k = 0; k < 2; ++k) {
        Vec pp = p, pm = p;
        pp(k) += h;
        pm(k) -= h;
        dg[k] = (metric_at(pp) - metric_at(pm)) / (2.0 * h);
      }
      auto ddg = [&](int a, int b) {
        Vec pa = p, pb = p, pc2 = p, pd = p;
        pa(a) += h;
        pa(b) += h;
        pb(a) += h;
        pb(b) -= h;
        pc2(a) -= h;
        pc2(b) += h;
        pd(a) -= h;
        pd(b) -= h;
        return Mat(((metric_at(pa) - metric_at(pb)) - (metric_at(pc2) - metric_at(pd))) /
                   (4.0 * h * h));
      };
      double k_fd = brioschi_curvature(metric_at(p), dg, ddg);
      CHECK(k_formula == doctest::Approx(k_fd).epsilon(2e-5));
      CHECK(k_formula > 0.0);  // maximal graphs curve upward
    }
  }
}
