/// @file
/// @brief Pointwise graph geometry: induced metric, singular values,
///        adapted frames, second fundamental form, angle functions, and
///        the graph predicates.

#include "graphflow/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace graphflow {

namespace {

// Directions with lambda below this are treated as unpaired and their
// normal partners come from completion. The floor keeps the 1/lambda in
// b_i = -df(a_i)/lambda_i from amplifying eigensolve rounding: at the
// floor the induced frame error is still O(floor).
constexpr double kPairFloor = 1e-8;

Mat cholesky_factor(const Mat& g1) {
  Eigen::LLT<Mat> llt(g1);
  if (llt.info() != Eigen::Success) {
    throw NumericError("domain metric is not positive definite");
  }
  return llt.matrixL();
}

// Whitened symmetric pencil: eigenvalues of W relative to SPD g1.
SingularData pencil_singular_values(const Mat& g1, const Mat& W) {
  const int m = static_cast<int>(g1.rows());
  const Mat L = cholesky_factor(g1);
  const Mat Li = L.template triangularView<Eigen::Lower>().solve(Mat::Identity(m, m));
  const Mat S = Li * W * Li.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (S + S.transpose()));
  if (eig.info() != Eigen::Success) {
    throw NumericError("singular value eigensolve failed");
  }
  // Descending by eigenvalue; stable so exact ties (slices, conformal
  // stretches) keep the solver's natural basis order.
  std::array<int, kMaxDim> idx{};
  for (int i = 0; i < m; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.begin() + m, [&](int a, int b) {
    return eig.eigenvalues()(a) > eig.eigenvalues()(b);
  });
  SingularData out;
  out.lambda = Vec(m);
  out.basis = Mat(m, m);
  for (int i = 0; i < m; ++i) {
    const double mu = std::max(eig.eigenvalues()(idx[i]), 0.0);
    out.lambda(i) = std::sqrt(mu);
    out.basis.col(i) = Li.transpose() * eig.eigenvectors().col(idx[i]);
  }
  out.margin = 1.0 - out.lambda(0) * out.lambda(0);
  return out;
}

}  // namespace

Mat pullback_metric(const GraphJet& jet, const ProductSpace& space) {
  const Mat g2 = space.g2(jet.f);
  return jet.df.transpose() * g2 * jet.df;
}

InducedMetric induced_metric(const GraphJet& jet, const ProductSpace& space) {
  InducedMetric im;
  const Mat g1 = space.g1(jet.p);
  im.g = g1 - pullback_metric(jet, space);
  im.det = im.g.determinant();
  im.det1 = g1.determinant();
  Eigen::LLT<Mat> llt(im.g);
  im.spacelike = (llt.info() == Eigen::Success) && im.det > 0.0;
  if (im.spacelike) im.ginv = im.g.inverse();
  return im;
}

SingularData singular_values(const GraphJet& jet, const ProductSpace& space) {
  return pencil_singular_values(space.g1(jet.p), pullback_metric(jet, space));
}

AdaptedFrames adapted_frames(const GraphJet& jet, const ProductSpace& space,
                             const SingularData& sing) {
  if (!(sing.margin > 0.0)) {
    throw NotSpacelikeError("graph is not spacelike: margin <= 0");
  }
  const int m = static_cast<int>(jet.df.cols());
  const int n = static_cast<int>(jet.df.rows());
  const Mat g2 = space.g2(jet.f);

  AdaptedFrames fr;
  fr.lambda = sing.lambda;
  fr.a_tan = PMat::Zero(m + n, m);
  fr.a_nor = PMat::Zero(m + n, n);
  fr.e_tan = PMat::Zero(m + n, m);
  fr.e_nor = PMat::Zero(m + n, n);

  for (int i = 0; i < m; ++i) {
    fr.a_tan.col(i).head(m) = sing.basis.col(i);
  }

  // Paired target directions: df(a_i) = -lambda_i b_i. The pencil makes
  // the b_i automatically g2-orthonormal, ties included.
  Mat b = Mat::Zero(n, n);
  int paired = 0;
  for (int i = 0; i < m && i < n; ++i) {
    if (sing.lambda(i) > kPairFloor) {
      b.col(paired) = -(jet.df * sing.basis.col(i)) / sing.lambda(i);
      ++paired;
    }
  }
  fr.paired = paired;

  // The division by lambda amplifies eigensolve rounding into the Gram of
  // the b_i (error ~ eps/lambda_min). An ordered orthonormalization pass
  // restores it to rounding while perturbing each b_i by only that error.
  for (int i = 0; i < paired; ++i) {
    for (int j = 0; j < i; ++j) {
      b.col(i) -= b.col(j) * (b.col(j).transpose() * g2 * b.col(i))(0);
    }
    const double nrm = (b.col(i).transpose() * g2 * b.col(i))(0);
    if (!(nrm > 0.0)) {
      throw NumericError("paired target frame degenerated");
    }
    b.col(i) /= std::sqrt(nrm);
  }

  // Complete to a g2-orthonormal target basis: largest-residual canonical
  // direction first, which is deterministic and never degenerate.
  for (int s = paired; s < n; ++s) {
    Vec best;
    double best_norm = -1.0;
    for (int k = 0; k < n; ++k) {
      Vec v = Vec::Zero(n);
      v(k) = 1.0;
      for (int j = 0; j < s; ++j) {
        v -= b.col(j) * (b.col(j).transpose() * g2 * v)(0);
      }
      const double nrm = (v.transpose() * g2 * v)(0);
      if (nrm > best_norm) {
        best_norm = nrm;
        best = v;
      }
    }
    if (!(best_norm > 0.0)) {
      throw NumericError("target frame completion degenerated");
    }
    b.col(s) = best / std::sqrt(best_norm);
  }
  for (int i = 0; i < n; ++i) {
    fr.a_nor.col(i).tail(n) = b.col(i);
  }

  for (int i = 0; i < m; ++i) {
    const double li = sing.lambda(i);
    const double w = 1.0 / std::sqrt(1.0 - li * li);
    PVec col = fr.a_tan.col(i);
    if (i < paired) col -= li * fr.a_nor.col(i);
    fr.e_tan.col(i) = w * col;
  }
  for (int i = 0; i < n; ++i) {
    if (i < paired) {
      const double li = sing.lambda(i);
      const double w = 1.0 / std::sqrt(1.0 - li * li);
      fr.e_nor.col(i) = w * (fr.a_nor.col(i) - li * fr.a_tan.col(i));
    } else {
      fr.e_nor.col(i) = fr.a_nor.col(i);
    }
  }
  return fr;
}

CoshTheta hyperbolic_angle(const GraphJet& jet, const ProductSpace& space,
                           const InducedMetric& im, const SingularData& sing,
                           const AdaptedFrames& frames) {
  (void)jet;
  (void)space;
  CoshTheta ct;
  double prod = 1.0;
  for (int i = 0; i < sing.lambda.size(); ++i) {
    prod *= 1.0 - sing.lambda(i) * sing.lambda(i);
  }
  ct.product = 1.0 / std::sqrt(prod);
  ct.volume_ratio = std::sqrt(im.det1 / im.det);
  const int m = static_cast<int>(sing.lambda.size());
  Mat V(m, m);
  for (int i = 0; i < m; ++i) V.col(i) = frames.e_tan.col(i).head(m);
  ct.frame_det = std::abs(V.determinant()) * std::sqrt(im.det1);
  return ct;
}

PMat coordinate_sff(const GraphJet& jet, const ProductSpace& space,
                    const InducedMetric& im, const AdaptedFrames& frames) {
  (void)im;
  const int m = static_cast<int>(jet.df.cols());
  const int n = static_cast<int>(jet.df.rows());
  const PMat gbar = space.gbar(jet.p, jet.f);
  const ProductProjectors proj =
      product_projectors(gbar, frames.e_tan, frames.e_nor);
  const Ten3 G1 = space.sigma1().christoffels(jet.p);
  const Ten3 G2 = space.christoffels2(jet.f);

  PMat B(m + n, m * m);
  PVec v(m + n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) v(k) = G1[k](i, j);
      for (int c = 0; c < n; ++c) {
        double acc = jet.d2f[c](i, j);
        for (int al = 0; al < n; ++al) {
          for (int be = 0; be < n; ++be) {
            acc += G2[c](al, be) * jet.df(al, i) * jet.df(be, j);
          }
        }
        v(m + c) = acc;
      }
      B.col(i * m + j) = proj.normal * v;
    }
  }
  return B;
}

SecondFundamental fundamental_forms(const GraphJet& jet, const ProductSpace& space,
                                    const InducedMetric& im,
                                    const AdaptedFrames& frames) {
  const int m = static_cast<int>(jet.df.cols());
  const int n = static_cast<int>(jet.df.rows());
  const PMat B = coordinate_sff(jet, space, im, frames);
  const PMat gbar = space.gbar(jet.p, jet.f);

  SecondFundamental sf;
  sf.h.resize(n, m, m);
  sf.H = Vec::Zero(n);

  // gbar-pairings of the normal frame, computed once.
  PMat gn(m + n, n);
  for (int a = 0; a < n; ++a) gn.col(a) = gbar * frames.e_nor.col(a);

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      // B in the orthonormal tangent frame: contract the coordinate
      // bilinear form with the Sigma_1 components of e_i, e_j.
      PVec nij = PVec::Zero(m + n);
      for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) {
          const double w = frames.e_tan(k, i) * frames.e_tan(l, j);
          if (w != 0.0) nij += w * B.col(k * m + l);
        }
      }
      for (int a = 0; a < n; ++a) {
        // Components in the associated Riemannian normal metric.
        sf.h[a](i, j) = -nij.dot(gn.col(a));
      }
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < m; ++i) {
      sf.H(a) += sf.h[a](i, i);
      for (int j = 0; j < m; ++j) sf.B2 += sf.h[a](i, j) * sf.h[a](i, j);
    }
    sf.H2 += sf.H(a) * sf.H(a);
  }
  return sf;
}

PointGeometry point_geometry(const GraphJet& jet, const ProductSpace& space) {
  PointGeometry pg;
  pg.metric = induced_metric(jet, space);
  pg.sing = singular_values(jet, space);
  pg.frames = adapted_frames(jet, space, pg.sing);
  pg.cosh_theta = hyperbolic_angle(jet, space, pg.metric, pg.sing, pg.frames);
  pg.sff = fundamental_forms(jet, space, pg.metric, pg.frames);
  return pg;
}

Ten3 induced_christoffels(const GraphJet& jet, const ProductSpace& space,
                          const InducedMetric& im) {
  if (!im.spacelike) {
    throw NotSpacelikeError("induced Christoffels need a spacelike metric");
  }
  const int m = static_cast<int>(jet.df.cols());
  const int n = static_cast<int>(jet.df.rows());
  const Ten3 d1 = space.sigma1().metric_deriv(jet.p);
  const Mat g2 = space.g2(jet.f);
  const Ten3 dg2 = space.g2_deriv(jet.f);

  // dg[k] = d_k (g1 - f*g2) from the chart 2-jet.
  Ten3 dg;
  dg.resize(m, m, m);
  for (int k = 0; k < m; ++k) {
    Mat Dk(n, m);
    for (int c = 0; c < n; ++c) {
      for (int i = 0; i < m; ++i) Dk(c, i) = jet.d2f[c](k, i);
    }
    Mat Mk = Mat::Zero(n, n);
    for (int c = 0; c < n; ++c) Mk += dg2[c] * jet.df(c, k);
    dg[k] = d1[k] - (Dk.transpose() * g2 * jet.df + jet.df.transpose() * g2 * Dk +
                     jet.df.transpose() * Mk * jet.df);
  }

  Ten3 gamma;
  gamma.resize(m, m, m);
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int l = 0; l < m; ++l) {
          acc += im.ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        }
        gamma[k](i, j) = 0.5 * acc;
      }
    }
  }
  return gamma;
}

GraphPredicates graph_predicates(const std::vector<GraphJet>& jets,
                                 const ProductSpace& space) {
  GraphPredicates pred;
  pred.spacelike = true;
  pred.area_decreasing = true;
  pred.det_condition = true;

  const double k2_plus = std::max(space.sigma2().curvature(), 0.0);
  pred.rho = k2_plus == 0.0 ? std::numeric_limits<double>::infinity()
                            : space.sigma1().curvature() / k2_plus;

  bool any = false;
  for (const GraphJet& jet : jets) {
    if (jet.p.size() == 0) continue;  // placeholder outside the interior
    any = true;
    // Predicates are statements about the unrescaled target metric.
    const Mat g2raw = space.sigma2().metric(jet.f);
    const SingularData sing = pencil_singular_values(
        space.g1(jet.p), jet.df.transpose() * g2raw * jet.df);
    const int m = static_cast<int>(sing.lambda.size());
    pred.max_lambda1_sq = std::max(pred.max_lambda1_sq, sing.lambda(0) * sing.lambda(0));
    if (!(sing.margin > 0.0)) pred.spacelike = false;
    double det_prod = 1.0;
    for (int i = 0; i < m; ++i) {
      det_prod *= 1.0 + sing.lambda(i) * sing.lambda(i);
      for (int j = i + 1; j < m; ++j) {
        if (!(sing.lambda(i) * sing.lambda(j) < 1.0)) pred.area_decreasing = false;
      }
    }
    if (!(det_prod < 2.0)) pred.det_condition = false;
  }
  if (!any) throw DataError("graph predicates: no jets supplied");
  pred.rho_certificate = pred.max_lambda1_sq < pred.rho;
  return pred;
}

double gauss_curvature_formula(const ProductSpace& space, const SingularData& sing,
                               const SecondFundamental& sff) {
  if (sing.lambda.size() != 2) {
    throw ConfigError("surface curvature formula needs a 2-dimensional domain");
  }
  const double l1s = sing.lambda(0) * sing.lambda(0);
  const double l2s = sing.lambda(1) * sing.lambda(1);
  const double k2 = space.n() >= 2 ? space.K2() : 0.0;
  double sum = 0.0;
  for (int a = 0; a < sff.H.size(); ++a) {
    sum += sff.h[a](0, 0) * sff.h[a](0, 0) + sff.h[a](0, 1) * sff.h[a](0, 1);
  }
  return (space.K1() - l1s * l2s * k2) / ((1.0 - l1s) * (1.0 - l2s)) + sum;
}

double brioschi_curvature(const Mat& g, const Ten3& dg,
                          const std::function<Mat(int, int)>& ddg) {
  const double E = g(0, 0), F = g(0, 1), G = g(1, 1);
  const double Eu = dg[0](0, 0), Ev = dg[1](0, 0);
  const double Fu = dg[0](0, 1), Fv = dg[1](0, 1);
  const double Gu = dg[0](1, 1), Gv = dg[1](1, 1);
  const double Evv = ddg(1, 1)(0, 0);
  const double Guu = ddg(0, 0)(1, 1);
  const double Fuv = ddg(0, 1)(0, 1);

  Eigen::Matrix3d M1, M2;
  M1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
        Fv - 0.5 * Gu,                E,        F,
        0.5 * Gv,                     F,        G;
  M2 << 0.0,      0.5 * Ev, 0.5 * Gu,
        0.5 * Ev, E,        F,
        0.5 * Gu, F,        G;
  const double denom = E * G - F * F;
  return (M1.determinant() - M2.determinant()) / (denom * denom);
}

}  // namespace graphflow
