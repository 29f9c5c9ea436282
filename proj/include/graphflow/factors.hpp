/* Constant-curvature factor manifolds and the pseudo-Riemannian product.
 *
 * Each factor carries closed-form chart data:
 *   flat-torus       g = I on [0,L)^d, K = 0
 *   euclidean-chart  g = I on a box,   K = 0
 *   round-sphere     g = diag(r^2, r^2 sin^2 colat) in (colat, lon), K = 1/r^2 (d = 2)
 *   hyperbolic-disk  g = (4/c) I / (1-|x|^2)^2 on |x|<1, K = -c (Poincare ball)
 *
 * The product carries the split metric gbar = g1 - g2' with g2' = g2 / rho;
 * a constant rescale leaves Christoffels alone and scales curvature by rho.
 */
#pragma once

#include "graphflow/core.hpp"

namespace graphflow {

enum class FactorKind { FlatTorus, EuclideanChart, RoundSphere, HyperbolicDisk };

struct CurvatureData {
  Mat metric;
  Mat inverse;
  Ten3 christoffels;          // Gamma^k_{ij} indexed [k](i,j)
  double sectional = 0.0;     // constant; 0 for dim 1
  Mat ricci;                  // (d-1) K g
  // Fully covariant R_{ijkl} = K (g_ik g_jl - g_il g_jk).
  double riemann(int i, int j, int k, int l) const;
};

class FactorManifold {
 public:
  FactorManifold(FactorKind kind, int dim, double scale);

  FactorKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double scale() const { return scale_; }
  // Constant sectional curvature (0 for flat and for any 1-D factor).
  double curvature() const;

  Mat metric(const Vec& x) const;
  Mat metric_inverse(const Vec& x) const;
  Ten3 metric_deriv(const Vec& x) const;             // [k](i,j) = d_k g_ij
  Mat metric_dd(const Vec& x, int k, int l) const;   // d_k d_l g_ij
  Ten3 christoffels(const Vec& x) const;
  CurvatureData curvature_data(const Vec& x) const;
  double volume_weight(const Vec& x) const;          // sqrt(det g)

  // Total volume when the chart covers the manifold (torus, sphere); used by
  // the Vol(Sigma_1, g_1) bound.
  bool has_total_volume() const;
  double total_volume() const;

 private:
  FactorKind kind_;
  int dim_;
  double scale_;
};

class ProductSpace {
 public:
  ProductSpace(FactorManifold sigma1, FactorManifold sigma2, double rho = 1.0);

  const FactorManifold& sigma1() const { return s1_; }
  const FactorManifold& sigma2() const { return s2_; }
  double rho() const { return rho_; }
  bool rho_infinite() const;
  int m() const { return s1_.dim(); }
  int n() const { return s2_.dim(); }

  Mat g1(const Vec& x) const { return s1_.metric(x); }
  // Rescaled target metric g2' = g2 / rho and its chart derivative.
  Mat g2(const Vec& y) const;
  Ten3 g2_deriv(const Vec& y) const;
  Ten3 christoffels2(const Vec& y) const { return s2_.christoffels(y); }

  double K1() const { return s1_.curvature(); }
  // Curvature of the rescaled target: rho * K2.
  double K2() const;

  // Product metric block-diag(g1, -g2') at (x, y).
  PMat gbar(const Vec& x, const Vec& y) const;

 private:
  FactorManifold s1_, s2_;
  double rho_;
};

struct ProductProjectors {
  PMat tangent;
  PMat normal;
};

// Builds tangent/normal projectors from explicit gbar-orthonormal frames
// (columns of tangent_frame / normal_frame, product-chart components).
// Verifies the Gram signature (+..+, -..-) to tol; throws InvalidFrameError.
ProductProjectors product_projectors(const PMat& gbar, const PMat& tangent_frame,
                                     const PMat& normal_frame, double tol = 1e-8);

}  // namespace graphflow
