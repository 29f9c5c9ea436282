#include "graphflow/factors.hpp"

#include <cmath>
#include <sstream>

namespace graphflow {

// ============================================================================
// FactorManifold
// ============================================================================

double CurvatureData::riemann(int i, int j, int k, int l) const {
  return sectional *
         (metric(i, k) * metric(j, l) - metric(i, l) * metric(j, k));
}

FactorManifold::FactorManifold(FactorKind kind, int dim, double scale)
    : kind_(kind), dim_(dim), scale_(scale) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("factor dim out of range");
  if (!(scale > 0.0)) throw ConfigError("factor scale must be positive");
  if (kind == FactorKind::RoundSphere && dim != 2)
    throw ConfigError("round-sphere factor supports dim 2 only (lat-long chart)");
}

double FactorManifold::curvature() const {
  if (dim_ < 2) return 0.0;
  switch (kind_) {
    case FactorKind::FlatTorus:
    case FactorKind::EuclideanChart:
      return 0.0;
    case FactorKind::RoundSphere:
      return 1.0 / (scale_ * scale_);
    case FactorKind::HyperbolicDisk:
      return -scale_;
  }
  return 0.0;
}

Mat FactorManifold::metric(const Vec& x) const {
  Mat g = Mat::Identity(dim_, dim_);
  switch (kind_) {
    case FactorKind::FlatTorus:
    case FactorKind::EuclideanChart:
      return g;
    case FactorKind::RoundSphere: {
      const double r2 = scale_ * scale_;
      const double s = std::sin(x(0));
      g(0, 0) = r2;
      g(1, 1) = r2 * s * s;
      return g;
    }
    case FactorKind::HyperbolicDisk: {
      const double q = 1.0 - x.squaredNorm();
      if (!(q > 0.0)) throw DataError("hyperbolic-disk chart point outside |x|<1");
      const double c = 4.0 / (scale_ * q * q);
      return c * g;
    }
  }
  return g;
}

Mat FactorManifold::metric_inverse(const Vec& x) const {
  Mat g = Mat::Identity(dim_, dim_);
  switch (kind_) {
    case FactorKind::FlatTorus:
    case FactorKind::EuclideanChart:
      return g;
    case FactorKind::RoundSphere: {
      const double r2 = scale_ * scale_;
      const double s = std::sin(x(0));
      g(0, 0) = 1.0 / r2;
      g(1, 1) = 1.0 / (r2 * s * s);
      return g;
    }
    case FactorKind::HyperbolicDisk: {
      const double q = 1.0 - x.squaredNorm();
      const double c = scale_ * q * q / 4.0;
      return c * g;
    }
  }
  return g;
}

Ten3 FactorManifold::metric_deriv(const Vec& x) const {
  Ten3 d;
  d.resize(dim_, dim_, dim_);
  switch (kind_) {
    case FactorKind::FlatTorus:
    case FactorKind::EuclideanChart:
      return d;
    case FactorKind::RoundSphere: {
      const double r2 = scale_ * scale_;
      d[0](1, 1) = 2.0 * r2 * std::sin(x(0)) * std::cos(x(0));
      return d;
    }
    case FactorKind::HyperbolicDisk: {
      // g = phi I with phi = 4/(scale (1-|x|^2)^2); d_k phi = phi * 4 x_k/(1-|x|^2)
      const double q = 1.0 - x.squaredNorm();
      const double phi = 4.0 / (scale_ * q * q);
      for (int k = 0; k < dim_; ++k) {
        const double dphi = phi * 4.0 * x(k) / q;
        for (int i = 0; i < dim_; ++i) d[k](i, i) = dphi;
      }
      return d;
    }
  }
  return d;
}

Mat FactorManifold::metric_dd(const Vec& x, int k, int l) const {
  Mat dd = Mat::Zero(dim_, dim_);
  switch (kind_) {
    case FactorKind::FlatTorus:
    case FactorKind::EuclideanChart:
      return dd;
    case FactorKind::RoundSphere: {
      if (k == 0 && l == 0) dd(1, 1) = 2.0 * scale_ * scale_ * std::cos(2.0 * x(0));
      return dd;
    }
    case FactorKind::HyperbolicDisk: {
      const double q = 1.0 - x.squaredNorm();
      const double phi = 4.0 / (scale_ * q * q);
      // d_k d_l phi = phi (24 x_k x_l / q^2 + 4 delta_kl / q)
      const double ddphi = phi * (24.0 * x(k) * x(l) / (q * q) + (k == l ? 4.0 / q : 0.0));
      for (int i = 0; i < dim_; ++i) dd(i, i) = ddphi;
      return dd;
    }
  }
  return dd;
}

Ten3 FactorManifold::christoffels(const Vec& x) const {
  Ten3 c;
  c.resize(dim_, dim_, dim_);
  switch (kind_) {
    case FactorKind::FlatTorus:
    case FactorKind::EuclideanChart:
      return c;
    case FactorKind::RoundSphere: {
      const double s = std::sin(x(0));
      const double co = std::cos(x(0));
      c[0](1, 1) = -s * co;
      c[1](0, 1) = c[1](1, 0) = co / s;
      return c;
    }
    case FactorKind::HyperbolicDisk: {
      // Conformal metric e^{2u} I: Gamma^k_ij = d_j u delta_ik + d_i u delta_jk - d_k u delta_ij
      const double q = 1.0 - x.squaredNorm();
      Vec du(dim_);
      for (int k = 0; k < dim_; ++k) du(k) = 2.0 * x(k) / q;
      for (int k = 0; k < dim_; ++k)
        for (int i = 0; i < dim_; ++i)
          for (int j = 0; j < dim_; ++j) {
            double v = 0.0;
            if (i == k) v += du(j);
            if (j == k) v += du(i);
            if (i == j) v -= du(k);
            c[k](i, j) = v;
          }
      return c;
    }
  }
  return c;
}

CurvatureData FactorManifold::curvature_data(const Vec& x) const {
  CurvatureData d;
  d.metric = metric(x);
  d.inverse = metric_inverse(x);
  d.christoffels = christoffels(x);
  d.sectional = curvature();
  d.ricci = (dim_ - 1) * d.sectional * d.metric;
  return d;
}

double FactorManifold::volume_weight(const Vec& x) const {
  switch (kind_) {
    case FactorKind::FlatTorus:
    case FactorKind::EuclideanChart:
      return 1.0;
    case FactorKind::RoundSphere:
      return scale_ * scale_ * std::abs(std::sin(x(0)));
    case FactorKind::HyperbolicDisk: {
      const double q = 1.0 - x.squaredNorm();
      return std::pow(4.0 / (scale_ * q * q), dim_ * 0.5);
    }
  }
  return 1.0;
}

bool FactorManifold::has_total_volume() const {
  return kind_ == FactorKind::FlatTorus || kind_ == FactorKind::RoundSphere;
}

double FactorManifold::total_volume() const {
  switch (kind_) {
    case FactorKind::FlatTorus:
      return std::pow(scale_, dim_);
    case FactorKind::RoundSphere:
      return 4.0 * M_PI * scale_ * scale_;
    default:
      throw DataError("factor has no finite chart-covered volume");
  }
}

// ============================================================================
// ProductSpace
// ============================================================================

ProductSpace::ProductSpace(FactorManifold sigma1, FactorManifold sigma2, double rho)
    : s1_(std::move(sigma1)), s2_(std::move(sigma2)), rho_(rho) {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive (or +inf)");
}

bool ProductSpace::rho_infinite() const { return std::isinf(rho_); }

Mat ProductSpace::g2(const Vec& y) const {
  if (rho_infinite()) throw DataError("rho = +inf leaves no target metric (certificate-only product)");
  return s2_.metric(y) / rho_;
}

Ten3 ProductSpace::g2_deriv(const Vec& y) const {
  Ten3 d = s2_.metric_deriv(y);
  if (rho_ != 1.0) {
    if (rho_infinite()) throw DataError("rho = +inf leaves no target metric (certificate-only product)");
    for (int k = 0; k < d.dim; ++k) d[k] /= rho_;
  }
  return d;
}

double ProductSpace::K2() const {
  if (rho_infinite()) return 0.0;
  return rho_ * s2_.curvature();
}

PMat ProductSpace::gbar(const Vec& x, const Vec& y) const {
  const int m = s1_.dim(), n = s2_.dim();
  PMat g = PMat::Zero(m + n, m + n);
  g.topLeftCorner(m, m) = s1_.metric(x);
  g.bottomRightCorner(n, n) = -g2(y);
  return g;
}

ProductProjectors product_projectors(const PMat& gbar, const PMat& tangent_frame,
                                     const PMat& normal_frame, double tol) {
  const auto d = gbar.rows();
  const auto mt = tangent_frame.cols();
  const auto mn = normal_frame.cols();
  if (tangent_frame.rows() != d || normal_frame.rows() != d || mt + mn != d)
    throw InvalidFrameError("frame dimensions do not span the product");

  PMat all(d, d);
  all << tangent_frame, normal_frame;
  PMat gram = all.transpose() * gbar * all;
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const double want = (a != b) ? 0.0 : (a < mt ? 1.0 : -1.0);
      if (std::abs(gram(a, b) - want) > tol) {
        std::ostringstream os;
        os << "frame Gram deviates from signature (+..+,-..-) at (" << a << "," << b
           << "): " << gram(a, b);
        throw InvalidFrameError(os.str());
      }
    }

  ProductProjectors p;
  p.tangent = tangent_frame * tangent_frame.transpose() * gbar;
  p.normal = -normal_frame * normal_frame.transpose() * gbar;
  return p;
}

}  // namespace graphflow
