#include "graphflow/analytic.hpp"

#include <cmath>

namespace graphflow {

GraphJet affine_jet(const Vec& p, const Mat& slope, const Vec& offset) {
  GraphJet j;
  j.p = p;
  j.f = slope * p + offset;
  j.df = slope;
  j.d2f.resize(static_cast<int>(offset.size()), static_cast<int>(p.size()),
               static_cast<int>(p.size()));
  return j;
}

GraphJet sinusoid_jet(double x, double amplitude, int mode) {
  GraphJet j;
  j.p = Vec::Constant(1, x);
  const double k = static_cast<double>(mode);
  j.f = Vec::Constant(1, amplitude * std::sin(k * x));
  j.df = Mat::Constant(1, 1, amplitude * k * std::cos(k * x));
  j.d2f.resize(1, 1, 1);
  j.d2f[0](0, 0) = -amplitude * k * k * std::sin(k * x);
  return j;
}

GraphJet trig_jet(const Vec& p, const std::vector<std::vector<TrigWave>>& comps) {
  const int m = static_cast<int>(p.size());
  const int n = static_cast<int>(comps.size());
  GraphJet j;
  j.p = p;
  j.f = Vec::Zero(n);
  j.df = Mat::Zero(n, m);
  j.d2f.resize(n, m, m);
  for (int c = 0; c < n; ++c) {
    for (const TrigWave& w : comps[c]) {
      const double ph = w.k.dot(p) + w.phase;
      const double s = std::sin(ph);
      const double cs = std::cos(ph);
      j.f(c) += w.amp * s;
      for (int i = 0; i < m; ++i) {
        j.df(c, i) += w.amp * cs * w.k(i);
        for (int l = 0; l < m; ++l) j.d2f[c](i, l) -= w.amp * s * w.k(i) * w.k(l);
      }
    }
  }
  return j;
}

ThirdJet catenoid_jet(const Vec& p, double c) {
  const int m = static_cast<int>(p.size());
  const double r2 = p.squaredNorm();
  const double r = std::sqrt(r2);
  if (!(r > 0.0)) throw DataError("catenoid_jet: chart point at the axis r = 0");
  const double w = c * c + r2;
  const double u1 = c / std::sqrt(w);                    // u'(r)
  const double u2 = -c * r / (w * std::sqrt(w));         // u''(r)
  const double u3 = c * (2.0 * r2 - c * c) / (w * w * std::sqrt(w));  // u'''(r)

  // Radial chain rule. dr_i = x_i/r, and the higher r-derivatives below.
  Vec dr = p / r;
  Mat d2r = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      d2r(i, j) = ((i == j) ? 1.0 / r : 0.0) - p(i) * p(j) / (r2 * r);

  ThirdJet out;
  out.jet.p = p;
  out.jet.f = Vec::Constant(1, c * std::asinh(r / c));
  out.jet.df = Mat::Zero(1, m);
  for (int i = 0; i < m; ++i) out.jet.df(0, i) = u1 * dr(i);
  out.jet.d2f.resize(1, m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out.jet.d2f[0](i, j) = u2 * dr(i) * dr(j) + u1 * d2r(i, j);

  auto d3r = [&](int i, int j, int k) {
    const double del = ((i == j) ? p(k) : 0.0) + ((i == k) ? p(j) : 0.0) + ((j == k) ? p(i) : 0.0);
    return -del / (r2 * r) + 3.0 * p(i) * p(j) * p(k) / (r2 * r2 * r);
  };
  out.d3[0].resize(m, m, m);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        out.d3[0][k](i, j) = u3 * dr(i) * dr(j) * dr(k) +
                             u2 * (d2r(i, j) * dr(k) + d2r(i, k) * dr(j) + d2r(j, k) * dr(i)) +
                             u1 * d3r(i, j, k);
  return out;
}

}  // namespace graphflow
