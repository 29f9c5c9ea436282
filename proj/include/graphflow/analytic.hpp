/* Closed-form jet sources for reference states: affine maps, sinusoids,
 * plane-wave sums, and the radially symmetric maximal graph over the
 * punctured plane (the Lorentzian catenoid). These provide exact
 * derivatives wherever a test or verifier needs an oracle independent of
 * grid stencils.
 */
#pragma once

#include <array>
#include <vector>

#include "graphflow/immersion.hpp"

namespace graphflow {

// 2-jet plus all third partials: d3[c][k](i, j) = d_k d_i d_j f^c.
struct ThirdJet {
  GraphJet jet;
  std::array<Ten3, kMaxDim> d3;
};

// f(p) = slope p + offset.
GraphJet affine_jet(const Vec& p, const Mat& slope, const Vec& offset);

// f(x) = amplitude sin(mode x) on a 1-dimensional chart.
GraphJet sinusoid_jet(double x, double amplitude, int mode);

// Sum of plane waves per target component: f^c = sum amp sin(k.p + phase).
struct TrigWave {
  double amp = 0.0;
  Vec k;
  double phase = 0.0;
};
GraphJet trig_jet(const Vec& p, const std::vector<std::vector<TrigWave>>& comps);

// Radial maximal graph u(r) = c arcsinh(r/c): the unique rotationally
// symmetric solution of div(grad u / sqrt(1 - |grad u|^2)) = 0. Spacelike
// for r > 0 with margin r^2/(r^2+c^2); the chart must avoid the origin.
ThirdJet catenoid_jet(const Vec& p, double c);

}  // namespace graphflow
