/* Pointwise geometry of a spacelike graph: induced metric, generalized
 * singular values, adapted frames, second fundamental form, hyperbolic
 * angle, and the graph predicates.
 *
 * Conventions:
 *   g = g1 - f*g2' is the induced metric; margin = 1 - lambda_1^2.
 *   df(a_i) = -lambda_i a_{m+i} fixes the sign of the paired target frame;
 *   e_i = (a_i - lambda_i a_{m+i}) / sqrt(1-lambda_i^2) spans the graph
 *   tangent, e_{m+i} = (a_{m+i} - lambda_i a_i) / sqrt(1-lambda_i^2) the
 *   normal bundle. All exported scalars are invariant under the admissible
 *   frame ambiguities (eigenbasis rotation in tied-lambda blocks, sign
 *   flips of completion vectors).
 *   Norms of normal-valued tensors use the associated Riemannian metric
 *   (sign of gbar flipped on the normal bundle).
 */
#pragma once

#include "graphflow/factors.hpp"

namespace graphflow {

// Chart 2-jet of the map f at one base point.
struct GraphJet {
  Vec p;     // Sigma_1 chart point (m)
  Vec f;     // Sigma_2 chart point (n)
  Mat df;    // n x m, df(gamma, i) = d_i f^gamma
  Ten3 d2f;  // d2f[gamma](i, j) = d_i d_j f^gamma, symmetric in (i, j)
};

struct InducedMetric {
  Mat g;       // g1 - f*g2'
  Mat ginv;    // defined only when spacelike
  double det = 0.0;
  double det1 = 0.0;  // det g1, for the volume-ratio angle
  bool spacelike = false;
};

// Pulled-back quadratic form f*g2' in the Sigma_1 chart (m x m).
Mat pullback_metric(const GraphJet& jet, const ProductSpace& space);

// Degeneracy is data here: non-spacelike input yields spacelike=false and
// no inverse, never an error.
InducedMetric induced_metric(const GraphJet& jet, const ProductSpace& space);

struct SingularData {
  Vec lambda;     // sorted descending, lambda_1 >= ... >= lambda_m >= 0
  double margin;  // 1 - lambda_1^2, may be <= 0
  Mat basis;      // columns a_i: g1-orthonormal eigenbasis, lambda order
};

// Generalized singular values of df: lambda_i^2 solve
// det(f*g2' - lambda^2 g1) = 0, via Cholesky whitening of g1 and a
// symmetric eigensolve.
SingularData singular_values(const GraphJet& jet, const ProductSpace& space);

struct AdaptedFrames {
  PMat a_tan;  // (m+n) x m, columns (a_i; 0)
  PMat a_nor;  // (m+n) x n, columns (0; b): paired directions first
  PMat e_tan;  // (m+n) x m, gbar-unit graph tangents
  PMat e_nor;  // (m+n) x n, gbar-unit normals, paired first
  Vec lambda;  // copy, aligned with the tangent columns
  int paired = 0;  // directions with lambda_i above the pairing floor
};

// Throws NotSpacelikeError when margin <= 0. The SingularData argument is
// exposed so tests can rotate tied-lambda eigenblocks before framing.
AdaptedFrames adapted_frames(const GraphJet& jet, const ProductSpace& space,
                             const SingularData& sing);

struct CoshTheta {
  double product;       // 1 / sqrt(prod (1 - lambda_i^2))
  double volume_ratio;  // sqrt(det g1 / det g)
  double frame_det;     // g1-volume spanned by pi_1(e_1..e_m)
};

CoshTheta hyperbolic_angle(const GraphJet& jet, const ProductSpace& space,
                           const InducedMetric& im, const SingularData& sing,
                           const AdaptedFrames& frames);

struct SecondFundamental {
  Ten3 h;    // h[alpha](i, j) in the adapted frames, symmetric in (i, j)
  Vec H;     // H^alpha = sum_i h^alpha_{ii}
  double B2 = 0.0;  // sum (h^alpha_{ij})^2
  double H2 = 0.0;  // sum (H^alpha)^2
};

// Coordinate-basis second fundamental form vectors B_ij (normal-valued,
// product chart components), before frame contraction: column (i*m+j).
PMat coordinate_sff(const GraphJet& jet, const ProductSpace& space,
                    const InducedMetric& im, const AdaptedFrames& frames);

SecondFundamental fundamental_forms(const GraphJet& jet, const ProductSpace& space,
                                    const InducedMetric& im, const AdaptedFrames& frames);

struct PointGeometry {
  InducedMetric metric;
  SingularData sing;
  AdaptedFrames frames;
  CoshTheta cosh_theta;
  SecondFundamental sff;
};

// Full per-point pipeline; throws NotSpacelikeError when margin <= 0.
PointGeometry point_geometry(const GraphJet& jet, const ProductSpace& space);

// Christoffels of the induced metric from the chart 2-jet and the analytic
// factor derivatives (no grid differencing involved).
Ten3 induced_christoffels(const GraphJet& jet, const ProductSpace& space,
                          const InducedMetric& im);

struct GraphPredicates {
  bool spacelike = false;       // margin > 0 w.r.t. the unrescaled target
  bool area_decreasing = false; // lambda_i lambda_j < 1 for all i != j
  bool det_condition = false;   // prod (1 + lambda_i^2) < 2
  bool rho_certificate = false; // lambda_1^2 < rho everywhere
  double rho = 0.0;             // min K1 / sup K2^+, +inf when sup K2^+ = 0
  double max_lambda1_sq = 0.0;
};

// All predicates are evaluated against the unrescaled g2 (the certificate
// value rho comes from the factor curvatures themselves).
GraphPredicates graph_predicates(const std::vector<GraphJet>& jets,
                                 const ProductSpace& space);

// Surface (m=2) curvature of the induced metric by the paper-side formula;
// valid on maximal states (K2 plane term taken as the constant K2, 0 when
// n < 2).
double gauss_curvature_formula(const ProductSpace& space, const SingularData& sing,
                               const SecondFundamental& sff);

// Brioschi curvature of a 2x2 metric from its chart 2-jet: dg[k](i,j) =
// d_k g_ij, ddg(k,l) = d_k d_l g (as 2x2 blocks).
double brioschi_curvature(const Mat& g, const Ten3& dg,
                          const std::function<Mat(int, int)>& ddg);

}  // namespace graphflow
