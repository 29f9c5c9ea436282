/* Scenario configuration: a strict TOML-compatible subset.
 *
 * Sections and keys:
 *
 *   [sigma1]  kind = "flat-torus" | "euclidean-chart" | "round-sphere"
 *                    | "hyperbolic-disk"
 *             dim = 1 | 2
 *             scale = <number>           period / box width / radius
 *             resolution = [n] or [n, n]
 *             order = 2 | 4
 *             mask = "none" | "annulus" | "disk"   (euclidean charts)
 *             mask_radii = [r0, r1]                (annulus)
 *             mask_radius = <number>               (disk)
 *   [sigma2]  kind, dim, scale            as above (no grid keys)
 *   [product] rho = <number>, or rho_auto = true to use K1 / K2.
 *   [initial] preset = "constant" | "sinusoid" | "linear-wrap"
 *                     | "catenoid" | "expression"
 *             value = [..]                constant target point; also the
 *                                         base offset of a sinusoid
 *             amplitude, mode             sinusoid; optional perturbation
 *                                         of linear-wrap
 *             slope = <number>            linear-wrap
 *             c = <number>                catenoid
 *             f = ["expr", ..]            one expression per target comp
 *   [flow]    cfl, t_max, tol_H, tol_osc, guard_margin, mono_slack,
 *             monitor_stride, checkpoint_stride
 *   [checks]  names = ["monotone-cosh", "volume-law", "decay-cosh",
 *                      "decay-B", "margin-floor", "spacelike", "converged"]
 *             margin_slack = <number>     slack coefficient C of the
 *                                         margin-floor check (C h^2)
 *
 * Unknown sections or keys are errors carrying the line number; so are
 * type mismatches and malformed lines. Values are strings in double
 * quotes, numbers, booleans, or flat arrays of these.
 */
#pragma once

#include <string>
#include <vector>

#include "graphflow/factors.hpp"
#include "graphflow/flow.hpp"

namespace graphflow {

struct FactorConfig {
  FactorKind kind = FactorKind::FlatTorus;
  int dim = 1;
  double scale = 1.0;
  // Grid keys, meaningful for sigma1 only.
  std::vector<int> resolution;
  int order = 4;
  enum class Mask { None, Annulus, Disk };
  Mask mask = Mask::None;
  double mask_r0 = 0.0;
  double mask_r1 = 0.0;
};

enum class InitialPreset { Constant, Sinusoid, LinearWrap, Catenoid, Expression };

struct InitialConfig {
  InitialPreset preset = InitialPreset::Constant;
  std::vector<double> value;          // target point (defaults to zeros)
  double amplitude = 0.0;
  int mode = 1;
  double slope = 0.0;
  double c = 0.5;
  std::vector<std::string> exprs;
};

struct ScenarioConfig {
  FactorConfig sigma1;
  FactorConfig sigma2;
  double rho = 1.0;
  bool rho_auto = false;
  InitialConfig initial;
  FlowConfig flow;
  std::vector<std::string> checks;
  double margin_slack = 50.0;
};

// Parses and validates; throws ConfigError with file/line context.
ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& origin = "<config>");

}  // namespace graphflow
