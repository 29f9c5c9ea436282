/* Scenario orchestration: building spaces, grids, and initial states from
 * a parsed configuration, running the flow with the standard monitors,
 * evaluating the requested checks, and writing the artifact files
 * (series CSV, verdict JSON, checkpoints, plots).
 */
#pragma once

#include <string>
#include <vector>

#include "graphflow/config.hpp"
#include "graphflow/diagnostics.hpp"
#include "graphflow/flow.hpp"

namespace graphflow {

// Fields keep a pointer to the grid they were built on, so the grid is
// handed out separately and must outlive the field.
ProductSpace scenario_space(const ScenarioConfig& cfg);
Grid scenario_grid(const ScenarioConfig& cfg);

// Fills f (constructed with scenario_space(cfg).n() components on
// scenario_grid(cfg)) with the configured preset and returns the initial
// margin. The state must be spacelike with margin strictly above
// flow.guard_margin or the scenario is rejected before any stepping.
double scenario_initial(const ScenarioConfig& cfg, const ProductSpace& space,
                        Field& f);

struct CheckVerdict {
  std::string name;
  std::string status;  // "pass" | "fail" | "inapplicable"
  double value = 0.0;
  std::string detail;
};

struct ScenarioOutcome {
  Termination termination = Termination::TMaxReached;
  std::vector<DiagnosticsRecord> records;
  std::vector<CheckVerdict> verdicts;
  int exit_code = 0;  // 0 pass, 2 check failure, 3 guard or numeric stop
};

// Runs the configured flow and checks, writing series.csv, verdicts.json,
// final.ckpt, plots, and (when the stride is positive) state.ckpt into
// out_dir. resume_path, when nonempty, restores a checkpoint before
// stepping; checkpoint_every >= 0 overrides flow.checkpoint_stride.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg,
                             const std::string& out_dir,
                             const std::string& resume_path = "",
                             int checkpoint_every = -1);

// Built-in verification bundles for the CLI: "identities" exercises the
// static residual checks at paired resolutions, "flows" exercises short
// flow runs, "all" is both. Returns the verdicts; writes verdicts.json
// into out_dir.
std::vector<CheckVerdict> run_suite(const std::string& suite,
                                    const std::string& out_dir);

bool all_pass(const std::vector<CheckVerdict>& verdicts);

}  // namespace graphflow
