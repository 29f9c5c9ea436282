#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "graphflow/config.hpp"
#include "graphflow/diagnostics.hpp"
#include "graphflow/plot.hpp"
#include "graphflow/scenario.hpp"

namespace {

void print_verdicts(const std::vector<graphflow::CheckVerdict>& verdicts) {
  for (const graphflow::CheckVerdict& v : verdicts) {
    std::printf("%-28s %-13s %12.6g  %s\n", v.name.c_str(), v.status.c_str(),
                v.value, v.detail.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean curvature flow of spacelike graphs in product spaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume, suite, series;
  int checkpoint_every = -1;

  CLI::App* sim =
      app.add_subcommand("simulate", "run a configured flow scenario");
  sim->add_option("--config", config_path, "scenario file")->required();
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--resume", resume, "checkpoint to resume from");
  sim->add_option("--checkpoint-every", checkpoint_every,
                  "periodic checkpoint stride in steps (overrides the config)");

  CLI::App* ver =
      app.add_subcommand("verify", "run a built-in verification suite");
  ver->add_option("--suite", suite, "identities | flows | all")->required();
  ver->add_option("--out", out_dir, "output directory")->required();

  CLI::App* plt = app.add_subcommand("plot", "render plots from a series file");
  plt->add_option("--series", series, "series CSV")->required();
  plt->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const graphflow::ScenarioConfig cfg =
          graphflow::parse_scenario_file(config_path);
      const graphflow::ScenarioOutcome out =
          graphflow::run_scenario(cfg, out_dir, resume, checkpoint_every);
      print_verdicts(out.verdicts);
      std::printf("termination: %s\n", graphflow::to_string(out.termination));
      return out.exit_code;
    }
    if (ver->parsed()) {
      const std::vector<graphflow::CheckVerdict> verdicts =
          graphflow::run_suite(suite, out_dir);
      print_verdicts(verdicts);
      return graphflow::all_pass(verdicts) ? 0 : 2;
    }
    if (plt->parsed()) {
      const std::vector<graphflow::DiagnosticsRecord> recs =
          graphflow::read_records(series);
      graphflow::emit_plots(recs, graphflow::Termination::TMaxReached, out_dir);
      return 0;
    }
  } catch (const graphflow::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const graphflow::GuardError& e) {
    std::fprintf(stderr, "guard stop: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
