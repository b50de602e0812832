// ksim: exact simulator for the two-observable product-measurement scenario.
//
// Subcommands: commutators, ks-predict, apparatus, counterfactual, verify;
// a scenario JSON file can drive any of them via --scenario-file.
// Exit codes: 0 success, 1 validation error, 2 invariant failure (verify),
// 3 parse error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ksim/cli.hpp"

namespace {

struct GlobalFlags {
  std::string format = "text";
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  bool deterministic = false;
  std::string scenario_file;
};

int emit(const ksim::cli::CommandResult& result, const ksim::cli::Options& opts) {
  if (!result.warning.empty()) std::cerr << "warning: " << result.warning << "\n";
  std::cout << ksim::cli::render(result, opts);
  return result.exit_hint;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact simulator and property lab for product-observable measurement scenarios"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--format", flags.format, "output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", flags.seed, "PRNG seed (splitmix64)")->capture_default_str();
  app.add_option("--trials", flags.trials, "sampled trials (0 = analytic only)")
      ->capture_default_str();
  app.add_flag("--deterministic", flags.deterministic, "suppress timestamps in the emission");
  app.add_option("--scenario-file", flags.scenario_file,
                 "run a scenario described by a JSON file instead of a subcommand");

  CLI::App* cmd_commutators = app.add_subcommand(
      "commutators", "pairwise commutator norms of the spin and product observables");

  std::string model = "both";
  CLI::App* cmd_predict = app.add_subcommand(
      "ks-predict", "quantum vs noncontextual joint (Z1X2, X1Z2) predictions");
  cmd_predict->add_option("--model", model, "qm, nchv or both")->capture_default_str();

  int stage = 2;
  std::string input = "phi+";
  std::string follow_up;
  CLI::App* cmd_apparatus =
      app.add_subcommand("apparatus", "run a detector stage on a (path, spin) input state");
  cmd_apparatus->add_option("--stage", stage, "1 = per-mode detectors, 2 = beam combiners")
      ->capture_default_str();
  cmd_apparatus->add_option("--input", input, "input state (preset or amplitude list)")
      ->capture_default_str();
  cmd_apparatus->add_option("--follow-up", follow_up,
                            "observable measured after detection (e.g. X1X2)");

  std::string cf_scenario = "fig3";
  std::string cf_input;
  std::string cf_initial;
  CLI::App* cmd_counterfactual = app.add_subcommand(
      "counterfactual", "classify counterfactual measurement outcomes on a recorded timeline");
  cmd_counterfactual
      ->add_option("--scenario", cf_scenario, "fig3 or apparatus-retrodiction")
      ->capture_default_str();
  cmd_counterfactual->add_option("--input", cf_input,
                                 "four-mode input state for apparatus-retrodiction");
  cmd_counterfactual->add_option("--initial", cf_initial,
                                 "two-mode initial state overriding the mixed default (fig3)");

  bool corrupt_combiner = false;
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "run the analytic invariant suite of every module");
  cmd_verify->add_flag("--corrupt-combiner", corrupt_combiner, "fault-injection test hook")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  ksim::cli::Options opts;
  opts.seed = flags.seed;
  opts.trials = flags.trials;
  opts.deterministic = flags.deterministic;

  try {
    opts.format = ksim::cli::parse_format(flags.format);

    if (!flags.scenario_file.empty()) {
      if (app.get_subcommands().size() > 0)
        throw std::invalid_argument("--scenario-file cannot be combined with a subcommand");
      std::ifstream in(flags.scenario_file);
      if (!in) throw std::invalid_argument("cannot open scenario file: " + flags.scenario_file);
      ksim::cli::json doc;
      try {
        in >> doc;
      } catch (const std::exception& e) {
        throw ksim::cli::ParseError(std::string("scenario file: invalid JSON: ") + e.what());
      }
      ksim::cli::ScenarioRun run = ksim::cli::run_scenario_file_content(doc, opts);
      return emit(run.result, run.options);
    }

    if (cmd_commutators->parsed()) return emit(ksim::cli::run_commutators(opts), opts);
    if (cmd_predict->parsed()) return emit(ksim::cli::run_ks_predict(model, opts), opts);
    if (cmd_apparatus->parsed()) {
      std::optional<std::string> follow;
      if (!follow_up.empty()) follow = follow_up;
      return emit(ksim::cli::run_apparatus(stage, input, follow, opts), opts);
    }
    if (cmd_counterfactual->parsed()) {
      std::optional<std::string> in_spec;
      std::optional<std::string> init_spec;
      if (!cf_input.empty()) in_spec = cf_input;
      if (!cf_initial.empty()) init_spec = cf_initial;
      return emit(ksim::cli::run_counterfactual(cf_scenario, in_spec, init_spec, opts), opts);
    }
    if (cmd_verify->parsed()) return emit(ksim::cli::run_verify(corrupt_combiner, opts), opts);

    std::cerr << app.help() << "\n";
    return 1;
  } catch (const ksim::cli::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
