// Batch front end: simulate / discover / uq / symbolic, each driven by one
// JSON config. Exit codes: 0 ok, 1 config or schema problem, 2 simulation
// failure, 3 numeric failure.

#include <CLI11.hpp>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "eqdisc/errors.hpp"
#include "eqdisc/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool output_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--output", args.output_dir, "Output directory (overrides config)")
      ->each([&](const std::string&) { args.output_set = true; });
  cmd->add_option("--seed", args.seed, "Seed override (overrides config)")
      ->each([&](const std::string&) { args.seed_set = true; });
}

eqdisc::RunConfig resolve(const CommonArgs& args) {
  eqdisc::RunConfig config = eqdisc::load_run_config(args.config_path);
  eqdisc::apply_overrides(
      config, args.seed_set ? std::optional<std::uint64_t>(args.seed) : std::nullopt,
      args.output_set ? std::optional<std::string>(args.output_dir) : std::nullopt);
  return config;
}

void emit_error(const char* type, const std::exception& e) {
  nlohmann::ordered_json err;
  err["error"]["type"] = type;
  err["error"]["message"] = e.what();
  std::fprintf(stderr, "%s\n", err.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential-equation discovery toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* sim = app.add_subcommand("simulate", "Generate a dataset from a built-in system");
  CLI::App* discover = app.add_subcommand("discover", "Run the sparse-regression pipeline");
  CLI::App* uq = app.add_subcommand("uq", "Quantify term-inclusion uncertainty");
  CLI::App* symbolic = app.add_subcommand("symbolic", "Genetic-programming search");
  for (CLI::App* cmd : {sim, discover, uq, symbolic}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    eqdisc::RunConfig config = resolve(args);
    nlohmann::ordered_json report;
    if (sim->parsed()) {
      report = eqdisc::cmd_simulate(config);
      std::printf("wrote %s\n", (config.output_dir + "/dataset.csv").c_str());
    } else if (discover->parsed()) {
      report = eqdisc::cmd_discover(config);
      if (report.contains("equations")) {
        for (const auto& eq : report["equations"])
          std::printf("%s\n", eq["text"].get<std::string>().c_str());
      } else {
        std::printf("wrote %s\n", (config.output_dir + "/report.json").c_str());
      }
    } else if (uq->parsed()) {
      report = eqdisc::cmd_uq(config);
      for (const auto& line : report["aggregated"])
        std::printf("%s\n", line.get<std::string>().c_str());
    } else if (symbolic->parsed()) {
      report = eqdisc::cmd_symbolic(config);
      std::printf("%s\n", report["best_equation"].get<std::string>().c_str());
    }
    return 0;
  } catch (const eqdisc::ConfigError& e) {
    emit_error("config", e);
    return 1;
  } catch (const eqdisc::SimulationError& e) {
    emit_error("simulation", e);
    return 2;
  } catch (const eqdisc::NumericError& e) {
    emit_error("numeric", e);
    return 3;
  } catch (const std::exception& e) {
    emit_error("internal", e);
    return 3;
  }
}
