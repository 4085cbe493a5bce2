#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "eqdisc/csv.hpp"
#include "eqdisc/differentiate.hpp"
#include "eqdisc/gp/evolve.hpp"
#include "eqdisc/library.hpp"
#include "eqdisc/simulate.hpp"
#include "eqdisc/solvers.hpp"
#include "eqdisc/uncertainty.hpp"

namespace eqdisc {

enum class SolverMethod { stls, stridge, group_stridge, sr3 };

std::string method_name(SolverMethod m);

struct UqBootstrapSection {
  int q = 100;
  BootstrapMode mode = BootstrapMode::rows;
  double column_keep = 1.0;
  double p0 = 0.5;
};

struct UqSsvsSection {
  SsvsConfig cfg;
  double p0 = 0.5;
};

struct SymbolicSection {
  gp::GpConfig cfg;
  std::string target_component;  // empty: first component
};

/// One JSON document drives a whole run; the CLI only adds --config,
/// --output and --seed overrides.
struct RunConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // exactly one of (data_path, sim)
  std::optional<std::string> data_path;
  std::optional<CsvLayout> data_layout;
  std::optional<SimSpec> sim;
  bool sim_seed_explicit = false;

  DiffConfig differentiation;
  int response_order = 1;

  LibrarySpec library;

  SolverMethod method = SolverMethod::stls;
  SolverConfig solver;
  bool normalize = true;
  Grouping grouping = Grouping::by_time;

  std::optional<UqBootstrapSection> uq_bootstrap;
  std::optional<UqSsvsSection> uq_ssvs;
  bool uq_seed_explicit = false;

  std::optional<SymbolicSection> symbolic;
  bool symbolic_seed_explicit = false;
};

/// Parses and validates; unknown sections are rejected. Throws ConfigError /
/// SchemaError with the offending key in the message.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies --seed / --output overrides and propagates the master seed into
/// sections that did not set their own.
void apply_overrides(RunConfig& config, std::optional<std::uint64_t> seed,
                     std::optional<std::string> output_dir);

/// Resolved-config echo embedded in every report.
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

}  // namespace eqdisc
