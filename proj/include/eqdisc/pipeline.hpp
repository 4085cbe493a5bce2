#pragma once

#include <nlohmann/json.hpp>

#include "eqdisc/config.hpp"

namespace eqdisc {

/// Batch commands behind the CLI. Each one writes its artifacts under
/// config.output_dir (atomically: temp file + rename) and returns the report
/// document. All outputs are deterministic under (config, seed).

/// dataset.csv plus ground_truth.json (the true terms and coefficients).
nlohmann::ordered_json cmd_simulate(const RunConfig& config);

/// Full discovery pipeline: data, derivatives, library, sparse solve.
/// Writes report.json and equations.txt.
nlohmann::ordered_json cmd_discover(const RunConfig& config);

/// Bootstrap or SSVS uncertainty over the same pipeline; writes report.json
/// with the inclusion-probability table and coefficient quantiles.
nlohmann::ordered_json cmd_uq(const RunConfig& config);

/// Genetic-programming search; writes report.json with the best equation,
/// fitness trace and the full configuration echo.
nlohmann::ordered_json cmd_symbolic(const RunConfig& config);

}  // namespace eqdisc
