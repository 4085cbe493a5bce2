#include "eqdisc/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "eqdisc/errors.hpp"
#include "eqdisc/util.hpp"

namespace eqdisc {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw ConfigError("I/O failure while writing '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const ordered_json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

std::string format_coefficient(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::string(buf);
}

// Human-readable equation like "d(u1)/dt = 9.998·u2 − 9.997·u1".
std::string equation_text(const std::string& lhs, const std::vector<std::string>& descriptors,
                          const Eigen::MatrixXd& values,
                          const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& support,
                          Eigen::Index component) {
  std::string rhs;
  for (Eigen::Index d = 0; d < values.rows(); ++d) {
    if (!support(d, component)) continue;
    const double c = values(d, component);
    const std::string magnitude = format_coefficient(std::fabs(c));
    std::string term = descriptors[static_cast<std::size_t>(d)] == "1"
                           ? magnitude
                           : magnitude + "·" + descriptors[static_cast<std::size_t>(d)];
    if (rhs.empty()) {
      rhs = (c < 0 ? "−" : "") + term;
    } else {
      rhs += (c < 0 ? " − " : " + ") + term;
    }
  }
  if (rhs.empty()) rhs = "0";
  return lhs + " = " + rhs;
}

Dataset obtain_dataset(const RunConfig& config) {
  if (config.sim) return simulate(*config.sim);
  if (!config.data_path) throw ConfigError("config carries neither data.path nor data.sim");
  if (config.data_layout) return load_csv(*config.data_path, *config.data_layout);
  return load_csv(*config.data_path);
}

struct DiscoveryArtifacts {
  DerivativeField derivs;
  DesignMatrix library;     // raw (unnormalized) library
  ResponseMatrix response;
  std::string diff_tag;
};

DiscoveryArtifacts prepare(const RunConfig& config, const Dataset& data) {
  std::set<int> temporal{config.response_order};
  std::set<int> spatial(config.library.derivative_orders.begin(),
                        config.library.derivative_orders.end());
  DerivativeField derivs =
      differentiate_dataset(data, config.differentiation, temporal, spatial);
  DesignMatrix F = build_library(derivs.data(), derivs, config.library);
  ResponseMatrix U = build_response(derivs, config.response_order);
  std::string tag = derivs.temporal(config.response_order).method;
  return {std::move(derivs), std::move(F), std::move(U), std::move(tag)};
}

ordered_json hyperparameters_json(const RunConfig& config) {
  ordered_json h;
  h["kappa"] = config.solver.kappa;
  h["lambda"] = config.solver.lambda;
  h["nu"] = config.solver.nu;
  h["max_iters"] = config.solver.max_iters;
  h["tolerance"] = config.solver.tolerance;
  h["sr3_penalty"] = config.solver.sr3_penalty == Sr3Penalty::l0 ? "l0" : "l1";
  return h;
}

ordered_json equations_json(const CoefficientMatrix& fit, const ResponseMatrix& U,
                            const std::vector<std::string>& components,
                            std::vector<std::string>* text_lines) {
  ordered_json equations = ordered_json::array();
  for (Eigen::Index n = 0; n < fit.values.cols(); ++n) {
    ordered_json eq;
    eq["component"] = components[static_cast<std::size_t>(n)];
    eq["lhs"] = U.lhs[static_cast<std::size_t>(n)];
    ordered_json terms = ordered_json::array();
    for (Eigen::Index d = 0; d < fit.values.rows(); ++d) {
      if (!fit.support(d, n)) continue;
      ordered_json term;
      term["descriptor"] = fit.descriptors[static_cast<std::size_t>(d)];
      term["coefficient"] = fit.values(d, n);
      terms.push_back(std::move(term));
    }
    eq["terms"] = std::move(terms);
    const std::string text = equation_text(U.lhs[static_cast<std::size_t>(n)],
                                           fit.descriptors, fit.values, fit.support, n);
    eq["text"] = text;
    if (text_lines) text_lines->push_back(text);
    eq["residual_ss"] = fit.residual_ss.empty() ? 0.0
                                                : fit.residual_ss[static_cast<std::size_t>(n)];
    equations.push_back(std::move(eq));
  }
  return equations;
}

ordered_json report_header(const char* command, const RunConfig& config) {
  ordered_json report;
  report["schema_version"] = 1;
  report["command"] = command;
  report["config"] = run_config_to_json(config);
  return report;
}

// Solves on the (optionally normalized) library and maps back to raw units.
CoefficientMatrix solve_single(const RunConfig& config, const DesignMatrix& F,
                               const ResponseMatrix& U, ordered_json* extra) {
  const DesignMatrix* design = &F;
  DesignMatrix normalized;
  if (config.normalize) {
    normalized = normalize_columns(F);
    design = &normalized;
  }
  CoefficientMatrix fit;
  switch (config.method) {
    case SolverMethod::stls:
      fit = fit_stls(*design, U, config.solver);
      break;
    case SolverMethod::stridge:
      fit = fit_stridge(*design, U, config.solver);
      break;
    case SolverMethod::sr3: {
      Sr3Result sr3 = fit_sr3(*design, U, config.solver);
      if (extra) {
        (*extra)["sr3_objective_trace"] = sr3.objective_trace;
        (*extra)["sr3_iterations"] = sr3.iterations;
      }
      fit = std::move(sr3.coefficients);
      break;
    }
    default:
      throw ConfigError("group_stridge is handled separately");
  }
  if (config.normalize) fit = denormalize_coefficients(fit, normalized.column_norms);
  // recompute residuals in raw units
  for (Eigen::Index n = 0; n < U.matrix.cols(); ++n)
    fit.residual_ss[static_cast<std::size_t>(n)] =
        (U.matrix.col(n) - F.matrix * fit.values.col(n)).squaredNorm();
  return fit;
}

}  // namespace

nlohmann::ordered_json cmd_simulate(const RunConfig& config) {
  if (!config.sim) throw ConfigError("simulate needs a data.sim section");
  const Dataset data = simulate(*config.sim);
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  save_csv(data, out_dir / "dataset.csv");

  ordered_json truth;
  truth["schema_version"] = 1;
  truth["system"] = system_name(config.sim->system);
  truth["parameters"] = config.sim->parameters;
  truth["noise_level"] = config.sim->noise_level;
  truth["seed"] = config.sim->seed;
  ordered_json terms = ordered_json::array();
  for (const TruthTerm& t : ground_truth_terms(*config.sim)) {
    ordered_json term;
    term["component"] = data.component_names()[static_cast<std::size_t>(t.component)];
    term["descriptor"] = t.descriptor;
    term["coefficient"] = t.value;
    terms.push_back(std::move(term));
  }
  truth["terms"] = std::move(terms);
  write_json_atomic(out_dir / "ground_truth.json", truth);

  ordered_json report = report_header("simulate", config);
  report["dataset"] = (out_dir / "dataset.csv").string();
  report["ground_truth"] = (out_dir / "ground_truth.json").string();
  return report;
}

nlohmann::ordered_json cmd_discover(const RunConfig& config) {
  const Dataset data = obtain_dataset(config);
  DiscoveryArtifacts art = prepare(config, data);

  ordered_json report = report_header("discover", config);
  report["method"] = method_name(config.method);
  report["hyperparameters"] = hyperparameters_json(config);
  report["differentiation_method"] = art.diff_tag;
  report["normalized_library"] = config.normalize;
  report["descriptors"] = art.library.descriptors;

  std::vector<std::string> lines;
  ordered_json diagnostics;
  if (config.method == SolverMethod::group_stridge) {
    const std::size_t S = art.derivs.data().num_space();
    const std::size_t T = art.derivs.data().num_times();
    auto rows = group_rows(S, T, config.grouping);
    const DesignMatrix* design = &art.library;
    DesignMatrix normalized;
    if (config.normalize) {
      normalized = normalize_columns(art.library);
      design = &normalized;
    }
    std::vector<DesignMatrix> F_groups;
    std::vector<ResponseMatrix> U_groups;
    for (const auto& idx : rows) {
      F_groups.push_back(
          {design->matrix(idx, Eigen::all), design->descriptors, {}, design->normalized});
      U_groups.push_back({art.response.matrix(idx, Eigen::all), art.response.order,
                          art.response.lhs});
    }
    GroupFit fit = fit_group_stridge(F_groups, U_groups, config.solver, config.grouping);
    ordered_json groups = ordered_json::array();
    const auto& axis = config.grouping == Grouping::by_time
                           ? art.derivs.data().grid().times()
                           : art.derivs.data().grid().spatial_coords();
    for (std::size_t g = 0; g < fit.groups.size(); ++g) {
      CoefficientMatrix m = fit.groups[g];
      if (config.normalize) m = denormalize_coefficients(m, normalized.column_norms);
      ordered_json gj;
      gj["group"] = g;
      gj["coordinate"] = g < axis.size() ? axis[g] : 0.0;
      gj["equations"] = equations_json(m, art.response,
                                       art.derivs.data().component_names(), nullptr);
      groups.push_back(std::move(gj));
    }
    report["groups"] = std::move(groups);
    diagnostics["iterations"] = fit.iterations;
    diagnostics["active_terms"] = static_cast<int>(fit.support.count());
    lines.push_back("group_stridge: " + std::to_string(fit.groups.size()) + " groups");
  } else {
    ordered_json extra;
    CoefficientMatrix fit = solve_single(config, art.library, art.response, &extra);
    report["equations"] = equations_json(fit, art.response,
                                         art.derivs.data().component_names(), &lines);
    diagnostics["iterations"] = fit.iterations;
    diagnostics["active_terms"] = fit.active_count();
    diagnostics["empty_model"] = fit.empty_model;
    diagnostics["rank_deficient"] = fit.rank_deficient;
    for (auto it = extra.begin(); it != extra.end(); ++it) diagnostics[it.key()] = it.value();
  }
  report["diagnostics"] = std::move(diagnostics);

  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  write_json_atomic(out_dir / "report.json", report);
  std::string text;
  for (const auto& line : lines) text += line + "\n";
  write_text_atomic(out_dir / "equations.txt", text);
  return report;
}

nlohmann::ordered_json cmd_uq(const RunConfig& config) {
  if (!config.uq_bootstrap && !config.uq_ssvs)
    throw ConfigError("uq needs a 'uq' config section");
  const Dataset data = obtain_dataset(config);
  DiscoveryArtifacts art = prepare(config, data);
  const auto& components = art.derivs.data().component_names();

  ordered_json report = report_header("uq", config);
  report["differentiation_method"] = art.diff_tag;
  report["descriptors"] = art.library.descriptors;

  const DesignMatrix* design = &art.library;
  DesignMatrix normalized;
  if (config.normalize) {
    normalized = normalize_columns(art.library);
    design = &normalized;
  }
  auto to_raw = [&](double v, std::size_t d) {
    return config.normalize ? v / normalized.column_norms[d] : v;
  };

  ordered_json table = ordered_json::array();
  ordered_json aggregated = ordered_json::array();

  if (config.uq_bootstrap) {
    report["uq_method"] = "bootstrap";
    const auto& b = *config.uq_bootstrap;
    EnsembleResult ensemble = bootstrap_ensemble(*design, art.response, config.solver, b.q,
                                                 b.mode, b.column_keep, config.seed, b.p0);
    report["q"] = b.q;
    report["p0"] = b.p0;
    for (Eigen::Index n = 0; n < ensemble.inclusion_probability.cols(); ++n) {
      for (Eigen::Index d = 0; d < ensemble.inclusion_probability.rows(); ++d) {
        ordered_json row;
        row["component"] = components[static_cast<std::size_t>(n)];
        row["descriptor"] = art.library.descriptors[static_cast<std::size_t>(d)];
        row["inclusion"] = ensemble.inclusion_probability(d, n);
        row["q05"] = to_raw(ensemble.q05(d, n), static_cast<std::size_t>(d));
        row["q50"] = to_raw(ensemble.q50(d, n), static_cast<std::size_t>(d));
        row["q95"] = to_raw(ensemble.q95(d, n), static_cast<std::size_t>(d));
        table.push_back(std::move(row));
      }
    }
    CoefficientMatrix agg = ensemble.aggregated;
    if (config.normalize) agg = denormalize_coefficients(agg, normalized.column_norms);
    for (Eigen::Index n = 0; n < agg.values.cols(); ++n) {
      aggregated.push_back(equation_text(art.response.lhs[static_cast<std::size_t>(n)],
                                         art.library.descriptors, agg.values, agg.support,
                                         n));
    }
  } else {
    report["uq_method"] = "ssvs";
    const SsvsConfig& base = config.uq_ssvs->cfg;
    const double p0 = config.uq_ssvs->p0;
    report["p0"] = p0;
    for (Eigen::Index n = 0; n < art.response.matrix.cols(); ++n) {
      SsvsConfig chain = base;
      chain.seed = derive_seed(base.seed, static_cast<std::uint64_t>(n));
      PosteriorResult posterior =
          ssvs_gibbs(*design, art.response.matrix.col(n), chain);
      std::vector<double> draws(static_cast<std::size_t>(posterior.coefficient_draws.rows()));
      for (Eigen::Index d = 0; d < posterior.inclusion_probability.size(); ++d) {
        for (Eigen::Index k = 0; k < posterior.coefficient_draws.rows(); ++k)
          draws[static_cast<std::size_t>(k)] =
              to_raw(posterior.coefficient_draws(k, d), static_cast<std::size_t>(d));
        std::sort(draws.begin(), draws.end());
        auto quantile = [&](double p) {
          const double pos = p * static_cast<double>(draws.size() - 1);
          const std::size_t lo = static_cast<std::size_t>(pos);
          const std::size_t hi = std::min(lo + 1, draws.size() - 1);
          return draws[lo] + (pos - static_cast<double>(lo)) * (draws[hi] - draws[lo]);
        };
        ordered_json row;
        row["component"] = components[static_cast<std::size_t>(n)];
        row["descriptor"] = art.library.descriptors[static_cast<std::size_t>(d)];
        row["inclusion"] = posterior.inclusion_probability[d];
        row["q05"] = quantile(0.05);
        row["q50"] = quantile(0.50);
        row["q95"] = quantile(0.95);
        table.push_back(std::move(row));
      }
      std::string rhs = art.response.lhs[static_cast<std::size_t>(n)] + " = ";
      bool first = true;
      for (Eigen::Index d = 0; d < posterior.inclusion_probability.size(); ++d) {
        if (posterior.inclusion_probability[d] < p0) continue;
        const double c = to_raw(posterior.mean_given_included[d], static_cast<std::size_t>(d));
        rhs += (first ? (c < 0 ? "−" : "") : (c < 0 ? " − " : " + "));
        rhs += format_coefficient(std::fabs(c));
        if (art.library.descriptors[static_cast<std::size_t>(d)] != "1")
          rhs += "·" + art.library.descriptors[static_cast<std::size_t>(d)];
        first = false;
      }
      if (first) rhs += "0";
      aggregated.push_back(rhs);
    }
  }

  report["table"] = std::move(table);
  report["aggregated"] = std::move(aggregated);

  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  write_json_atomic(out_dir / "report.json", report);
  return report;
}

nlohmann::ordered_json cmd_symbolic(const RunConfig& config) {
  if (!config.symbolic) throw ConfigError("symbolic needs a 'symbolic' config section");
  const Dataset data = obtain_dataset(config);
  const gp::GpConfig& cfg = config.symbolic->cfg;

  std::set<int> temporal{1};
  DerivativeField derivs =
      differentiate_dataset(data, config.differentiation, temporal, {});
  const Dataset& aligned = derivs.data();

  gp::BatchInputs inputs;
  inputs.names = aligned.component_names();
  for (std::size_t n = 0; n < aligned.num_components(); ++n) {
    auto col = aligned.component_column(n);
    inputs.columns.emplace_back(col.begin(), col.end());
  }

  gp::GpResult result;
  if (cfg.fitness == gp::FitnessMode::mse) {
    std::string target = config.symbolic->target_component.empty()
                             ? aligned.component_names().front()
                             : config.symbolic->target_component;
    const int idx = aligned.component_index(target);
    if (idx < 0) throw ConfigError("unknown target component '" + target + "'");
    auto col = derivs.temporal_column(1, static_cast<std::size_t>(idx));
    std::vector<double> target_col(col.begin(), col.end());
    result = gp::evolve(inputs, target_col, cfg);
  } else {
    if (aligned.num_components() != 2)
      throw ConfigError("pairwise fitness needs exactly two components");
    gp::PairwiseDerivatives pd;
    auto dx = derivs.temporal_column(1, 0);
    auto dy = derivs.temporal_column(1, 1);
    pd.dx_dt.assign(dx.begin(), dx.end());
    pd.dy_dt.assign(dy.begin(), dy.end());
    result = gp::evolve(inputs, pd, cfg);
  }

  ordered_json report = report_header("symbolic", config);
  report["differentiation_method"] = derivs.temporal(1).method;
  report["best_equation"] = result.best_infix;
  report["best_loss"] = result.best_loss;
  report["generations"] = result.generations;
  report["loss_trace"] = result.loss_trace;
  report["final_mean_loss"] = result.final_mean_loss;
  report["crossover_rejections"] = result.crossover_rejections;
  report["best_tree"] = result.best.to_json();

  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  write_json_atomic(out_dir / "report.json", report);
  return report;
}

}  // namespace eqdisc
