#include "eqdisc/config.hpp"

#include <fstream>
#include <set>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw SchemaError("unknown key '" + it.key() + "' in " + where);
  }
}

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SchemaError("'" + key + "' must be a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw SchemaError("'" + key + "' must be an integer");
  return j.at(key).get<int>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw SchemaError("'" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw SchemaError("'" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

SimSpec parse_sim(const json& j, bool* seed_explicit) {
  reject_unknown_keys(j,
                      {"system", "parameters", "initial_state", "dt", "n_steps", "dx",
                       "space_points", "boundary_left", "boundary_right", "noise_level",
                       "seed"},
                      "data.sim");
  SimSpec spec;
  if (!j.contains("system")) throw SchemaError("data.sim needs a 'system'");
  spec.system = system_from_name(j.at("system").get<std::string>());
  if (j.contains("parameters")) {
    for (auto it = j.at("parameters").begin(); it != j.at("parameters").end(); ++it)
      spec.parameters[it.key()] = it.value().get<double>();
  }
  if (!j.contains("initial_state")) throw SchemaError("data.sim needs an 'initial_state'");
  spec.initial_state = j.at("initial_state").get<std::vector<double>>();
  spec.dt = get_number(j, "dt", spec.dt);
  spec.n_steps = get_int(j, "n_steps", spec.n_steps);
  spec.dx = get_number(j, "dx", spec.dx);
  spec.space_points = get_int(j, "space_points", spec.space_points);
  spec.boundary_left = get_number(j, "boundary_left", spec.boundary_left);
  spec.boundary_right = get_number(j, "boundary_right", spec.boundary_right);
  spec.noise_level = get_number(j, "noise_level", spec.noise_level);
  *seed_explicit = j.contains("seed");
  if (*seed_explicit) spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

DiffConfig parse_differentiation(const json& j) {
  reject_unknown_keys(j, {"method", "poly_window", "poly_degree", "boundary"},
                      "differentiation");
  DiffConfig cfg;
  const std::string method = get_string(j, "method", "central_fd");
  if (method == "central_fd")
    cfg.method = DiffMethod::central_fd;
  else if (method == "smoothed_poly")
    cfg.method = DiffMethod::smoothed_poly;
  else
    throw SchemaError("unknown differentiation method '" + method + "'");
  cfg.poly_window = get_int(j, "poly_window", cfg.poly_window);
  cfg.poly_degree = get_int(j, "poly_degree", cfg.poly_degree);
  const std::string boundary = get_string(j, "boundary", "one_sided");
  if (boundary == "one_sided")
    cfg.boundary = BoundaryPolicy::one_sided;
  else if (boundary == "trim")
    cfg.boundary = BoundaryPolicy::trim;
  else
    throw SchemaError("unknown boundary policy '" + boundary + "'");
  cfg.validate();
  return cfg;
}

LibrarySpec parse_library(const json& j) {
  reject_unknown_keys(j,
                      {"poly_degree", "include_constant", "trig_frequencies",
                       "derivative_orders", "interaction_orders", "interactions",
                       "include_covariates"},
                      "library");
  LibrarySpec spec;
  spec.poly_degree = get_int(j, "poly_degree", spec.poly_degree);
  spec.include_constant = get_bool(j, "include_constant", spec.include_constant);
  if (j.contains("trig_frequencies"))
    spec.trig_frequencies = j.at("trig_frequencies").get<std::vector<double>>();
  if (j.contains("derivative_orders"))
    spec.derivative_orders = j.at("derivative_orders").get<std::vector<int>>();
  if (j.contains("interaction_orders"))
    spec.interaction_orders = j.at("interaction_orders").get<std::vector<int>>();
  if (get_bool(j, "interactions", false)) spec.interaction_orders = spec.derivative_orders;
  spec.include_covariates = get_bool(j, "include_covariates", spec.include_covariates);
  spec.validate();
  return spec;
}

std::pair<SolverMethod, SolverConfig> parse_solver(const json& j, bool* normalize,
                                                   Grouping* grouping) {
  reject_unknown_keys(j,
                      {"method", "kappa", "lambda", "nu", "max_iters", "tolerance",
                       "sr3_penalty", "normalize", "grouping"},
                      "solver");
  SolverMethod method = SolverMethod::stls;
  const std::string name = get_string(j, "method", "stls");
  if (name == "stls")
    method = SolverMethod::stls;
  else if (name == "stridge")
    method = SolverMethod::stridge;
  else if (name == "group_stridge")
    method = SolverMethod::group_stridge;
  else if (name == "sr3")
    method = SolverMethod::sr3;
  else
    throw SchemaError("unknown solver method '" + name + "'");

  SolverConfig cfg;
  cfg.kappa = get_number(j, "kappa", cfg.kappa);
  cfg.lambda = get_number(j, "lambda", cfg.lambda);
  cfg.nu = get_number(j, "nu", cfg.nu);
  cfg.max_iters = get_int(j, "max_iters", cfg.max_iters);
  cfg.tolerance = get_number(j, "tolerance", cfg.tolerance);
  const std::string penalty = get_string(j, "sr3_penalty", "l0");
  if (penalty == "l0")
    cfg.sr3_penalty = Sr3Penalty::l0;
  else if (penalty == "l1")
    cfg.sr3_penalty = Sr3Penalty::l1;
  else
    throw SchemaError("unknown sr3_penalty '" + penalty + "'");
  cfg.validate();

  *normalize = get_bool(j, "normalize", true);
  const std::string group = get_string(j, "grouping", "by_time");
  if (group == "by_time")
    *grouping = Grouping::by_time;
  else if (group == "by_space")
    *grouping = Grouping::by_space;
  else
    throw SchemaError("unknown grouping '" + group + "'");
  return {method, cfg};
}

gp::GpConfig parse_gp(const json& j, bool* seed_explicit) {
  reject_unknown_keys(
      j,
      {"function_set", "population_size", "max_generations", "p_crossover", "p_mutation",
       "p_reproduction", "max_depth", "max_nodes", "tournament_size", "snip_threshold",
       "snip_interval", "constant_min", "constant_max", "stop_xi", "patience",
       "hybrid_coefficients", "hybrid_top", "lambda_gp", "fitness", "seed",
       "target_component"},
      "symbolic");
  gp::GpConfig cfg;
  if (j.contains("function_set")) {
    cfg.function_set.clear();
    for (const auto& name : j.at("function_set"))
      cfg.function_set.push_back(gp::op_from_name(name.get<std::string>()));
  }
  cfg.population_size = get_int(j, "population_size", cfg.population_size);
  cfg.max_generations = get_int(j, "max_generations", cfg.max_generations);
  cfg.p_crossover = get_number(j, "p_crossover", cfg.p_crossover);
  cfg.p_mutation = get_number(j, "p_mutation", cfg.p_mutation);
  cfg.p_reproduction = get_number(j, "p_reproduction", cfg.p_reproduction);
  cfg.max_depth = get_int(j, "max_depth", cfg.max_depth);
  cfg.max_nodes = get_int(j, "max_nodes", cfg.max_nodes);
  cfg.tournament_size = get_int(j, "tournament_size", cfg.tournament_size);
  cfg.snip_threshold = get_number(j, "snip_threshold", cfg.snip_threshold);
  cfg.snip_interval = get_int(j, "snip_interval", cfg.snip_interval);
  cfg.constant_min = get_number(j, "constant_min", cfg.constant_min);
  cfg.constant_max = get_number(j, "constant_max", cfg.constant_max);
  cfg.stop_xi = get_number(j, "stop_xi", cfg.stop_xi);
  cfg.patience = get_int(j, "patience", cfg.patience);
  cfg.hybrid_coefficients = get_bool(j, "hybrid_coefficients", cfg.hybrid_coefficients);
  cfg.hybrid_top = get_int(j, "hybrid_top", cfg.hybrid_top);
  cfg.lambda_gp = get_number(j, "lambda_gp", cfg.lambda_gp);
  const std::string fitness = get_string(j, "fitness", "mse");
  if (fitness == "mse")
    cfg.fitness = gp::FitnessMode::mse;
  else if (fitness == "pairwise_log")
    cfg.fitness = gp::FitnessMode::pairwise_log;
  else
    throw SchemaError("unknown fitness '" + fitness + "'");
  *seed_explicit = j.contains("seed");
  if (*seed_explicit) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

}  // namespace

std::string method_name(SolverMethod m) {
  switch (m) {
    case SolverMethod::stls: return "stls";
    case SolverMethod::stridge: return "stridge";
    case SolverMethod::group_stridge: return "group_stridge";
    case SolverMethod::sr3: return "sr3";
  }
  throw ConfigError("unknown solver method");
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw SchemaError("run config must be a JSON object");
  reject_unknown_keys(j,
                      {"schema_version", "seed", "output_dir", "data", "differentiation",
                       "response_order", "library", "solver", "uq", "symbolic"},
                      "run config");
  RunConfig config;
  config.schema_version = get_int(j, "schema_version", 1);
  if (config.schema_version != 1)
    throw SchemaError("unsupported schema_version " + std::to_string(config.schema_version));
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  config.output_dir = get_string(j, "output_dir", config.output_dir);

  if (!j.contains("data")) throw SchemaError("run config needs a 'data' section");
  const json& data = j.at("data");
  reject_unknown_keys(data, {"path", "layout", "sim"}, "data");
  if (data.contains("path") == data.contains("sim"))
    throw SchemaError("data needs exactly one of 'path' and 'sim'");
  if (data.contains("path")) {
    config.data_path = data.at("path").get<std::string>();
    if (data.contains("layout")) {
      const json& l = data.at("layout");
      reject_unknown_keys(l, {"time", "space", "components", "covariates"}, "data.layout");
      CsvLayout layout;
      layout.time_column = get_string(l, "time", "t");
      if (l.contains("space")) layout.space_column = l.at("space").get<std::string>();
      if (l.contains("components"))
        layout.components = l.at("components").get<std::vector<std::string>>();
      if (l.contains("covariates"))
        layout.covariates = l.at("covariates").get<std::vector<std::string>>();
      config.data_layout = std::move(layout);
    }
  } else {
    config.sim = parse_sim(data.at("sim"), &config.sim_seed_explicit);
  }

  if (j.contains("differentiation"))
    config.differentiation = parse_differentiation(j.at("differentiation"));
  config.response_order = get_int(j, "response_order", 1);
  if (config.response_order != 1 && config.response_order != 2)
    throw SchemaError("response_order must be 1 or 2");

  if (j.contains("library")) config.library = parse_library(j.at("library"));

  if (j.contains("solver")) {
    auto [method, solver] = parse_solver(j.at("solver"), &config.normalize, &config.grouping);
    config.method = method;
    config.solver = solver;
  }

  if (j.contains("uq")) {
    const json& uq = j.at("uq");
    reject_unknown_keys(uq,
                        {"mode", "q", "bootstrap_mode", "column_keep", "p0", "n_samples",
                         "n_burnin", "spike_var", "slab_var", "prior_inclusion", "a_s",
                         "b_s", "seed"},
                        "uq");
    const std::string mode = get_string(uq, "mode", "");
    config.uq_seed_explicit = uq.contains("seed");
    if (mode == "bootstrap") {
      UqBootstrapSection b;
      b.q = get_int(uq, "q", b.q);
      const std::string bmode = get_string(uq, "bootstrap_mode", "rows");
      if (bmode == "rows")
        b.mode = BootstrapMode::rows;
      else if (bmode == "columns")
        b.mode = BootstrapMode::columns;
      else
        throw SchemaError("unknown bootstrap_mode '" + bmode + "'");
      b.column_keep = get_number(uq, "column_keep", b.column_keep);
      b.p0 = get_number(uq, "p0", b.p0);
      config.uq_bootstrap = b;
    } else if (mode == "ssvs") {
      UqSsvsSection s;
      s.cfg.n_samples = get_int(uq, "n_samples", s.cfg.n_samples);
      s.cfg.n_burnin = get_int(uq, "n_burnin", s.cfg.n_burnin);
      s.cfg.spike_var = get_number(uq, "spike_var", s.cfg.spike_var);
      s.cfg.slab_var = get_number(uq, "slab_var", s.cfg.slab_var);
      s.cfg.prior_inclusion = get_number(uq, "prior_inclusion", s.cfg.prior_inclusion);
      s.cfg.a_s = get_number(uq, "a_s", s.cfg.a_s);
      s.cfg.b_s = get_number(uq, "b_s", s.cfg.b_s);
      s.p0 = get_number(uq, "p0", s.p0);
      if (config.uq_seed_explicit) s.cfg.seed = uq.at("seed").get<std::uint64_t>();
      s.cfg.validate();
      config.uq_ssvs = s;
    } else {
      throw SchemaError("uq.mode must be 'bootstrap' or 'ssvs'");
    }
  }

  if (j.contains("symbolic")) {
    SymbolicSection s;
    s.cfg = parse_gp(j.at("symbolic"), &config.symbolic_seed_explicit);
    s.target_component = get_string(j.at("symbolic"), "target_component", "");
    config.symbolic = std::move(s);
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  RunConfig config = parse_run_config(j);
  if (config.data_path) {
    std::filesystem::path p(*config.data_path);
    if (p.is_relative()) p = path.parent_path() / p;
    if (!std::filesystem::exists(p))
      throw ConfigError("data file '" + p.string() + "' does not exist");
    config.data_path = p.string();
  }
  return config;
}

void apply_overrides(RunConfig& config, std::optional<std::uint64_t> seed,
                     std::optional<std::string> output_dir) {
  if (seed) config.seed = *seed;
  if (output_dir) config.output_dir = *output_dir;
  if (config.sim && (!config.sim_seed_explicit || seed)) config.sim->seed = config.seed;
  if (config.uq_ssvs && (!config.uq_seed_explicit || seed))
    config.uq_ssvs->cfg.seed = config.seed;
  if (config.symbolic && (!config.symbolic_seed_explicit || seed))
    config.symbolic->cfg.seed = config.seed;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["schema_version"] = config.schema_version;
  j["seed"] = config.seed;
  j["output_dir"] = config.output_dir;

  nlohmann::ordered_json data;
  if (config.data_path) {
    data["path"] = *config.data_path;
    if (config.data_layout) {
      nlohmann::ordered_json l;
      l["time"] = config.data_layout->time_column;
      if (config.data_layout->space_column) l["space"] = *config.data_layout->space_column;
      l["components"] = config.data_layout->components;
      l["covariates"] = config.data_layout->covariates;
      data["layout"] = std::move(l);
    }
  } else if (config.sim) {
    nlohmann::ordered_json s;
    s["system"] = system_name(config.sim->system);
    s["parameters"] = config.sim->parameters;
    s["initial_state"] = config.sim->initial_state;
    s["dt"] = config.sim->dt;
    s["n_steps"] = config.sim->n_steps;
    if (config.sim->system == SystemKind::diffusion_1d) {
      s["dx"] = config.sim->dx;
      s["space_points"] = config.sim->space_points;
      s["boundary_left"] = config.sim->boundary_left;
      s["boundary_right"] = config.sim->boundary_right;
    }
    s["noise_level"] = config.sim->noise_level;
    s["seed"] = config.sim->seed;
    data["sim"] = std::move(s);
  }
  j["data"] = std::move(data);

  nlohmann::ordered_json diff;
  diff["method"] =
      config.differentiation.method == DiffMethod::central_fd ? "central_fd" : "smoothed_poly";
  diff["poly_window"] = config.differentiation.poly_window;
  diff["poly_degree"] = config.differentiation.poly_degree;
  diff["boundary"] =
      config.differentiation.boundary == BoundaryPolicy::one_sided ? "one_sided" : "trim";
  j["differentiation"] = std::move(diff);
  j["response_order"] = config.response_order;

  nlohmann::ordered_json lib;
  lib["poly_degree"] = config.library.poly_degree;
  lib["include_constant"] = config.library.include_constant;
  lib["trig_frequencies"] = config.library.trig_frequencies;
  lib["derivative_orders"] = config.library.derivative_orders;
  lib["interaction_orders"] = config.library.interaction_orders;
  lib["include_covariates"] = config.library.include_covariates;
  j["library"] = std::move(lib);

  nlohmann::ordered_json solver;
  solver["method"] = method_name(config.method);
  solver["kappa"] = config.solver.kappa;
  solver["lambda"] = config.solver.lambda;
  solver["nu"] = config.solver.nu;
  solver["max_iters"] = config.solver.max_iters;
  solver["tolerance"] = config.solver.tolerance;
  solver["sr3_penalty"] = config.solver.sr3_penalty == Sr3Penalty::l0 ? "l0" : "l1";
  solver["normalize"] = config.normalize;
  solver["grouping"] = config.grouping == Grouping::by_time ? "by_time" : "by_space";
  j["solver"] = std::move(solver);

  if (config.uq_bootstrap) {
    nlohmann::ordered_json uq;
    uq["mode"] = "bootstrap";
    uq["q"] = config.uq_bootstrap->q;
    uq["bootstrap_mode"] =
        config.uq_bootstrap->mode == BootstrapMode::rows ? "rows" : "columns";
    uq["column_keep"] = config.uq_bootstrap->column_keep;
    uq["p0"] = config.uq_bootstrap->p0;
    j["uq"] = std::move(uq);
  } else if (config.uq_ssvs) {
    nlohmann::ordered_json uq;
    uq["mode"] = "ssvs";
    uq["n_samples"] = config.uq_ssvs->cfg.n_samples;
    uq["n_burnin"] = config.uq_ssvs->cfg.n_burnin;
    uq["spike_var"] = config.uq_ssvs->cfg.spike_var;
    uq["slab_var"] = config.uq_ssvs->cfg.slab_var;
    uq["prior_inclusion"] = config.uq_ssvs->cfg.prior_inclusion;
    uq["a_s"] = config.uq_ssvs->cfg.a_s;
    uq["b_s"] = config.uq_ssvs->cfg.b_s;
    uq["p0"] = config.uq_ssvs->p0;
    uq["seed"] = config.uq_ssvs->cfg.seed;
    j["uq"] = std::move(uq);
  }

  if (config.symbolic) {
    nlohmann::ordered_json s;
    nlohmann::ordered_json fns = nlohmann::ordered_json::array();
    for (gp::Op op : config.symbolic->cfg.function_set) fns.push_back(gp::op_name(op));
    s["function_set"] = std::move(fns);
    s["population_size"] = config.symbolic->cfg.population_size;
    s["max_generations"] = config.symbolic->cfg.max_generations;
    s["p_crossover"] = config.symbolic->cfg.p_crossover;
    s["p_mutation"] = config.symbolic->cfg.p_mutation;
    s["p_reproduction"] = config.symbolic->cfg.p_reproduction;
    s["max_depth"] = config.symbolic->cfg.max_depth;
    s["max_nodes"] = config.symbolic->cfg.max_nodes;
    s["tournament_size"] = config.symbolic->cfg.tournament_size;
    s["snip_threshold"] = config.symbolic->cfg.snip_threshold;
    s["snip_interval"] = config.symbolic->cfg.snip_interval;
    s["constant_min"] = config.symbolic->cfg.constant_min;
    s["constant_max"] = config.symbolic->cfg.constant_max;
    s["stop_xi"] = config.symbolic->cfg.stop_xi;
    s["patience"] = config.symbolic->cfg.patience;
    s["hybrid_coefficients"] = config.symbolic->cfg.hybrid_coefficients;
    s["hybrid_top"] = config.symbolic->cfg.hybrid_top;
    s["lambda_gp"] = config.symbolic->cfg.lambda_gp;
    s["fitness"] =
        config.symbolic->cfg.fitness == gp::FitnessMode::mse ? "mse" : "pairwise_log";
    s["seed"] = config.symbolic->cfg.seed;
    s["target_component"] = config.symbolic->target_component;
    j["symbolic"] = std::move(s);
  }
  return j;
}

}  // namespace eqdisc
