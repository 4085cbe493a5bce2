#include "eqdisc/gp/operators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "eqdisc/errors.hpp"
#include "eqdisc/kernels.hpp"

namespace eqdisc::gp {

namespace {

std::vector<Op> binary_ops(const GpConfig& cfg) {
  std::vector<Op> out;
  for (Op op : cfg.function_set)
    if (is_binary(op)) out.push_back(op);
  return out;
}

std::vector<Op> unary_ops(const GpConfig& cfg) {
  std::vector<Op> out;
  for (Op op : cfg.function_set)
    if (is_unary(op)) out.push_back(op);
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

Tree random_terminal(const GpConfig& cfg, int n_vars, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < 0.5) {
    std::uniform_int_distribution<int> v(0, n_vars - 1);
    return Tree::variable(v(rng));
  }
  std::uniform_real_distribution<double> c(cfg.constant_min, cfg.constant_max);
  return Tree::constant(c(rng));
}

// depth_left >= 1, budget >= 1. `full` prefers function nodes until the depth
// budget runs out.
Tree generate(const GpConfig& cfg, int n_vars, std::mt19937_64& rng, int depth_left,
              int budget, bool full) {
  const auto binaries = binary_ops(cfg);
  const auto unaries = unary_ops(cfg);
  const bool can_binary = depth_left >= 2 && budget >= 3 && !binaries.empty();
  const bool can_unary = depth_left >= 2 && budget >= 2 && !unaries.empty();
  if (!can_binary && !can_unary) return random_terminal(cfg, n_vars, rng);

  bool make_function = true;
  if (!full) {
    // grow: draw uniformly over terminal vs available function kinds
    int options = 1 + (can_binary ? 1 : 0) + (can_unary ? 1 : 0);
    std::uniform_int_distribution<int> d(0, options - 1);
    make_function = d(rng) != 0;
  }
  if (!make_function) return random_terminal(cfg, n_vars, rng);

  bool binary = can_binary;
  if (can_binary && can_unary) {
    std::uniform_int_distribution<int> d(0, 1);
    binary = d(rng) == 0;
  }
  if (binary) {
    // reserve one node for this operator and at least one for the right child
    Tree left = generate(cfg, n_vars, rng, depth_left - 1, (budget - 2) / 2 + (budget - 2) % 2,
                         full);
    Tree right =
        generate(cfg, n_vars, rng, depth_left - 1, budget - 1 - left.node_count(), full);
    return Tree::binary(pick(binaries, rng), std::move(left), std::move(right));
  }
  Tree child = generate(cfg, n_vars, rng, depth_left - 1, budget - 1, full);
  return Tree::unary(pick(unaries, rng), std::move(child));
}

int uniform_node(const Tree& t, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, t.node_count() - 1);
  return d(rng);
}

}  // namespace

void GpConfig::validate() const {
  if (function_set.empty()) throw ConfigError("function set must not be empty");
  for (Op op : function_set) {
    if (is_terminal(op)) throw ConfigError("function set must not contain terminals");
  }
  if (population_size < 10) throw ConfigError("population size must be at least 10");
  if (max_generations < 0) throw ConfigError("max_generations must be non-negative");
  const double total = p_crossover + p_mutation + p_reproduction;
  if (p_crossover < 0 || p_mutation < 0 || p_reproduction < 0 ||
      std::fabs(total - 1.0) > 1e-9)
    throw ConfigError("operator probabilities must be non-negative and sum to 1");
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (max_nodes < 1) throw ConfigError("max_nodes must be at least 1");
  if (tournament_size < 1) throw ConfigError("tournament size must be at least 1");
  if (snip_threshold < 0) throw ConfigError("snip threshold must be non-negative");
  if (snip_interval < 0) throw ConfigError("snip interval must be non-negative");
  if (!(constant_min <= constant_max)) throw ConfigError("constant range is empty");
  if (stop_xi < 0) throw ConfigError("stopping threshold must be non-negative");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (hybrid_top < 1) throw ConfigError("hybrid_top must be at least 1");
  if (lambda_gp < 0) throw ConfigError("lambda_gp must be non-negative");
}

bool GpConfig::has_binary() const {
  return std::any_of(function_set.begin(), function_set.end(),
                     [](Op op) { return is_binary(op); });
}

bool GpConfig::has_unary() const {
  return std::any_of(function_set.begin(), function_set.end(),
                     [](Op op) { return is_unary(op); });
}

Tree random_tree(const GpConfig& cfg, int n_vars, std::mt19937_64& rng) {
  if (n_vars < 1) throw ConfigError("tree generation needs at least one variable");
  if (cfg.max_depth == 1) return random_terminal(cfg, n_vars, rng);
  std::uniform_int_distribution<int> depth_pick(2, cfg.max_depth);
  std::uniform_int_distribution<int> mode_pick(0, 1);
  const int depth = depth_pick(rng);
  const bool full = mode_pick(rng) == 0;
  return generate(cfg, n_vars, rng, depth, cfg.max_nodes, full);
}

std::pair<Tree, Tree> crossover(const Tree& a, const Tree& b, const GpConfig& cfg,
                                std::mt19937_64& rng, bool* rejected) {
  const int ia = uniform_node(a, rng);
  const int ib = uniform_node(b, rng);
  Tree sub_a = a.subtree(ia);
  Tree sub_b = b.subtree(ib);
  Tree child_a = a.with_replaced(ia, sub_b);
  Tree child_b = b.with_replaced(ib, sub_a);
  const bool ok = child_a.node_count() <= cfg.max_nodes &&
                  child_b.node_count() <= cfg.max_nodes &&
                  child_a.depth() <= cfg.max_depth && child_b.depth() <= cfg.max_depth;
  if (rejected) *rejected = !ok;
  if (!ok) return {a, b};
  return {std::move(child_a), std::move(child_b)};
}

Tree mutate(const Tree& tree, const GpConfig& cfg, int n_vars, std::mt19937_64& rng) {
  if (cfg.p_mutation <= 0.0) return tree;
  const int idx = uniform_node(tree, rng);
  std::vector<Node> nodes = tree.nodes();
  Node& n = nodes[static_cast<std::size_t>(idx)];
  if (is_binary(n.op)) {
    n.op = pick(binary_ops(cfg), rng);
  } else if (is_unary(n.op)) {
    n.op = pick(unary_ops(cfg), rng);
  } else {
    Tree terminal = random_terminal(cfg, n_vars, rng);
    const Node& t = terminal.nodes()[0];
    n.op = t.op;
    n.var = t.var;
    n.value = t.value;
  }
  return Tree::from_nodes(std::move(nodes));
}

Tree snip(const Tree& tree, const BatchInputs& inputs, double snip_threshold,
          int* snipped) {
  const std::size_t rows = inputs.rows();
  if (rows == 0) return tree;
  const auto& nodes = tree.nodes();
  const auto slots = eval_tree_nodes(tree, inputs);

  std::vector<bool> snippable(nodes.size(), false);
  std::vector<double> means(nodes.size(), 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].op == Op::constant) continue;  // already a constant
    const double mean = kernels::sum(slots[i].data(), rows) / static_cast<double>(rows);
    double ss = 0.0;
    for (double v : slots[i]) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(rows));
    means[i] = mean;
    double cov;
    if (sd == 0.0)
      cov = 0.0;
    else if (mean == 0.0)
      cov = std::numeric_limits<double>::infinity();
    else
      cov = sd / std::fabs(mean);
    snippable[i] = cov < snip_threshold;
  }

  int count = 0;
  std::function<Tree(int)> rebuild = [&](int i) -> Tree {
    if (snippable[static_cast<std::size_t>(i)]) {
      ++count;
      return Tree::constant(means[static_cast<std::size_t>(i)]);
    }
    const Node& n = nodes[static_cast<std::size_t>(i)];
    if (is_binary(n.op)) return Tree::binary(n.op, rebuild(n.a), rebuild(n.b));
    if (is_unary(n.op)) return Tree::unary(n.op, rebuild(n.a));
    return tree.subtree(i);
  };
  Tree out = rebuild(tree.root());
  if (snipped) *snipped = count;
  return out;
}

double fitness_mse(const Tree& tree, const BatchInputs& inputs,
                   std::span<const double> target) {
  const std::size_t rows = inputs.rows();
  if (target.size() != rows) throw SchemaError("target length does not match the batch");
  std::vector<double> values = eval_tree(tree, inputs);
  std::vector<double> residual(rows);
  kernels::sub(values.data(), target.data(), residual.data(), rows);
  const double ss = kernels::sum_squares(residual.data(), rows);
  if (!std::isfinite(ss)) return std::numeric_limits<double>::infinity();
  return ss / static_cast<double>(rows);
}

double fitness_pairwise_log(const Tree& tree, const BatchInputs& inputs,
                            const PairwiseDerivatives& derivs, std::size_t* skipped) {
  if (inputs.n_vars() != 2)
    throw SchemaError("pairwise fitness needs exactly two variables");
  const std::size_t rows = inputs.rows();
  if (derivs.dx_dt.size() != rows || derivs.dy_dt.size() != rows)
    throw SchemaError("derivative columns do not match the batch");

  Tree fx = differentiate_tree(tree, 0);
  Tree fy = differentiate_tree(tree, 1);
  std::vector<double> fx_vals = eval_tree(fx, inputs);
  std::vector<double> fy_vals = eval_tree(fy, inputs);

  // Implicit-function ratio of partials: dx/dy = -f_y / f_x.
  std::vector<double> symbolic(rows);
  kernels::guarded_div(fy_vals.data(), fx_vals.data(), symbolic.data(), rows);
  kernels::scale(symbolic.data(), -1.0, symbolic.data(), rows);

  double total = 0.0;
  std::size_t used = 0;
  std::size_t skip_count = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (std::fabs(derivs.dy_dt[i]) < 1e-8) {
      ++skip_count;
      continue;
    }
    const double numeric = derivs.dx_dt[i] / derivs.dy_dt[i];
    total += std::log1p(std::fabs(numeric - symbolic[i]));
    ++used;
  }
  if (skipped) *skipped = skip_count;
  if (used == 0)
    throw UndefinedFitnessError("pairwise fitness: every sample point was skipped");
  return -total / static_cast<double>(used);
}

std::vector<Tree> split_additive_terms(const Tree& tree) {
  std::vector<Tree> terms;
  std::function<void(int)> walk = [&](int i) {
    const Node& n = tree.nodes()[static_cast<std::size_t>(i)];
    if (n.op == Op::add || n.op == Op::sub) {
      walk(n.a);
      walk(n.b);
      return;
    }
    terms.push_back(tree.subtree(i));
  };
  walk(tree.root());
  return terms;
}

Eigen::VectorXd fit_linear_coefficients(const std::vector<Tree>& terms,
                                        const BatchInputs& inputs,
                                        std::span<const double> target, double lambda_gp) {
  if (terms.empty()) throw ConfigError("coefficient fit needs at least one term");
  const std::size_t rows = inputs.rows();
  if (target.size() != rows) throw SchemaError("target length does not match the batch");

  Eigen::MatrixXd columns(static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(terms.size()));
  for (std::size_t k = 0; k < terms.size(); ++k) {
    std::vector<double> vals = eval_tree(terms[k], inputs);
    for (std::size_t r = 0; r < rows; ++r)
      columns(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = vals[r];
  }
  Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(rows));
  Eigen::VectorXd coeffs =
      columns.completeOrthogonalDecomposition().solve(y);
  if (lambda_gp > 0.0) {
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
      const double a = std::fabs(coeffs[k]) - lambda_gp;
      coeffs[k] = a > 0.0 ? (coeffs[k] > 0 ? a : -a) : 0.0;
    }
  }
  return coeffs;
}

Tree assemble_linear_combination(const std::vector<Tree>& terms,
                                 const Eigen::VectorXd& coefficients) {
  if (static_cast<std::size_t>(coefficients.size()) != terms.size())
    throw SchemaError("coefficient count does not match the terms");
  Tree out;
  bool first = true;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double c = coefficients[static_cast<Eigen::Index>(k)];
    if (c == 0.0) continue;
    Tree term = Tree::binary(Op::mul, Tree::constant(c), terms[k]);
    if (first) {
      out = std::move(term);
      first = false;
    } else {
      out = Tree::binary(Op::add, std::move(out), std::move(term));
    }
  }
  if (first) return Tree::constant(0.0);
  return out;
}

}  // namespace eqdisc::gp
