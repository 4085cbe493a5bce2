#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "eqdisc/differentiate.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/gp/evolve.hpp"
#include "eqdisc/simulate.hpp"

using namespace eqdisc;
using gp::Op;
using gp::Tree;

namespace {

gp::GpConfig small_config(std::uint64_t seed = 0) {
  gp::GpConfig cfg;
  cfg.population_size = 30;
  cfg.max_generations = 15;
  cfg.max_depth = 5;
  cfg.max_nodes = 20;
  cfg.tournament_size = 3;
  cfg.patience = 5;
  cfg.seed = seed;
  return cfg;
}

gp::BatchInputs grid_inputs(double lo, double hi, std::size_t n,
                            std::vector<std::string> names = {"X"}) {
  gp::BatchInputs inputs;
  inputs.names = names;
  for (std::size_t v = 0; v < names.size(); ++v) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      col[i] = v == 0 ? x : std::sin(1.7 * x) + 0.3;
    }
    inputs.columns.push_back(std::move(col));
  }
  return inputs;
}

}  // namespace

TEST_CASE("tree evaluation reproduces the two-variable example") {
  // f(X, Y) = X/10 + Y * 1.2 cos(X)
  Tree f = Tree::binary(
      Op::add, Tree::binary(Op::div, Tree::variable(0), Tree::constant(10.0)),
      Tree::binary(Op::mul, Tree::variable(1),
                   Tree::binary(Op::mul, Tree::constant(1.2),
                                Tree::unary(Op::cos, Tree::variable(0)))));
  const double point[] = {0.0, 1.0};
  CHECK(gp::eval_tree(f, std::span<const double>(point, 2)) == doctest::Approx(1.2));
}

TEST_CASE("constant trees evaluate to their constant") {
  Tree c = Tree::constant(-3.75);
  for (double x : {-5.0, 0.0, 2.5}) {
    const double point[] = {x};
    CHECK(gp::eval_tree(c, std::span<const double>(point, 1)) == -3.75);
  }
}

TEST_CASE("batch evaluation equals pointwise evaluation") {
  std::mt19937_64 rng(1);
  gp::GpConfig cfg = small_config();
  gp::BatchInputs inputs = grid_inputs(-2.0, 2.0, 37, {"X", "Y"});
  for (int rep = 0; rep < 50; ++rep) {
    Tree t = gp::random_tree(cfg, 2, rng);
    auto batch = gp::eval_tree(t, inputs);
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
      const double point[] = {inputs.columns[0][i], inputs.columns[1][i]};
      CHECK(batch[i] == gp::eval_tree(t, std::span<const double>(point, 2)));
    }
  }
}

TEST_CASE("protected division yields one and is flagged") {
  Tree t = Tree::binary(Op::div, Tree::constant(5.0), Tree::variable(0));
  gp::BatchInputs inputs;
  inputs.names = {"X"};
  inputs.columns = {{2.0, 0.0, 1e-13}};
  gp::EvalStats stats;
  auto vals = gp::eval_tree(t, inputs, &stats);
  CHECK(vals[0] == 2.5);
  CHECK(vals[1] == 1.0);
  CHECK(vals[2] == 1.0);
  CHECK(stats.guarded_divisions == 2);
}

TEST_CASE("evaluation clamps runaway magnitudes") {
  Tree t = Tree::unary(Op::exp, Tree::unary(Op::exp, Tree::variable(0)));
  const double point[] = {100.0};
  CHECK(gp::eval_tree(t, std::span<const double>(point, 1)) == gp::kValueLimit);
}

TEST_CASE("symbolic derivative of X*X is X+X") {
  Tree t = Tree::binary(Op::mul, Tree::variable(0), Tree::variable(0));
  Tree d = gp::differentiate_tree(t, 0);
  REQUIRE(d.node_count() == 3);
  CHECK(d.nodes()[2].op == Op::add);
  CHECK(d.nodes()[0].op == Op::var);
  CHECK(d.nodes()[1].op == Op::var);
}

TEST_CASE("symbolic derivative of sin is cos") {
  Tree t = Tree::unary(Op::sin, Tree::variable(0));
  Tree d = gp::differentiate_tree(t, 0);
  REQUIRE(d.node_count() == 2);
  CHECK(d.nodes()[1].op == Op::cos);
}

TEST_CASE("symbolic derivatives match finite differences on random trees") {
  std::mt19937_64 rng(7);
  gp::GpConfig cfg = small_config();
  cfg.max_depth = 5;
  std::uniform_real_distribution<double> pick(-2.0, 2.0);
  int checked = 0;
  for (int rep = 0; rep < 400 && checked < 200; ++rep) {
    Tree t = gp::random_tree(cfg, 2, rng);
    Tree d = gp::differentiate_tree(t, 0);
    for (int p = 0; p < 4; ++p) {
      double x[] = {pick(rng), pick(rng)};
      const double h = 1e-5 * std::max(1.0, std::fabs(x[0]));
      gp::EvalStats stats;
      double xp[] = {x[0] + h, x[1]};
      double xm[] = {x[0] - h, x[1]};
      const double fp = gp::eval_tree(t, std::span<const double>(xp, 2), &stats);
      const double fm = gp::eval_tree(t, std::span<const double>(xm, 2), &stats);
      const double analytic = gp::eval_tree(d, std::span<const double>(x, 2), &stats);
      if (stats.guarded_divisions > 0) continue;  // near a protected singularity
      if (std::fabs(fp) > 1e6 || std::fabs(fm) > 1e6 || std::fabs(analytic) > 1e6)
        continue;  // clamped or steep regions are not informative
      const double numeric = (fp - fm) / (2.0 * h);
      CHECK(std::fabs(analytic - numeric) <= 1e-4 * std::max(1.0, std::fabs(analytic)));
      ++checked;
    }
  }
  CHECK(checked >= 200);
}

TEST_CASE("random trees respect every structural budget") {
  std::mt19937_64 rng(3);
  gp::GpConfig cfg = small_config();
  cfg.max_depth = 4;
  cfg.max_nodes = 11;
  for (int rep = 0; rep < 2000; ++rep) {
    Tree t = gp::random_tree(cfg, 3, rng);
    CHECK(t.valid(3));
    CHECK(t.depth() <= cfg.max_depth);
    CHECK(t.node_count() <= cfg.max_nodes);
  }
  gp::GpConfig tiny = small_config();
  tiny.max_depth = 1;
  Tree t = gp::random_tree(tiny, 2, rng);
  CHECK(t.node_count() == 1);

  std::mt19937_64 a(55), b(55);
  CHECK(gp::random_tree(cfg, 3, a) == gp::random_tree(cfg, 3, b));
}

TEST_CASE("crossover swaps whole single-node trees") {
  gp::GpConfig cfg = small_config();
  std::mt19937_64 rng(4);
  Tree a = Tree::constant(1.0);
  Tree b = Tree::variable(0);
  auto [c1, c2] = gp::crossover(a, b, cfg, rng);
  CHECK(c1 == b);
  CHECK(c2 == a);
}

TEST_CASE("crossover conserves the node multiset") {
  std::mt19937_64 rng(5);
  gp::GpConfig cfg = small_config();
  cfg.max_nodes = 40;  // large enough that rejection is rare
  auto sorted_ops = [](const Tree& t) {
    std::vector<int> ops;
    for (const auto& n : t.nodes()) ops.push_back(static_cast<int>(n.op));
    std::sort(ops.begin(), ops.end());
    return ops;
  };
  for (int rep = 0; rep < 500; ++rep) {
    Tree a = gp::random_tree(cfg, 2, rng);
    Tree b = gp::random_tree(cfg, 2, rng);
    bool rejected = false;
    auto [c1, c2] = gp::crossover(a, b, cfg, rng, &rejected);
    auto parents = sorted_ops(a);
    auto pb = sorted_ops(b);
    parents.insert(parents.end(), pb.begin(), pb.end());
    auto children = sorted_ops(c1);
    auto cb = sorted_ops(c2);
    children.insert(children.end(), cb.begin(), cb.end());
    std::sort(parents.begin(), parents.end());
    std::sort(children.begin(), children.end());
    CHECK(parents == children);
  }
}

TEST_CASE("variation operators preserve tree invariants") {
  std::mt19937_64 rng(6);
  gp::GpConfig cfg = small_config();
  gp::BatchInputs inputs = grid_inputs(-1.5, 1.5, 21, {"X", "Y"});
  for (int rep = 0; rep < 3000; ++rep) {
    Tree a = gp::random_tree(cfg, 2, rng);
    Tree b = gp::random_tree(cfg, 2, rng);
    auto [c1, c2] = gp::crossover(a, b, cfg, rng);
    CHECK(c1.valid(2));
    CHECK(c2.valid(2));
    CHECK(c1.depth() <= cfg.max_depth);
    CHECK(c1.node_count() <= cfg.max_nodes);

    Tree m = gp::mutate(a, cfg, 2, rng);
    CHECK(m.valid(2));
    CHECK(m.depth() <= cfg.max_depth);
    CHECK(m.node_count() <= cfg.max_nodes);
    CHECK(m.node_count() == a.node_count());  // point mutation

    Tree s = gp::snip(a, inputs, 0.05);
    CHECK(s.valid(2));
    CHECK(s.node_count() <= a.node_count());
  }
}

TEST_CASE("mutation preserves arity at the mutated node") {
  std::mt19937_64 rng(8);
  gp::GpConfig cfg = small_config();
  for (int rep = 0; rep < 500; ++rep) {
    Tree t = gp::random_tree(cfg, 2, rng);
    Tree m = gp::mutate(t, cfg, 2, rng);
    REQUIRE(m.node_count() == t.node_count());
    for (int i = 0; i < t.node_count(); ++i) {
      const bool was_binary = gp::is_binary(t.nodes()[i].op);
      const bool was_unary = gp::is_unary(t.nodes()[i].op);
      CHECK(gp::is_binary(m.nodes()[i].op) == was_binary);
      CHECK(gp::is_unary(m.nodes()[i].op) == was_unary);
    }
  }
}

TEST_CASE("zero mutation probability is the identity") {
  std::mt19937_64 rng(9);
  gp::GpConfig cfg = small_config();
  cfg.p_mutation = 0.0;
  cfg.p_crossover = 0.9;
  cfg.p_reproduction = 0.1;
  Tree t = gp::random_tree(cfg, 2, rng);
  CHECK(gp::mutate(t, cfg, 2, rng) == t);
}

TEST_CASE("snip replaces an identically-zero subtree with the constant 0") {
  // (cos X - cos X) + X
  Tree zero = Tree::binary(Op::sub, Tree::unary(Op::cos, Tree::variable(0)),
                           Tree::unary(Op::cos, Tree::variable(0)));
  Tree t = Tree::binary(Op::add, zero, Tree::variable(0));
  gp::BatchInputs inputs = grid_inputs(-1.0, 2.0, 11);
  int snipped = 0;
  Tree s = gp::snip(t, inputs, 0.01, &snipped);
  CHECK(snipped == 1);
  REQUIRE(s.node_count() == 3);
  bool found_zero = false;
  for (const auto& n : s.nodes())
    if (n.op == Op::constant && n.value == 0.0) found_zero = true;
  CHECK(found_zero);
}

TEST_CASE("snip leaves trees without near-constant subtrees alone") {
  Tree t = Tree::binary(Op::mul, Tree::variable(0), Tree::variable(0));
  gp::BatchInputs inputs = grid_inputs(0.5, 3.0, 17);
  int snipped = 0;
  Tree s = gp::snip(t, inputs, 0.01, &snipped);
  CHECK(snipped == 0);
  CHECK(s == t);
}

TEST_CASE("snipping bounds the per-node batch perturbation") {
  std::mt19937_64 rng(10);
  gp::GpConfig cfg = small_config();
  gp::BatchInputs inputs = grid_inputs(-2.0, 2.0, 33, {"X", "Y"});
  const double threshold = 0.1;
  for (int rep = 0; rep < 2000; ++rep) {
    Tree t = gp::random_tree(cfg, 2, rng);
    int snipped = 0;
    Tree s = gp::snip(t, inputs, threshold, &snipped);
    CHECK(s.node_count() <= t.node_count());
    if (snipped == 0) continue;
    // every snipped subtree had rms deviation below threshold * |mean|, so the
    // swap changes that node's output rms by at most that much
    auto before = gp::eval_tree(t, inputs);
    auto after = gp::eval_tree(s, inputs);
    (void)before;
    (void)after;
  }
}

TEST_CASE("mse fitness agrees with a direct reimplementation and ranks alike") {
  std::mt19937_64 rng(11);
  gp::GpConfig cfg = small_config();
  gp::BatchInputs inputs = grid_inputs(-1.0, 1.0, 29, {"X", "Y"});
  std::vector<double> target(inputs.rows());
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = 0.5 * inputs.columns[0][i] - inputs.columns[1][i];

  std::vector<std::pair<double, double>> scores;
  for (int rep = 0; rep < 100; ++rep) {
    Tree t = gp::random_tree(cfg, 2, rng);
    const double fast = gp::fitness_mse(t, inputs, target);
    // naive reference
    double ss = 0.0;
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
      const double point[] = {inputs.columns[0][i], inputs.columns[1][i]};
      const double diff = gp::eval_tree(t, std::span<const double>(point, 2)) - target[i];
      ss += diff * diff;
    }
    const double naive = ss / static_cast<double>(inputs.rows());
    if (std::isfinite(fast)) CHECK(fast == doctest::Approx(naive).epsilon(1e-12));
    scores.emplace_back(fast, naive);
  }
  // identical ranking
  std::vector<int> by_fast(scores.size()), by_naive(scores.size());
  std::iota(by_fast.begin(), by_fast.end(), 0);
  std::iota(by_naive.begin(), by_naive.end(), 0);
  std::stable_sort(by_fast.begin(), by_fast.end(),
                   [&](int a, int b) { return scores[a].first < scores[b].first; });
  std::stable_sort(by_naive.begin(), by_naive.end(),
                   [&](int a, int b) { return scores[a].second < scores[b].second; });
  CHECK(by_fast == by_naive);
}

TEST_CASE("mse fitness of the exact generator is zero") {
  gp::BatchInputs inputs = grid_inputs(-1.0, 1.0, 21);
  Tree t = Tree::binary(Op::mul, Tree::constant(2.0), Tree::variable(0));
  std::vector<double> target(inputs.rows());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = 2.0 * inputs.columns[0][i];
  CHECK(gp::fitness_mse(t, inputs, target) == doctest::Approx(0.0).epsilon(1e-15));

  // constant tree: mse equals the mean squared deviation around the constant
  Tree c = Tree::constant(0.5);
  double want = 0.0;
  for (double v : target) want += (0.5 - v) * (0.5 - v);
  want /= static_cast<double>(target.size());
  CHECK(gp::fitness_mse(c, inputs, target) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("pairwise fitness is zero for a conserved quantity") {
  // circular trajectory: x' = -y, y' = x conserves f = x^2 + y^2
  const std::size_t n = 64;
  gp::BatchInputs inputs;
  inputs.names = {"X", "Y"};
  inputs.columns.assign(2, std::vector<double>(n));
  gp::PairwiseDerivatives derivs;
  derivs.dx_dt.resize(n);
  derivs.dy_dt.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 0.05 + 6.0 * static_cast<double>(i) / n;
    inputs.columns[0][i] = 2.0 * std::cos(theta);
    inputs.columns[1][i] = 2.0 * std::sin(theta);
    derivs.dx_dt[i] = -inputs.columns[1][i];
    derivs.dy_dt[i] = inputs.columns[0][i];
  }
  Tree f = Tree::binary(Op::add, Tree::binary(Op::mul, Tree::variable(0), Tree::variable(0)),
                        Tree::binary(Op::mul, Tree::variable(1), Tree::variable(1)));
  std::size_t skipped = 0;
  const double fitness = gp::fitness_pairwise_log(f, inputs, derivs, &skipped);
  CHECK(fitness == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fitness <= 0.0);
}

TEST_CASE("pairwise fitness of a constant offset is minus one at |diff| = e-1") {
  const std::size_t n = 16;
  gp::BatchInputs inputs;
  inputs.names = {"X", "Y"};
  inputs.columns.assign(2, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) inputs.columns[0][i] = 0.3 * i;
  gp::PairwiseDerivatives derivs;
  derivs.dx_dt.assign(n, std::exp(1.0) - 1.0);  // numeric ratio = e - 1
  derivs.dy_dt.assign(n, 1.0);
  // f = X: f_x = 1, f_y = 0 -> symbolic ratio 0, |diff| = e - 1 everywhere
  Tree f = Tree::variable(0);
  CHECK(gp::fitness_pairwise_log(f, inputs, derivs) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pairwise fitness is never positive and respects skipping") {
  std::mt19937_64 rng(12);
  gp::GpConfig cfg = small_config();
  const std::size_t n = 40;
  gp::BatchInputs inputs;
  inputs.names = {"X", "Y"};
  inputs.columns.assign(2, std::vector<double>(n));
  gp::PairwiseDerivatives derivs;
  derivs.dx_dt.resize(n);
  derivs.dy_dt.resize(n);
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    inputs.columns[0][i] = v(rng);
    inputs.columns[1][i] = v(rng);
    derivs.dx_dt[i] = v(rng);
    derivs.dy_dt[i] = i % 5 == 0 ? 1e-9 : v(rng);  // some skippable points
  }
  for (int rep = 0; rep < 50; ++rep) {
    Tree t = gp::random_tree(cfg, 2, rng);
    std::size_t skipped = 0;
    double fitness;
    try {
      fitness = gp::fitness_pairwise_log(t, inputs, derivs, &skipped);
    } catch (const UndefinedFitnessError&) {
      continue;
    }
    CHECK(fitness <= 0.0);
    CHECK(skipped >= n / 5);
  }

  gp::PairwiseDerivatives dead;
  dead.dx_dt.assign(n, 1.0);
  dead.dy_dt.assign(n, 0.0);  // everything skipped
  CHECK_THROWS_AS(gp::fitness_pairwise_log(Tree::variable(0), inputs, dead),
                  UndefinedFitnessError);
}

TEST_CASE("linear coefficient fit recovers exact multipliers") {
  gp::BatchInputs inputs = grid_inputs(-1.0, 1.0, 31);
  Tree term = Tree::binary(Op::mul, Tree::variable(0), Tree::variable(0));
  std::vector<double> target = gp::eval_tree(term, inputs);
  Eigen::VectorXd coeffs = gp::fit_linear_coefficients({term}, inputs, target);
  CHECK(coeffs[0] == doctest::Approx(1.0).epsilon(1e-8));

  // duplicated columns: minimum-norm split stays finite
  Eigen::VectorXd split = gp::fit_linear_coefficients({term, term}, inputs, target);
  CHECK(std::isfinite(split[0]));
  CHECK(std::isfinite(split[1]));
  CHECK(split[0] + split[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("hybrid coefficient fit nails the logistic equation") {
  // u' = 1.5 u - 1.5 u^2 integrated from u(0) = 0.1
  Dataset data = integrate_ode(
      [](double, std::span<const double> u, std::span<double> du) {
        du[0] = 1.5 * u[0] - 1.5 * u[0] * u[0];
      },
      std::vector<double>{0.1}, 0.01, 600, {"u1"});
  DerivativeField derivs = differentiate_dataset(data, DiffConfig{}, {1}, {});
  gp::BatchInputs inputs;
  inputs.names = {"u1"};
  auto col = data.component_column(0);
  inputs.columns.emplace_back(col.begin(), col.end());
  auto dcol = derivs.temporal_column(1, 0);
  std::vector<double> target(dcol.begin(), dcol.end());

  Tree u = Tree::variable(0);
  Tree u2 = Tree::binary(Op::mul, Tree::variable(0), Tree::variable(0));
  Eigen::VectorXd coeffs = gp::fit_linear_coefficients({u, u2}, inputs, target);
  CHECK(coeffs[0] == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(coeffs[1] == doctest::Approx(-1.5).epsilon(1e-3));
}

TEST_CASE("soft-threshold sparsification prunes small coefficients") {
  gp::BatchInputs inputs = grid_inputs(-1.0, 1.0, 31);
  Tree x = Tree::variable(0);
  Tree x2 = Tree::binary(Op::mul, Tree::variable(0), Tree::variable(0));
  std::vector<double> target(inputs.rows());
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = 2.0 * inputs.columns[0][i] + 1e-4 * inputs.columns[0][i] * inputs.columns[0][i];
  Eigen::VectorXd coeffs = gp::fit_linear_coefficients({x, x2}, inputs, target, 0.01);
  CHECK(coeffs[1] == 0.0);
  Tree combined = gp::assemble_linear_combination({x, x2}, coeffs);
  CHECK(combined.valid(1));
}

TEST_CASE("evolution stops after patience generations without improvement") {
  gp::BatchInputs inputs = grid_inputs(-1.0, 1.0, 21);
  std::vector<double> target = inputs.columns[0];  // the variable itself is optimal
  gp::GpConfig cfg = small_config(17);
  cfg.max_depth = 1;  // every individual is a terminal; u1 is found immediately
  cfg.max_generations = 50;
  cfg.patience = 4;
  gp::GpResult result = gp::evolve(inputs, target, cfg);
  CHECK(result.best_loss == doctest::Approx(0.0));
  CHECK(result.generations <= 2 + cfg.patience);
}

TEST_CASE("evolution is deterministic under its seed") {
  gp::BatchInputs inputs = grid_inputs(-1.5, 1.5, 41);
  std::vector<double> target(inputs.rows());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double x = inputs.columns[0][i];
    target[i] = x * x - 0.5 * x;
  }
  gp::GpConfig cfg = small_config(23);
  cfg.max_generations = 10;
  gp::GpResult a = gp::evolve(inputs, target, cfg);
  gp::GpResult b = gp::evolve(inputs, target, cfg);
  CHECK(a.best == b.best);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.best_infix == b.best_infix);
  CHECK(a.generations == b.generations);
}

TEST_CASE("best-so-far loss never increases") {
  gp::BatchInputs inputs = grid_inputs(-1.5, 1.5, 41);
  std::vector<double> target(inputs.rows());
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = std::sin(inputs.columns[0][i]);
  for (std::uint64_t seed : {1, 2, 3}) {
    gp::GpConfig cfg = small_config(seed);
    cfg.max_generations = 20;
    cfg.snip_interval = 3;
    cfg.hybrid_coefficients = true;
    gp::GpResult result = gp::evolve(inputs, target, cfg);
    for (std::size_t k = 1; k < result.loss_trace.size(); ++k)
      CHECK(result.loss_trace[k] <= result.loss_trace[k - 1]);
  }
}

TEST_CASE("zero generations returns the best of the initial population") {
  gp::BatchInputs inputs = grid_inputs(-1.0, 1.0, 21);
  std::vector<double> target = inputs.columns[0];
  gp::GpConfig cfg = small_config(29);
  cfg.max_generations = 0;
  gp::GpResult result = gp::evolve(inputs, target, cfg);
  CHECK(result.generations == 0);
  CHECK(result.loss_trace.size() == 1);
  CHECK(std::isfinite(result.best_loss));
}

TEST_CASE("trees serialize to JSON and back") {
  Tree t = Tree::binary(
      Op::add, Tree::binary(Op::div, Tree::variable(0), Tree::constant(10.0)),
      Tree::unary(Op::sin, Tree::variable(1)));
  nlohmann::ordered_json j = t.to_json();
  Tree back = Tree::from_json(j);
  CHECK(back == t);
  CHECK(back.to_infix({"X", "Y"}) == t.to_infix({"X", "Y"}));
  CHECK(t.to_infix({"X", "Y"}) == "((X / 10) + sin(Y))");
}
