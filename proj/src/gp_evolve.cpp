#include "eqdisc/gp/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "eqdisc/errors.hpp"

namespace eqdisc::gp {

namespace {

using LossFn = std::function<double(const Tree&)>;

int tournament(const std::vector<double>& losses, int size, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, static_cast<int>(losses.size()) - 1);
  int best = d(rng);
  for (int k = 1; k < size; ++k) {
    int candidate = d(rng);
    if (losses[static_cast<std::size_t>(candidate)] <
            losses[static_cast<std::size_t>(best)] ||
        (losses[static_cast<std::size_t>(candidate)] ==
             losses[static_cast<std::size_t>(best)] &&
         candidate < best)) {
      best = candidate;
    }
  }
  return best;
}

int best_index(const std::vector<double>& losses) {
  int best = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) {
    if (losses[i] < losses[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

GpResult run(const BatchInputs& inputs, const GpConfig& cfg, const LossFn& loss_of,
             std::span<const double> hybrid_target) {
  cfg.validate();
  if (inputs.n_vars() == 0 || inputs.rows() == 0)
    throw ConfigError("evolution needs at least one variable column with data");
  const int n_vars = static_cast<int>(inputs.n_vars());
  const bool hybrid = cfg.hybrid_coefficients && cfg.fitness == FitnessMode::mse;

  std::mt19937_64 rng(cfg.seed);
  std::vector<Tree> population;
  population.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i)
    population.push_back(random_tree(cfg, n_vars, rng));

  auto evaluate = [&](const std::vector<Tree>& pop) {
    std::vector<double> losses(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) losses[i] = loss_of(pop[i]);
    return losses;
  };

  // Re-fits the linear coefficients of the strongest individuals; in mse mode
  // this can only lower their loss, so elitism stays intact.
  GpResult result;
  auto apply_hybrid = [&](std::vector<Tree>& pop, std::vector<double>& losses) {
    if (!hybrid) return;
    std::vector<int> order(pop.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return losses[static_cast<std::size_t>(a)] <
                                         losses[static_cast<std::size_t>(b)]; });
    const int count = std::min<int>(cfg.hybrid_top, static_cast<int>(pop.size()));
    for (int k = 0; k < count; ++k) {
      const int i = order[static_cast<std::size_t>(k)];
      auto terms = split_additive_terms(pop[static_cast<std::size_t>(i)]);
      if (terms.empty()) continue;
      Eigen::VectorXd coeffs;
      try {
        coeffs = fit_linear_coefficients(terms, inputs, hybrid_target, cfg.lambda_gp);
      } catch (const NumericError&) {
        continue;
      }
      Tree candidate = assemble_linear_combination(terms, coeffs);
      if (candidate.node_count() > cfg.max_nodes || candidate.depth() > cfg.max_depth)
        continue;
      const double candidate_loss = loss_of(candidate);
      if (candidate_loss < losses[static_cast<std::size_t>(i)]) {
        pop[static_cast<std::size_t>(i)] = std::move(candidate);
        losses[static_cast<std::size_t>(i)] = candidate_loss;
      }
    }
  };

  std::vector<double> losses = evaluate(population);
  apply_hybrid(population, losses);
  int best = best_index(losses);
  double best_loss = losses[static_cast<std::size_t>(best)];
  result.loss_trace.push_back(best_loss);

  int stagnant = 0;
  int generation = 0;
  while (generation < cfg.max_generations) {
    ++generation;
    std::vector<Tree> next;
    next.reserve(population.size());
    next.push_back(population[static_cast<std::size_t>(best)]);  // elite
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    while (next.size() < population.size()) {
      const double r = coin(rng);
      if (r < cfg.p_crossover) {
        const Tree& pa = population[static_cast<std::size_t>(
            tournament(losses, cfg.tournament_size, rng))];
        const Tree& pb = population[static_cast<std::size_t>(
            tournament(losses, cfg.tournament_size, rng))];
        bool rejected = false;
        auto [c1, c2] = crossover(pa, pb, cfg, rng, &rejected);
        if (rejected) ++result.crossover_rejections;
        next.push_back(std::move(c1));
        if (next.size() < population.size()) next.push_back(std::move(c2));
      } else if (r < cfg.p_crossover + cfg.p_mutation) {
        const Tree& p = population[static_cast<std::size_t>(
            tournament(losses, cfg.tournament_size, rng))];
        next.push_back(mutate(p, cfg, n_vars, rng));
      } else {
        next.push_back(population[static_cast<std::size_t>(
            tournament(losses, cfg.tournament_size, rng))]);
      }
    }

    if (cfg.snip_interval > 0 && cfg.snip_threshold > 0.0 &&
        generation % cfg.snip_interval == 0) {
      // slot 0 carries the elite; leave it untouched
      for (std::size_t i = 1; i < next.size(); ++i)
        next[i] = snip(next[i], inputs, cfg.snip_threshold);
    }

    population = std::move(next);
    losses = evaluate(population);
    apply_hybrid(population, losses);
    best = best_index(losses);

    const double new_best = losses[static_cast<std::size_t>(best)];
    const double improvement = best_loss - new_best;
    if (new_best < best_loss) best_loss = new_best;
    result.loss_trace.push_back(best_loss);
    if (improvement <= cfg.stop_xi)
      ++stagnant;
    else
      stagnant = 0;
    if (stagnant >= cfg.patience) break;
  }

  result.best = population[static_cast<std::size_t>(best)];
  result.best_loss = best_loss;
  result.generations = generation;
  result.best_infix = result.best.to_infix(inputs.names);
  result.population_size = cfg.population_size;
  double total = 0.0;
  int finite = 0;
  for (double l : losses) {
    if (std::isfinite(l)) {
      total += l;
      ++finite;
    }
  }
  result.final_mean_loss = finite > 0 ? total / finite : std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace

GpResult evolve(const BatchInputs& inputs, std::span<const double> target,
                const GpConfig& cfg) {
  if (cfg.fitness != FitnessMode::mse)
    throw ConfigError("this evolve overload runs the mse fitness");
  LossFn loss = [&](const Tree& t) { return fitness_mse(t, inputs, target); };
  return run(inputs, cfg, loss, target);
}

GpResult evolve(const BatchInputs& inputs, const PairwiseDerivatives& derivs,
                const GpConfig& cfg) {
  if (cfg.fitness != FitnessMode::pairwise_log)
    throw ConfigError("this evolve overload runs the pairwise fitness");
  LossFn loss = [&](const Tree& t) { return -fitness_pairwise_log(t, inputs, derivs); };
  return run(inputs, cfg, loss, {});
}

}  // namespace eqdisc::gp
