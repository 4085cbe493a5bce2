#pragma once

#include "eqdisc/gp/operators.hpp"

namespace eqdisc::gp {

/// Outcome of an evolution run. `loss_trace` holds the best-so-far loss per
/// generation (entry 0 is the initial population) and is non-increasing;
/// loss is the MSE in mse mode and the negated pairwise score otherwise.
struct GpResult {
  Tree best;
  double best_loss = 0.0;
  std::vector<double> loss_trace;
  int generations = 0;
  std::string best_infix;
  double final_mean_loss = 0.0;
  int population_size = 0;
  std::size_t crossover_rejections = 0;
};

/// Tournament-selected generational GP with elitism, periodic snipping and
/// (in mse mode) optional linear coefficient re-fitting of the best
/// individuals. Stops when the best loss improves by at most stop_xi for
/// `patience` consecutive generations, or at max_generations. Deterministic
/// under cfg.seed.
GpResult evolve(const BatchInputs& inputs, std::span<const double> target,
                const GpConfig& cfg);

/// Pairwise-fitness variant over a two-component trajectory.
GpResult evolve(const BatchInputs& inputs, const PairwiseDerivatives& derivs,
                const GpConfig& cfg);

}  // namespace eqdisc::gp
