#pragma once

#include <Eigen/Core>
#include <random>
#include <utility>

#include "eqdisc/gp/tree.hpp"

namespace eqdisc::gp {

enum class FitnessMode { mse, pairwise_log };

struct GpConfig {
  std::vector<Op> function_set = {Op::add, Op::sub, Op::mul, Op::div,
                                  Op::sin, Op::cos, Op::exp};
  int population_size = 300;
  int max_generations = 100;
  double p_crossover = 0.7;
  double p_mutation = 0.2;
  double p_reproduction = 0.1;
  int max_depth = 8;
  int max_nodes = 40;
  int tournament_size = 5;
  double snip_threshold = 0.02;
  int snip_interval = 10;  // 0 disables snipping
  double constant_min = -2.0;
  double constant_max = 2.0;
  double stop_xi = 0.0;  // improvement <= xi counts as stagnation
  int patience = 10;
  bool hybrid_coefficients = false;
  int hybrid_top = 10;
  double lambda_gp = 0.0;  // soft-threshold applied to fitted coefficients
  FitnessMode fitness = FitnessMode::mse;
  std::uint64_t seed = 0;

  void validate() const;
  bool has_binary() const;
  bool has_unary() const;
};

/// Ramped half-and-half generation: target depth drawn from 2..max_depth,
/// grow or full picked per call; the depth and node budgets always hold.
Tree random_tree(const GpConfig& cfg, int n_vars, std::mt19937_64& rng);

/// Swaps uniformly chosen subtrees. Offspring violating the depth or node
/// budget are discarded and the parents returned (sets *rejected).
std::pair<Tree, Tree> crossover(const Tree& a, const Tree& b, const GpConfig& cfg,
                                std::mt19937_64& rng, bool* rejected = nullptr);

/// Point mutation: a function node swaps to a same-arity operator, a terminal
/// becomes a fresh variable or constant. With p_mutation <= 0 the input is
/// returned unchanged.
Tree mutate(const Tree& tree, const GpConfig& cfg, int n_vars, std::mt19937_64& rng);

/// Replaces every maximal subtree whose batch coefficient of variation falls
/// below the threshold with the constant equal to its batch mean.
Tree snip(const Tree& tree, const BatchInputs& inputs, double snip_threshold,
          int* snipped = nullptr);

/// Mean squared error against a precomputed target column; +inf when the
/// evaluation is non-finite.
double fitness_mse(const Tree& tree, const BatchInputs& inputs,
                   std::span<const double> target);

/// Precomputed temporal derivatives of a two-component trajectory.
struct PairwiseDerivatives {
  std::vector<double> dx_dt;
  std::vector<double> dy_dt;
};

/// Schmidt-style score: -mean log(1 + |dx/dt / dy/dt - implicit ratio|) where
/// the implicit ratio comes from symbolic partials of the candidate. Points
/// with |dy/dt| < 1e-8 are skipped and counted; throws UndefinedFitnessError
/// when nothing remains. Always <= 0; 0 is a perfect score.
double fitness_pairwise_log(const Tree& tree, const BatchInputs& inputs,
                            const PairwiseDerivatives& derivs,
                            std::size_t* skipped = nullptr);

/// Top-level additive terms of a tree (the summands of its +/- spine).
std::vector<Tree> split_additive_terms(const Tree& tree);

/// Least squares of the target on the evaluated term columns (minimum-norm
/// under rank deficiency), then optional soft-threshold sparsification.
Eigen::VectorXd fit_linear_coefficients(const std::vector<Tree>& terms,
                                        const BatchInputs& inputs,
                                        std::span<const double> target,
                                        double lambda_gp = 0.0);

/// sum_k c_k * term_k with zero-coefficient terms dropped.
Tree assemble_linear_combination(const std::vector<Tree>& terms,
                                 const Eigen::VectorXd& coefficients);

}  // namespace eqdisc::gp
