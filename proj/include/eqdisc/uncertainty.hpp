#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "eqdisc/solvers.hpp"

namespace eqdisc {

enum class BootstrapMode { rows, columns };

/// Bootstrap ensemble over STRidge fits. Inclusion of term (d, n) is the
/// exact fraction of members whose estimate is nonzero; quantiles are taken
/// over all q member estimates (zeros included).
struct EnsembleResult {
  std::vector<Eigen::MatrixXd> member_coefficients;  // q matrices, D x N
  Eigen::MatrixXd inclusion_probability;             // D x N
  CoefficientMatrix aggregated;  // conditional means, thresholded at p0
  Eigen::MatrixXd q05, q50, q95;
  double p0 = 0.5;
};

/// rows mode resamples rows with replacement to full size; columns mode keeps
/// ceil(column_keep * D) library columns per member (sampled without
/// replacement), counting omitted columns as not included. Member seeds
/// derive from `seed`, so results do not depend on evaluation order.
EnsembleResult bootstrap_ensemble(const DesignMatrix& F, const ResponseMatrix& U,
                                  const SolverConfig& cfg, int q, BootstrapMode mode,
                                  double column_keep, std::uint64_t seed, double p0 = 0.5);

/// Spike-and-slab (SSVS) sampler settings. The coefficient prior is the
/// conjugate scale mixture m_d | sigma^2 ~ N(0, sigma^2 * v) with v = v1 when
/// the term is in the model and v = v0 otherwise, sigma^2 ~ IG(a_s, b_s),
/// and independent Bernoulli(prior_inclusion) indicators.
struct SsvsConfig {
  int n_samples = 5000;
  int n_burnin = 1000;
  double spike_var = 1e-3;       // v0
  double slab_var = 1.0;         // v1 >= v0 (equality is the null control)
  double prior_inclusion = 0.5;  // in (0, 1)
  double a_s = 2.0;              // noise prior shape
  double b_s = 2.0;              // noise prior scale
  std::uint64_t seed = 0;
  bool init_all_included = true;  // start the chain at gamma = 1 (or 0)
  double init_sigma2 = 1.0;

  void validate() const;
};

/// Posterior over one response column.
struct PosteriorResult {
  Eigen::MatrixXd coefficient_draws;              // retained x D
  std::vector<std::vector<std::uint8_t>> gamma_draws;  // retained x D
  std::vector<double> sigma2_draws;
  Eigen::VectorXd inclusion_probability;  // D
  Eigen::VectorXd inclusion_se;           // batch-means MC standard error
  Eigen::VectorXd mean_given_included;    // 0 when never included
  Eigen::VectorXd sd_given_included;
  std::vector<int> included_count;
};

/// Gibbs sampler sweeping gamma | m, sigma2, then m | gamma, sigma2, then
/// sigma2 | m, gamma. Runs one component column; components are independent.
PosteriorResult ssvs_gibbs(const DesignMatrix& F, const Eigen::VectorXd& u,
                           const SsvsConfig& cfg);

/// Exact posterior inclusion probabilities for the same model by summing the
/// analytic marginal likelihood over all 2^D support patterns (D <= 12).
/// Serves as the Gibbs sampler's oracle.
Eigen::VectorXd enumerate_model_posterior(const DesignMatrix& F, const Eigen::VectorXd& u,
                                          const SsvsConfig& cfg);

}  // namespace eqdisc
