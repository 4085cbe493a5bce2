#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "eqdisc/library.hpp"

namespace eqdisc {

enum class Sr3Penalty { l0, l1 };

struct SolverConfig {
  double kappa = 0.0;      // hard threshold
  double lambda = 0.0;     // ridge weight
  double nu = 1.0;         // SR3 relaxation
  int max_iters = 10;      // K
  double tolerance = 1e-6;
  Sr3Penalty sr3_penalty = Sr3Penalty::l0;

  void validate() const;
};

/// The discovered equation: D x N coefficients plus the active-term mask.
/// Values are exactly 0 wherever support is false.
struct CoefficientMatrix {
  Eigen::MatrixXd values;                          // D x N
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support;  // D x N
  std::vector<std::string> descriptors;

  // fit diagnostics
  std::vector<double> residual_ss;  // per component
  int iterations = 0;
  bool empty_model = false;    // some component lost every term
  bool rank_deficient = false; // a least-squares refit hit rank deficiency
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> support_history;

  Eigen::Index num_terms() const { return values.rows(); }
  Eigen::Index num_components() const { return values.cols(); }
  int active_count() const { return static_cast<int>(support.count()); }
};

/// Ridge (or, at lambda = 0, minimum-norm least-squares) solve with full
/// support; the shared initialization of every thresholding solver.
CoefficientMatrix least_squares_ridge(const DesignMatrix& F, const ResponseMatrix& U,
                                      double lambda);

/// Sequential threshold least squares: ridge init, then repeatedly zero
/// entries with |m| < kappa and re-fit the survivors unpenalized, per
/// component. Stops after max_iters passes or when the support stops
/// changing. The active set only ever shrinks.
CoefficientMatrix fit_stls(const DesignMatrix& F, const ResponseMatrix& U,
                           const SolverConfig& cfg);

/// Same iteration with ridge re-fits; reduces to fit_stls at lambda = 0.
CoefficientMatrix fit_stridge(const DesignMatrix& F, const ResponseMatrix& U,
                              const SolverConfig& cfg);

enum class Grouping { by_space, by_time };

/// Row-index partitions of an (S x T) grid, one per group.
std::vector<std::vector<Eigen::Index>> group_rows(std::size_t S, std::size_t T,
                                                 Grouping grouping);

/// STRidge across groups sharing one support: a term dies in every group when
/// the Euclidean norm of its per-group coefficients falls below kappa, while
/// surviving values stay group-specific.
struct GroupFit {
  std::vector<CoefficientMatrix> groups;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support;  // shared D x N
  int iterations = 0;
};
GroupFit fit_group_stridge(const std::vector<DesignMatrix>& F_groups,
                           const std::vector<ResponseMatrix>& U_groups,
                           const SolverConfig& cfg, Grouping grouping);

/// Sparse relaxed regularized regression. Alternates a relaxed ridge solve
/// for M with the penalty prox for W (hard threshold at sqrt(2*lambda*nu) for
/// l0, soft threshold by lambda*nu for l1) until ||W_k - W_{k-1}||/nu drops
/// below tolerance or max_iters passes. Support comes from W; the reported M
/// is an unpenalized re-fit on that support.
struct Sr3Result {
  CoefficientMatrix coefficients;  // re-fit M restricted to W's support
  CoefficientMatrix relaxed;       // W
  std::vector<double> objective_trace;
  int iterations = 0;
};
Sr3Result fit_sr3(const DesignMatrix& F, const ResponseMatrix& U, const SolverConfig& cfg);

struct HyperparamPoint {
  double kappa = 0.0;
  double lambda = 0.0;
};

struct HyperparamResult {
  SolverConfig config;
  CoefficientMatrix fit;  // winner re-fit on all rows
  std::size_t winner = 0;
  std::vector<double> scores;
};

/// Grid search over (kappa, lambda) for STRidge: rows split by seed into
/// train/validation, candidates scored by validation SSE plus
/// 1e-3 * var(U_val) per active term, ties broken by grid order.
HyperparamResult hyperparam_search(const DesignMatrix& F, const ResponseMatrix& U,
                                   const SolverConfig& base,
                                   const std::vector<HyperparamPoint>& grid,
                                   double holdout_fraction, std::uint64_t seed);

/// Maps coefficients solved on a normalized library back to original units
/// (values divided by the recorded column norms; support unchanged).
CoefficientMatrix denormalize_coefficients(const CoefficientMatrix& M,
                                           const std::vector<double>& norms);

}  // namespace eqdisc
