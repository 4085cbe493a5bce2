#include "eqdisc/solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

void check_finite(const Eigen::MatrixXd& F, const Eigen::MatrixXd& U) {
  if (!F.allFinite() || !U.allFinite())
    throw NumericError("solver inputs contain non-finite values");
}

// Alg. 1/2 keep their initialization ridge weight implicit; when the solver
// itself runs unpenalized we stabilize the init with a scale-aware epsilon.
double init_lambda(const Eigen::MatrixXd& gram, double solver_lambda) {
  if (solver_lambda > 0.0) return solver_lambda;
  const double trace = gram.trace();
  if (!(trace > 0.0)) throw NumericError("design matrix is identically zero");
  return 1e-6 * trace / static_cast<double>(gram.rows());
}

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs,
                            double lambda) {
  Eigen::MatrixXd lhs = gram;
  lhs.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  if (ldlt.info() != Eigen::Success)
    throw NumericError("ridge system factorization failed");
  return ldlt.solve(rhs);
}

// Per-component re-fit on the active columns. Ridge uses the Gram matrix;
// the unpenalized path decomposes the actual columns (rank-revealing, falls
// back to the minimum-norm solution).
class RefitEngine {
 public:
  RefitEngine(const Eigen::MatrixXd& F, const Eigen::MatrixXd& U)
      : F_(F), U_(U), gram_(F.transpose() * F), rhs_(F.transpose() * U) {}

  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& rhs() const { return rhs_; }

  Eigen::VectorXd refit(const std::vector<Eigen::Index>& idx, Eigen::Index component,
                        double lambda, bool* rank_deficient) const {
    if (lambda > 0.0) {
      Eigen::MatrixXd sub = gram_(idx, idx);
      sub.diagonal().array() += lambda;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
      if (ldlt.info() != Eigen::Success)
        throw NumericError("ridge refit factorization failed");
      return ldlt.solve(rhs_(idx, component));
    }
    Eigen::MatrixXd cols = F_(Eigen::all, idx);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(cols);
    if (cod.rank() < static_cast<Eigen::Index>(idx.size()) && rank_deficient)
      *rank_deficient = true;
    return cod.solve(U_.col(component));
  }

 private:
  const Eigen::MatrixXd& F_;
  const Eigen::MatrixXd& U_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd rhs_;
};

std::vector<Eigen::Index> active_indices(const BoolArray& support, Eigen::Index component) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index d = 0; d < support.rows(); ++d) {
    if (support(d, component)) idx.push_back(d);
  }
  return idx;
}

void finalize(CoefficientMatrix& out, const Eigen::MatrixXd& F, const Eigen::MatrixXd& U) {
  out.values = out.support.select(out.values, 0.0);
  out.residual_ss.clear();
  for (Eigen::Index n = 0; n < U.cols(); ++n)
    out.residual_ss.push_back((U.col(n) - F * out.values.col(n)).squaredNorm());
}

// Shared Alg. 1 / Alg. 2 iteration; refit_lambda = 0 gives STLS.
CoefficientMatrix threshold_iterate(const DesignMatrix& F, const ResponseMatrix& U,
                                    const SolverConfig& cfg, double refit_lambda) {
  cfg.validate();
  check_finite(F.matrix, U.matrix);
  const Eigen::Index D = F.cols();
  const Eigen::Index N = U.matrix.cols();
  if (U.matrix.rows() != F.rows())
    throw SchemaError("design and response row counts differ");

  CoefficientMatrix out;
  out.descriptors = F.descriptors;
  RefitEngine engine(F.matrix, U.matrix);
  out.values = ridge_solve(engine.gram(), engine.rhs(), init_lambda(engine.gram(), refit_lambda));
  out.support = BoolArray::Constant(D, N, true);
  out.support_history.push_back(out.support);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    BoolArray keep = out.support && !(out.values.array().abs() < cfg.kappa);
    if (k > 1 && (keep == out.support).all()) break;
    out.support = keep;
    out.support_history.push_back(out.support);
    out.iterations = k;
    for (Eigen::Index n = 0; n < N; ++n) {
      auto idx = active_indices(out.support, n);
      out.values.col(n).setZero();
      if (idx.empty()) {
        out.empty_model = true;
        continue;
      }
      Eigen::VectorXd coeffs = engine.refit(idx, n, refit_lambda, &out.rank_deficient);
      for (std::size_t i = 0; i < idx.size(); ++i) out.values(idx[i], n) = coeffs[i];
    }
  }

  finalize(out, F.matrix, U.matrix);
  return out;
}

double population_variance(const Eigen::MatrixXd& m) {
  const double mean = m.mean();
  return (m.array() - mean).square().sum() / static_cast<double>(m.size());
}

}  // namespace

void SolverConfig::validate() const {
  if (kappa < 0.0) throw ConfigError("kappa must be non-negative");
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (tolerance < 0.0) throw ConfigError("tolerance must be non-negative");
}

CoefficientMatrix least_squares_ridge(const DesignMatrix& F, const ResponseMatrix& U,
                                      double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  check_finite(F.matrix, U.matrix);
  if (U.matrix.rows() != F.rows())
    throw SchemaError("design and response row counts differ");

  CoefficientMatrix out;
  out.descriptors = F.descriptors;
  out.support = BoolArray::Constant(F.cols(), U.matrix.cols(), true);
  out.iterations = 1;
  if (lambda > 0.0) {
    Eigen::MatrixXd gram = F.matrix.transpose() * F.matrix;
    out.values = ridge_solve(gram, F.matrix.transpose() * U.matrix, lambda);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(F.matrix);
    out.rank_deficient = cod.rank() < F.cols();
    out.values = cod.solve(U.matrix);
  }
  finalize(out, F.matrix, U.matrix);
  return out;
}

CoefficientMatrix fit_stls(const DesignMatrix& F, const ResponseMatrix& U,
                           const SolverConfig& cfg) {
  return threshold_iterate(F, U, cfg, 0.0);
}

CoefficientMatrix fit_stridge(const DesignMatrix& F, const ResponseMatrix& U,
                              const SolverConfig& cfg) {
  return threshold_iterate(F, U, cfg, cfg.lambda);
}

std::vector<std::vector<Eigen::Index>> group_rows(std::size_t S, std::size_t T,
                                                 Grouping grouping) {
  std::vector<std::vector<Eigen::Index>> groups;
  if (grouping == Grouping::by_space) {
    groups.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      groups[s].reserve(T);
      for (std::size_t t = 0; t < T; ++t)
        groups[s].push_back(static_cast<Eigen::Index>(s * T + t));
    }
  } else {
    groups.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      groups[t].reserve(S);
      for (std::size_t s = 0; s < S; ++s)
        groups[t].push_back(static_cast<Eigen::Index>(s * T + t));
    }
  }
  return groups;
}

GroupFit fit_group_stridge(const std::vector<DesignMatrix>& F_groups,
                           const std::vector<ResponseMatrix>& U_groups,
                           const SolverConfig& cfg, Grouping) {
  cfg.validate();
  if (F_groups.empty() || F_groups.size() != U_groups.size())
    throw SchemaError("group fit needs matching non-empty design/response lists");
  const std::size_t n_groups = F_groups.size();
  const Eigen::Index D = F_groups[0].cols();
  const Eigen::Index N = U_groups[0].matrix.cols();
  for (std::size_t g = 0; g < n_groups; ++g) {
    if (F_groups[g].descriptors != F_groups[0].descriptors)
      throw SchemaError("group " + std::to_string(g) + " has different descriptors");
    if (U_groups[g].matrix.cols() != N || U_groups[g].matrix.rows() != F_groups[g].rows())
      throw SchemaError("group " + std::to_string(g) + " has inconsistent shapes");
    check_finite(F_groups[g].matrix, U_groups[g].matrix);
  }

  std::vector<RefitEngine> engines;
  engines.reserve(n_groups);
  std::vector<Eigen::MatrixXd> values;
  for (std::size_t g = 0; g < n_groups; ++g) {
    engines.emplace_back(F_groups[g].matrix, U_groups[g].matrix);
    values.push_back(ridge_solve(engines[g].gram(), engines[g].rhs(),
                                 init_lambda(engines[g].gram(), cfg.lambda)));
  }

  GroupFit fit;
  fit.support = BoolArray::Constant(D, N, true);
  bool empty_model = false;
  bool rank_deficient = false;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    // Group thresholding: a term survives only on the Euclidean norm of its
    // coefficients across groups.
    Eigen::MatrixXd norm_sq = Eigen::MatrixXd::Zero(D, N);
    for (const auto& v : values) norm_sq.array() += v.array().square();
    BoolArray keep = fit.support && !(norm_sq.array().sqrt() < cfg.kappa);
    if (k > 1 && (keep == fit.support).all()) break;
    fit.support = keep;
    fit.iterations = k;
    for (Eigen::Index n = 0; n < N; ++n) {
      auto idx = active_indices(fit.support, n);
      for (std::size_t g = 0; g < n_groups; ++g) {
        values[g].col(n).setZero();
        if (idx.empty()) {
          empty_model = true;
          continue;
        }
        Eigen::VectorXd coeffs = engines[g].refit(idx, n, cfg.lambda, &rank_deficient);
        for (std::size_t i = 0; i < idx.size(); ++i) values[g](idx[i], n) = coeffs[i];
      }
    }
  }

  for (std::size_t g = 0; g < n_groups; ++g) {
    CoefficientMatrix m;
    m.descriptors = F_groups[g].descriptors;
    m.values = std::move(values[g]);
    m.support = fit.support;
    m.iterations = fit.iterations;
    m.empty_model = empty_model;
    m.rank_deficient = rank_deficient;
    finalize(m, F_groups[g].matrix, U_groups[g].matrix);
    fit.groups.push_back(std::move(m));
  }
  return fit;
}

Sr3Result fit_sr3(const DesignMatrix& F, const ResponseMatrix& U, const SolverConfig& cfg) {
  cfg.validate();
  check_finite(F.matrix, U.matrix);
  if (U.matrix.rows() != F.rows())
    throw SchemaError("design and response row counts differ");
  const Eigen::Index D = F.cols();
  const Eigen::Index N = U.matrix.cols();

  RefitEngine engine(F.matrix, U.matrix);
  Eigen::MatrixXd m =
      ridge_solve(engine.gram(), engine.rhs(), init_lambda(engine.gram(), cfg.lambda));
  Eigen::MatrixXd w = m;

  Eigen::MatrixXd lhs = engine.gram();
  lhs.diagonal().array() += 1.0 / cfg.nu;
  Eigen::LDLT<Eigen::MatrixXd> relaxed_solver(lhs);
  if (relaxed_solver.info() != Eigen::Success)
    throw NumericError("SR3 relaxed system factorization failed");

  const double tau = cfg.sr3_penalty == Sr3Penalty::l0
                         ? std::sqrt(2.0 * cfg.lambda * cfg.nu)
                         : cfg.lambda * cfg.nu;
  auto prox = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    if (cfg.sr3_penalty == Sr3Penalty::l0)
      return (x.array().abs() < tau).select(0.0, x);
    return (x.array().sign() * (x.array().abs() - tau).max(0.0)).matrix();
  };
  auto penalty = [&](const Eigen::MatrixXd& x) -> double {
    if (cfg.sr3_penalty == Sr3Penalty::l0)
      return static_cast<double>((x.array() != 0.0).count());
    return x.array().abs().sum();
  };

  Sr3Result result;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    m = relaxed_solver.solve(engine.rhs() + w / cfg.nu);
    Eigen::MatrixXd w_prev = w;
    w = prox(m);
    const double err = (w - w_prev).norm() / cfg.nu;
    const double objective = 0.5 * (U.matrix - F.matrix * m).squaredNorm() +
                             cfg.lambda * penalty(w) +
                             (m - w).squaredNorm() / (2.0 * cfg.nu);
    result.objective_trace.push_back(objective);
    result.iterations = k;
    if (err <= cfg.tolerance) break;
  }

  CoefficientMatrix relaxed;
  relaxed.descriptors = F.descriptors;
  relaxed.values = w;
  relaxed.support = w.array() != 0.0;
  relaxed.iterations = result.iterations;
  finalize(relaxed, F.matrix, U.matrix);

  CoefficientMatrix refit;
  refit.descriptors = F.descriptors;
  refit.support = relaxed.support;
  refit.values = Eigen::MatrixXd::Zero(D, N);
  refit.iterations = result.iterations;
  for (Eigen::Index n = 0; n < N; ++n) {
    auto idx = active_indices(refit.support, n);
    if (idx.empty()) {
      refit.empty_model = true;
      continue;
    }
    Eigen::VectorXd coeffs = engine.refit(idx, n, 0.0, &refit.rank_deficient);
    for (std::size_t i = 0; i < idx.size(); ++i) refit.values(idx[i], n) = coeffs[i];
  }
  finalize(refit, F.matrix, U.matrix);

  result.coefficients = std::move(refit);
  result.relaxed = std::move(relaxed);
  return result;
}

HyperparamResult hyperparam_search(const DesignMatrix& F, const ResponseMatrix& U,
                                   const SolverConfig& base,
                                   const std::vector<HyperparamPoint>& grid,
                                   double holdout_fraction, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("hyperparameter grid is empty");
  if (!(holdout_fraction > 0.0) || holdout_fraction > 0.5)
    throw ConfigError("holdout fraction must lie in (0, 0.5]");
  check_finite(F.matrix, U.matrix);

  const Eigen::Index rows = F.rows();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(rows));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t n_val =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                   holdout_fraction * static_cast<double>(rows))));
  std::vector<Eigen::Index> val(perm.begin(), perm.begin() + n_val);
  std::vector<Eigen::Index> train(perm.begin() + n_val, perm.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  if (train.empty()) throw ConfigError("holdout leaves no training rows");

  DesignMatrix F_train{F.matrix(train, Eigen::all), F.descriptors, {}, F.normalized};
  ResponseMatrix U_train{U.matrix(train, Eigen::all), U.order, U.lhs};
  Eigen::MatrixXd F_val = F.matrix(val, Eigen::all);
  Eigen::MatrixXd U_val = U.matrix(val, Eigen::all);
  const double term_cost = 1e-3 * population_variance(U_val);

  HyperparamResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SolverConfig candidate = base;
    candidate.kappa = grid[i].kappa;
    candidate.lambda = grid[i].lambda;
    CoefficientMatrix fit = fit_stridge(F_train, U_train, candidate);
    const double sse = (U_val - F_val * fit.values).squaredNorm();
    const double score = sse + term_cost * static_cast<double>(fit.active_count());
    result.scores.push_back(score);
    if (score < best) {
      best = score;
      result.winner = i;
    }
  }

  result.config = base;
  result.config.kappa = grid[result.winner].kappa;
  result.config.lambda = grid[result.winner].lambda;
  result.fit = fit_stridge(F, U, result.config);
  return result;
}

CoefficientMatrix denormalize_coefficients(const CoefficientMatrix& M,
                                           const std::vector<double>& norms) {
  if (norms.empty()) throw StateError("no recorded column norms to denormalize with");
  if (norms.size() != static_cast<std::size_t>(M.values.rows()))
    throw StateError("recorded norms do not match the coefficient rows");
  CoefficientMatrix out = M;
  for (Eigen::Index d = 0; d < out.values.rows(); ++d) {
    for (Eigen::Index n = 0; n < out.values.cols(); ++n)
      out.values(d, n) = out.values(d, n) / norms[static_cast<std::size_t>(d)];
  }
  out.values = out.support.select(out.values, 0.0);
  return out;
}

}  // namespace eqdisc
