#include "eqdisc/uncertainty.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "eqdisc/errors.hpp"
#include "eqdisc/util.hpp"

namespace eqdisc {

namespace {

double interpolated_quantile(std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

EnsembleResult bootstrap_ensemble(const DesignMatrix& F, const ResponseMatrix& U,
                                  const SolverConfig& cfg, int q, BootstrapMode mode,
                                  double column_keep, std::uint64_t seed, double p0) {
  cfg.validate();
  if (q < 1) throw ConfigError("ensemble needs at least one member");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("p0 must lie in [0, 1]");
  const Eigen::Index rows = F.rows();
  const Eigen::Index D = F.cols();
  const Eigen::Index N = U.matrix.cols();

  Eigen::Index keep_cols = D;
  if (mode == BootstrapMode::columns) {
    if (!(column_keep > 0.0 && column_keep <= 1.0))
      throw ConfigError("column_keep must lie in (0, 1]");
    keep_cols = static_cast<Eigen::Index>(
        std::ceil(column_keep * static_cast<double>(D)));
    if (keep_cols < 1) throw ConfigError("column subset must hold at least one column");
  }

  EnsembleResult result;
  result.p0 = p0;
  result.member_coefficients.reserve(static_cast<std::size_t>(q));

  for (int member = 0; member < q; ++member) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(member)));
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(D, N);
    if (mode == BootstrapMode::rows) {
      std::uniform_int_distribution<Eigen::Index> pick(0, rows - 1);
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(rows));
      for (auto& i : idx) i = pick(rng);
      DesignMatrix Fb{F.matrix(idx, Eigen::all), F.descriptors, {}, F.normalized};
      ResponseMatrix Ub{U.matrix(idx, Eigen::all), U.order, U.lhs};
      coeffs = fit_stridge(Fb, Ub, cfg).values;
    } else {
      std::vector<Eigen::Index> cols(static_cast<std::size_t>(D));
      std::iota(cols.begin(), cols.end(), 0);
      std::shuffle(cols.begin(), cols.end(), rng);
      cols.resize(static_cast<std::size_t>(keep_cols));
      std::sort(cols.begin(), cols.end());
      std::vector<std::string> descriptors;
      for (Eigen::Index c : cols) descriptors.push_back(F.descriptors[static_cast<std::size_t>(c)]);
      DesignMatrix Fb{F.matrix(Eigen::all, cols), std::move(descriptors), {}, F.normalized};
      CoefficientMatrix fit = fit_stridge(Fb, U, cfg);
      for (std::size_t i = 0; i < cols.size(); ++i)
        coeffs.row(cols[i]) = fit.values.row(static_cast<Eigen::Index>(i));
    }
    result.member_coefficients.push_back(std::move(coeffs));
  }

  result.inclusion_probability = Eigen::MatrixXd::Zero(D, N);
  result.q05 = Eigen::MatrixXd::Zero(D, N);
  result.q50 = Eigen::MatrixXd::Zero(D, N);
  result.q95 = Eigen::MatrixXd::Zero(D, N);
  result.aggregated.descriptors = F.descriptors;
  result.aggregated.values = Eigen::MatrixXd::Zero(D, N);
  result.aggregated.support =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(D, N, false);

  std::vector<double> samples(static_cast<std::size_t>(q));
  for (Eigen::Index d = 0; d < D; ++d) {
    for (Eigen::Index n = 0; n < N; ++n) {
      int included = 0;
      double included_sum = 0.0;
      for (int m = 0; m < q; ++m) {
        const double v = result.member_coefficients[static_cast<std::size_t>(m)](d, n);
        samples[static_cast<std::size_t>(m)] = v;
        if (v != 0.0) {
          ++included;
          included_sum += v;
        }
      }
      const double inclusion = static_cast<double>(included) / static_cast<double>(q);
      result.inclusion_probability(d, n) = inclusion;
      std::sort(samples.begin(), samples.end());
      result.q05(d, n) = interpolated_quantile(samples, 0.05);
      result.q50(d, n) = interpolated_quantile(samples, 0.50);
      result.q95(d, n) = interpolated_quantile(samples, 0.95);
      if (included > 0 && inclusion >= p0) {
        result.aggregated.support(d, n) = true;
        result.aggregated.values(d, n) = included_sum / static_cast<double>(included);
      }
    }
  }
  return result;
}

void SsvsConfig::validate() const {
  if (n_samples < 1) throw ConfigError("n_samples must be positive");
  if (n_burnin < 0) throw ConfigError("n_burnin must be non-negative");
  if (!(spike_var > 0.0)) throw ConfigError("spike variance must be positive");
  if (!(slab_var >= spike_var))
    throw ConfigError("slab variance must be at least the spike variance");
  if (!(prior_inclusion > 0.0 && prior_inclusion < 1.0))
    throw ConfigError("prior inclusion must lie in (0, 1)");
  if (!(a_s > 0.0) || !(b_s > 0.0)) throw ConfigError("noise prior must be positive");
  if (!(init_sigma2 > 0.0)) throw ConfigError("initial sigma^2 must be positive");
}

PosteriorResult ssvs_gibbs(const DesignMatrix& F, const Eigen::VectorXd& u,
                           const SsvsConfig& cfg) {
  cfg.validate();
  if (u.size() != F.rows()) throw SchemaError("response length does not match the design");
  if (!F.matrix.allFinite() || !u.allFinite())
    throw NumericError("sampler inputs contain non-finite values");

  const Eigen::Index n = F.rows();
  const Eigen::Index D = F.cols();
  const Eigen::MatrixXd gram = F.matrix.transpose() * F.matrix;
  const Eigen::VectorXd fu = F.matrix.transpose() * u;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::uint8_t> gamma(static_cast<std::size_t>(D),
                                  cfg.init_all_included ? 1 : 0);
  double sigma2 = cfg.init_sigma2;
  Eigen::VectorXd m(D);

  const double logit_prior = std::log(cfg.prior_inclusion / (1.0 - cfg.prior_inclusion));
  const double log_var_ratio = std::log(cfg.slab_var / cfg.spike_var);
  const double inv_diff = 1.0 / cfg.slab_var - 1.0 / cfg.spike_var;  // <= 0

  auto draw_m = [&](bool sample) {
    Eigen::MatrixXd lhs = gram;
    for (Eigen::Index d = 0; d < D; ++d)
      lhs(d, d) += 1.0 / (gamma[static_cast<std::size_t>(d)] ? cfg.slab_var : cfg.spike_var);
    Eigen::LLT<Eigen::MatrixXd> llt(lhs);
    if (llt.info() != Eigen::Success)
      throw NumericError("SSVS conditional covariance is not positive definite (D=" +
                         std::to_string(D) + ")");
    m = llt.solve(fu);
    if (sample) {
      Eigen::VectorXd z(D);
      for (Eigen::Index d = 0; d < D; ++d) z[d] = normal(rng);
      // m ~ N(mean, sigma2 * (G + V^-1)^-1): add sigma * L^-T z.
      m += std::sqrt(sigma2) * llt.matrixU().solve(z);
    }
  };
  draw_m(false);  // deterministic start at the conditional mean

  const int total = cfg.n_burnin + cfg.n_samples;
  PosteriorResult result;
  result.coefficient_draws.resize(cfg.n_samples, D);
  result.gamma_draws.reserve(static_cast<std::size_t>(cfg.n_samples));
  result.sigma2_draws.reserve(static_cast<std::size_t>(cfg.n_samples));

  for (int it = 0; it < total; ++it) {
    // (a) indicators given coefficients and noise
    for (Eigen::Index d = 0; d < D; ++d) {
      const double quad = m[d] * m[d] / (2.0 * sigma2);
      const double log_odds = logit_prior - 0.5 * log_var_ratio - quad * inv_diff;
      const double p1 = 1.0 / (1.0 + std::exp(-log_odds));
      gamma[static_cast<std::size_t>(d)] = unif(rng) < p1 ? 1 : 0;
    }
    // (b) coefficients given indicators and noise
    draw_m(true);
    // (c) noise given coefficients and indicators
    double prior_quad = 0.0;
    for (Eigen::Index d = 0; d < D; ++d)
      prior_quad +=
          m[d] * m[d] / (gamma[static_cast<std::size_t>(d)] ? cfg.slab_var : cfg.spike_var);
    const double rss = (u - F.matrix * m).squaredNorm();
    const double shape = cfg.a_s + 0.5 * static_cast<double>(n + D);
    const double rate = cfg.b_s + 0.5 * (rss + prior_quad);
    std::gamma_distribution<double> gamma_draw(shape, 1.0 / rate);
    sigma2 = 1.0 / gamma_draw(rng);

    const int kept = it - cfg.n_burnin;
    if (kept >= 0) {
      result.coefficient_draws.row(kept) = m.transpose();
      result.gamma_draws.push_back(gamma);
      result.sigma2_draws.push_back(sigma2);
    }
  }

  result.inclusion_probability = Eigen::VectorXd::Zero(D);
  result.mean_given_included = Eigen::VectorXd::Zero(D);
  result.sd_given_included = Eigen::VectorXd::Zero(D);
  result.included_count.assign(static_cast<std::size_t>(D), 0);
  for (int k = 0; k < cfg.n_samples; ++k) {
    for (Eigen::Index d = 0; d < D; ++d) {
      if (result.gamma_draws[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)]) {
        ++result.included_count[static_cast<std::size_t>(d)];
        result.mean_given_included[d] += result.coefficient_draws(k, d);
      }
    }
  }
  for (Eigen::Index d = 0; d < D; ++d) {
    const int c = result.included_count[static_cast<std::size_t>(d)];
    result.inclusion_probability[d] =
        static_cast<double>(c) / static_cast<double>(cfg.n_samples);
    if (c > 0) result.mean_given_included[d] /= static_cast<double>(c);
  }
  for (int k = 0; k < cfg.n_samples; ++k) {
    for (Eigen::Index d = 0; d < D; ++d) {
      if (result.gamma_draws[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)]) {
        const double dev = result.coefficient_draws(k, d) - result.mean_given_included[d];
        result.sd_given_included[d] += dev * dev;
      }
    }
  }
  for (Eigen::Index d = 0; d < D; ++d) {
    const int c = result.included_count[static_cast<std::size_t>(d)];
    result.sd_given_included[d] =
        c > 1 ? std::sqrt(result.sd_given_included[d] / static_cast<double>(c - 1)) : 0.0;
  }

  // Batch-means standard error of the inclusion estimates.
  const int batches = std::min(20, cfg.n_samples);
  result.inclusion_se = Eigen::VectorXd::Zero(D);
  if (batches >= 2) {
    const int per = cfg.n_samples / batches;
    for (Eigen::Index d = 0; d < D; ++d) {
      std::vector<double> means;
      for (int b = 0; b < batches; ++b) {
        int cnt = 0;
        for (int k = b * per; k < (b + 1) * per; ++k)
          cnt += result.gamma_draws[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)];
        means.push_back(static_cast<double>(cnt) / static_cast<double>(per));
      }
      double mean = 0.0;
      for (double v : means) mean += v;
      mean /= static_cast<double>(batches);
      double var = 0.0;
      for (double v : means) var += (v - mean) * (v - mean);
      var /= static_cast<double>(batches - 1);
      result.inclusion_se[d] = std::sqrt(var / static_cast<double>(batches));
    }
  }
  return result;
}

Eigen::VectorXd enumerate_model_posterior(const DesignMatrix& F, const Eigen::VectorXd& u,
                                          const SsvsConfig& cfg) {
  cfg.validate();
  const Eigen::Index D = F.cols();
  if (D > 12) throw ConfigError("exact enumeration is limited to D <= 12 terms");
  if (u.size() != F.rows()) throw SchemaError("response length does not match the design");

  const Eigen::Index n = F.rows();
  const Eigen::MatrixXd gram = F.matrix.transpose() * F.matrix;
  const Eigen::VectorXd fu = F.matrix.transpose() * u;
  const double uu = u.squaredNorm();
  const double log_p = std::log(cfg.prior_inclusion);
  const double log_1p = std::log(1.0 - cfg.prior_inclusion);

  const std::size_t patterns = std::size_t{1} << D;
  std::vector<double> log_post(patterns);
  double max_log = -std::numeric_limits<double>::infinity();

  for (std::size_t pattern = 0; pattern < patterns; ++pattern) {
    Eigen::MatrixXd lhs = gram;
    double log_det_v = 0.0;
    double log_prior = 0.0;
    for (Eigen::Index d = 0; d < D; ++d) {
      const bool on = (pattern >> d) & 1;
      const double v = on ? cfg.slab_var : cfg.spike_var;
      lhs(d, d) += 1.0 / v;
      log_det_v += std::log(v);
      log_prior += on ? log_p : log_1p;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(lhs);
    if (llt.info() != Eigen::Success)
      throw NumericError("enumeration hit a non-positive-definite system");
    double log_det_a = 0.0;
    for (Eigen::Index d = 0; d < D; ++d) log_det_a += 2.0 * std::log(llt.matrixLLT()(d, d));
    const double quad = fu.dot(llt.solve(fu));
    const double tail = cfg.b_s + 0.5 * (uu - quad);
    if (!(tail > 0.0)) throw NumericError("enumeration produced a non-positive posterior scale");

    const double log_ml = std::lgamma(cfg.a_s + 0.5 * static_cast<double>(n)) -
                          std::lgamma(cfg.a_s) -
                          0.5 * static_cast<double>(n) * std::log(2.0 * M_PI) +
                          cfg.a_s * std::log(cfg.b_s) - 0.5 * (log_det_v + log_det_a) -
                          (cfg.a_s + 0.5 * static_cast<double>(n)) * std::log(tail);
    log_post[pattern] = log_ml + log_prior;
    max_log = std::max(max_log, log_post[pattern]);
  }

  double total = 0.0;
  for (double& w : log_post) {
    w = std::exp(w - max_log);
    total += w;
  }
  Eigen::VectorXd inclusion = Eigen::VectorXd::Zero(D);
  for (std::size_t pattern = 0; pattern < patterns; ++pattern) {
    const double weight = log_post[pattern] / total;
    for (Eigen::Index d = 0; d < D; ++d) {
      if ((pattern >> d) & 1) inclusion[d] += weight;
    }
  }
  return inclusion;
}

}  // namespace eqdisc
