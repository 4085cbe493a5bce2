#include "eqdisc/differentiate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "eqdisc/errors.hpp"
#include "eqdisc/kernels.hpp"

namespace eqdisc {

namespace {

void check_order(int order) {
  if (order != 1 && order != 2) throw ConfigError("derivative order must be 1 or 2");
}

void check_step(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("step must be positive");
}

// Weights mapping a window of samples onto the fitted polynomial's
// derivative at window offset `at`. Index units; the 1/h^order scaling is
// folded in.
std::vector<double> poly_window_weights(int window, int degree, int at, int order,
                                        double step) {
  Eigen::MatrixXd design(window, degree + 1);
  for (int j = 0; j < window; ++j) {
    double xi = static_cast<double>(j - at);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      design(j, k) = p;
      p *= xi;
    }
  }
  Eigen::MatrixXd pinv = design.completeOrthogonalDecomposition().pseudoInverse();
  double scale = order == 1 ? 1.0 / step : 2.0 / (step * step);
  std::vector<double> w(window);
  for (int j = 0; j < window; ++j) w[j] = pinv(order, j) * scale;
  return w;
}

using Diff1D = std::vector<double> (*)(std::span<const double>, double, int,
                                       const DiffConfig&);

std::vector<double> central_1d(std::span<const double> series, double step, int order,
                               const DiffConfig&) {
  return central_difference(series, step, order, BoundaryPolicy::one_sided);
}

std::vector<double> smoothed_1d(std::span<const double> series, double step, int order,
                                const DiffConfig& cfg) {
  return smoothed_poly_derivative(series, step, cfg, order);
}

}  // namespace

void DiffConfig::validate() const {
  if (poly_window < 5 || poly_window % 2 == 0)
    throw ConfigError("poly_window must be an odd integer >= 5");
  if (poly_degree < 2 || poly_degree > 6)
    throw ConfigError("poly_degree must lie in [2, 6]");
  if (poly_degree >= poly_window) throw ConfigError("poly_degree must be < poly_window");
}

std::vector<double> central_difference(std::span<const double> series, double step,
                                       int order, BoundaryPolicy boundary) {
  check_order(order);
  check_step(step);
  const std::size_t n = series.size();
  if (n < 3) throw ConfigError("central difference needs at least 3 points");
  const double* u = series.data();

  std::vector<double> interior(n - 2);
  if (order == 1) {
    kernels::central_diff1(u, interior.data(), n - 2, 2.0 * step);
  } else {
    kernels::central_diff2(u, interior.data(), n - 2, step * step);
  }
  if (boundary == BoundaryPolicy::trim) return interior;

  std::vector<double> out(n);
  std::copy(interior.begin(), interior.end(), out.begin() + 1);
  if (order == 1) {
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * step);
    out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * step);
  } else if (n == 3) {
    // Too short for the 4-point one-sided stencil; reuse the interior value.
    out[0] = out[1];
    out[2] = out[1];
  } else {
    const double h2 = step * step;
    out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
    out[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
  }
  return out;
}

std::vector<double> forward_difference(std::span<const double> series, double step,
                                       BoundaryPolicy boundary) {
  check_step(step);
  const std::size_t n = series.size();
  if (n < 2) throw ConfigError("forward difference needs at least 2 points");
  const double* u = series.data();
  const std::size_t m = boundary == BoundaryPolicy::trim ? n - 1 : n;
  std::vector<double> out(m);
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = (u[i + 1] - u[i]) / step;
  if (boundary == BoundaryPolicy::one_sided) out[n - 1] = (u[n - 1] - u[n - 2]) / step;
  return out;
}

std::vector<double> smoothed_poly_derivative(std::span<const double> series, double step,
                                             const DiffConfig& cfg, int order) {
  cfg.validate();
  check_order(order);
  check_step(step);
  const std::size_t n = series.size();
  const int w = cfg.poly_window;
  if (static_cast<std::size_t>(w) > n)
    throw ConfigError("poly_window exceeds the series length");

  std::map<int, std::vector<double>> weights;  // window offset -> weights
  const int half = (w - 1) / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    int ws = std::clamp(static_cast<int>(i) - half, 0, static_cast<int>(n) - w);
    int at = static_cast<int>(i) - ws;
    auto it = weights.find(at);
    if (it == weights.end())
      it = weights.emplace(at, poly_window_weights(w, cfg.poly_degree, at, order, step))
               .first;
    out[i] = kernels::dot(it->second.data(), series.data() + ws,
                          static_cast<std::size_t>(w));
  }
  return out;
}

DerivativeField differentiate_dataset(const Dataset& data, const DiffConfig& cfg,
                                      const std::set<int>& temporal_orders,
                                      const std::set<int>& spatial_orders) {
  cfg.validate();
  for (int o : temporal_orders) check_order(o);
  for (int o : spatial_orders) check_order(o);
  if (!spatial_orders.empty() && !data.grid().has_space())
    throw ConfigError("spatial derivatives requested on a dataset without a spatial axis");

  const std::size_t S = data.num_space();
  const std::size_t T = data.num_times();
  const std::size_t N = data.num_components();

  if (!temporal_orders.empty() && !data.grid().uniform_dt())
    throw GeometryError("time axis must be uniformly spaced to differentiate");
  if (!spatial_orders.empty() && !data.grid().uniform_dx())
    throw GeometryError("spatial axis must be uniformly spaced to differentiate");

  Diff1D diff = cfg.method == DiffMethod::central_fd ? central_1d : smoothed_1d;
  std::string tag = cfg.method == DiffMethod::central_fd
                        ? "central_fd"
                        : "smoothed_poly(window=" + std::to_string(cfg.poly_window) +
                              ",degree=" + std::to_string(cfg.poly_degree) + ")";

  // Full-size arrays first; the trim policy slices everything afterwards.
  std::map<int, std::vector<double>> temporal, spatial;
  for (int order : temporal_orders) {
    std::vector<double> arr(S * T * N);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t s = 0; s < S; ++s) {
        auto d = diff(data.time_series(s, n), data.grid().dt(), order, cfg);
        std::copy(d.begin(), d.end(), arr.begin() + (n * S + s) * T);
      }
    }
    temporal.emplace(order, std::move(arr));
  }
  if (!spatial_orders.empty()) {
    std::vector<double> slice(S);
    for (int order : spatial_orders) {
      std::vector<double> arr(S * T * N);
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t s = 0; s < S; ++s) slice[s] = data.value(s, t, n);
          auto d = diff(slice, data.grid().dx(), order, cfg);
          for (std::size_t s = 0; s < S; ++s) arr[(n * S + s) * T + t] = d[s];
        }
      }
      spatial.emplace(order, std::move(arr));
    }
  }

  const std::size_t cut_t =
      (cfg.boundary == BoundaryPolicy::trim && !temporal_orders.empty()) ? 1 : 0;
  const std::size_t cut_s =
      (cfg.boundary == BoundaryPolicy::trim && !spatial_orders.empty()) ? 1 : 0;

  if (cut_t == 0 && cut_s == 0) {
    DerivativeField field(data);
    for (auto& [order, arr] : temporal) field.set_temporal(order, {std::move(arr), tag});
    for (auto& [order, arr] : spatial) field.set_spatial(order, {std::move(arr), tag});
    return field;
  }

  const std::size_t S2 = S - 2 * cut_s;
  const std::size_t T2 = T - 2 * cut_t;
  auto slice_array = [&](const std::vector<double>& src, std::size_t planes) {
    std::vector<double> dst(S2 * T2 * planes);
    for (std::size_t n = 0; n < planes; ++n)
      for (std::size_t s = 0; s < S2; ++s)
        for (std::size_t t = 0; t < T2; ++t)
          dst[(n * S2 + s) * T2 + t] = src[(n * S + s + cut_s) * T + t + cut_t];
    return dst;
  };

  std::vector<double> times(data.grid().times().begin() + cut_t,
                            data.grid().times().end() - cut_t);
  Grid grid = data.grid().has_space()
                  ? Grid::spatiotemporal(
                        std::vector<double>(data.grid().spatial_coords().begin() + cut_s,
                                            data.grid().spatial_coords().end() - cut_s),
                        std::move(times))
                  : Grid::temporal(std::move(times));
  Dataset trimmed(std::move(grid), data.component_names(), slice_array(data.values(), N),
                  data.covariate_names(),
                  slice_array(data.covariates(), data.num_covariates()));

  DerivativeField field(std::move(trimmed));
  for (auto& [order, arr] : temporal) field.set_temporal(order, {slice_array(arr, N), tag});
  for (auto& [order, arr] : spatial) field.set_spatial(order, {slice_array(arr, N), tag});
  return field;
}

}  // namespace eqdisc
