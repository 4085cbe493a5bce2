#include "eqdisc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eqdisc/errors.hpp"
#include "eqdisc/kernels.hpp"

namespace eqdisc {

namespace {

const std::map<std::string, double>& default_parameters(SystemKind kind) {
  static const std::map<SystemKind, std::map<std::string, double>> defaults = {
      {SystemKind::lorenz63, {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}}},
      {SystemKind::lotka_volterra,
       {{"alpha", 1.1}, {"beta", 0.4}, {"delta", 0.1}, {"gamma", 0.4}}},
      {SystemKind::cubic_oscillator, {{"a", -0.1}}},
      {SystemKind::linear_2d, {{"a", -0.1}, {"b", 2.0}}},
      {SystemKind::diffusion_1d, {{"b", 0.5}}},
  };
  return defaults.at(kind);
}

std::size_t state_dimension(SystemKind kind) {
  switch (kind) {
    case SystemKind::lorenz63:
      return 3;
    case SystemKind::lotka_volterra:
    case SystemKind::linear_2d:
      return 2;
    case SystemKind::cubic_oscillator:
      return 1;
    default:
      return 0;
  }
}

std::vector<std::string> component_labels(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back("u" + std::to_string(i));
  return names;
}

std::vector<double> uniform_times(double dt, int n_steps) {
  std::vector<double> times(n_steps + 1);
  for (int i = 0; i <= n_steps; ++i) times[i] = static_cast<double>(i) * dt;
  return times;
}

}  // namespace

SystemKind system_from_name(const std::string& name) {
  if (name == "lorenz63") return SystemKind::lorenz63;
  if (name == "lotka_volterra") return SystemKind::lotka_volterra;
  if (name == "cubic_oscillator") return SystemKind::cubic_oscillator;
  if (name == "linear_2d") return SystemKind::linear_2d;
  if (name == "diffusion_1d") return SystemKind::diffusion_1d;
  throw ConfigError("unknown system '" + name + "'");
}

std::string system_name(SystemKind kind) {
  switch (kind) {
    case SystemKind::lorenz63:
      return "lorenz63";
    case SystemKind::lotka_volterra:
      return "lotka_volterra";
    case SystemKind::cubic_oscillator:
      return "cubic_oscillator";
    case SystemKind::linear_2d:
      return "linear_2d";
    case SystemKind::diffusion_1d:
      return "diffusion_1d";
  }
  throw ConfigError("unknown system kind");
}

double SimSpec::parameter(const std::string& name) const {
  auto it = parameters.find(name);
  if (it != parameters.end()) return it->second;
  const auto& defaults = default_parameters(system);
  auto dit = defaults.find(name);
  if (dit != defaults.end()) return dit->second;
  throw ConfigError("missing parameter '" + name + "' for system " + system_name(system));
}

Dataset integrate_ode(
    const std::function<void(double, std::span<const double>, std::span<double>)>& rhs,
    std::span<const double> u0, double dt, int n_steps, std::vector<std::string> names) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (n_steps < 4) throw ConfigError("n_steps must be at least 4");
  const std::size_t dim = u0.size();
  if (names.size() != dim) throw ConfigError("component name count does not match the state");

  std::vector<double> values(dim * (n_steps + 1));
  std::vector<double> u(u0.begin(), u0.end());
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  auto record = [&](int step) {
    for (std::size_t n = 0; n < dim; ++n) {
      if (!std::isfinite(u[n]))
        throw DivergenceError("non-finite state at step " + std::to_string(step));
      values[n * (n_steps + 1) + step] = u[n];
    }
  };
  record(0);

  for (int step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    rhs(t, u, k1);
    for (std::size_t n = 0; n < dim; ++n) tmp[n] = u[n] + 0.5 * dt * k1[n];
    rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t n = 0; n < dim; ++n) tmp[n] = u[n] + 0.5 * dt * k2[n];
    rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t n = 0; n < dim; ++n) tmp[n] = u[n] + dt * k3[n];
    rhs(t + dt, tmp, k4);
    for (std::size_t n = 0; n < dim; ++n)
      u[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    record(step + 1);
  }

  return Dataset(Grid::temporal(uniform_times(dt, n_steps)), std::move(names),
                 std::move(values));
}

Dataset rk4_integrate(const SimSpec& spec) {
  const std::size_t dim = state_dimension(spec.system);
  if (dim == 0) throw ConfigError("rk4_integrate expects an ODE system");
  if (spec.initial_state.size() != dim)
    throw ConfigError("initial_state must have " + std::to_string(dim) + " entries for " +
                      system_name(spec.system));

  std::function<void(double, std::span<const double>, std::span<double>)> rhs;
  switch (spec.system) {
    case SystemKind::lorenz63: {
      const double sigma = spec.parameter("sigma");
      const double rho = spec.parameter("rho");
      const double beta = spec.parameter("beta");
      rhs = [=](double, std::span<const double> s, std::span<double> d) {
        d[0] = sigma * (s[1] - s[0]);
        d[1] = s[0] * (rho - s[2]) - s[1];
        d[2] = s[0] * s[1] - beta * s[2];
      };
      break;
    }
    case SystemKind::lotka_volterra: {
      const double alpha = spec.parameter("alpha");
      const double beta = spec.parameter("beta");
      const double delta = spec.parameter("delta");
      const double gamma = spec.parameter("gamma");
      rhs = [=](double, std::span<const double> s, std::span<double> d) {
        d[0] = alpha * s[0] - beta * s[0] * s[1];
        d[1] = delta * s[0] * s[1] - gamma * s[1];
      };
      break;
    }
    case SystemKind::cubic_oscillator: {
      const double a = spec.parameter("a");
      rhs = [=](double, std::span<const double> s, std::span<double> d) {
        d[0] = a * s[0] * s[0] * s[0];
      };
      break;
    }
    case SystemKind::linear_2d: {
      const double a = spec.parameter("a");
      const double b = spec.parameter("b");
      rhs = [=](double, std::span<const double> s, std::span<double> d) {
        d[0] = a * s[0] + b * s[1];
        d[1] = -b * s[0] + a * s[1];
      };
      break;
    }
    default:
      throw ConfigError("rk4_integrate expects an ODE system");
  }

  return integrate_ode(rhs, spec.initial_state, spec.dt, spec.n_steps,
                       component_labels(dim));
}

Propagator diffusion_propagator(double b, double dt, double dx, int s_interior) {
  if (s_interior < 1) throw ConfigError("diffusion needs at least one interior point");
  if (!(dt > 0.0) || !(dx > 0.0)) throw ConfigError("dt and dx must be positive");
  const double c = b * dt / (dx * dx);
  if (c > 0.5)
    throw StabilityError("stability ratio c = " + std::to_string(c) + " exceeds 1/2");
  if (c < 0.0) throw ConfigError("diffusion coefficient must be non-negative");

  Propagator p;
  p.ratio = c;
  p.interior = Eigen::MatrixXd::Zero(s_interior, s_interior);
  p.boundary = Eigen::MatrixXd::Zero(s_interior, 2);
  for (int i = 0; i < s_interior; ++i) {
    p.interior(i, i) = 1.0 - 2.0 * c;
    if (i > 0) p.interior(i, i - 1) = c;
    if (i + 1 < s_interior) p.interior(i, i + 1) = c;
  }
  p.boundary(0, 0) = c;
  p.boundary(s_interior - 1, 1) = c;
  return p;
}

Dataset simulate_diffusion(const SimSpec& spec) {
  if (spec.system != SystemKind::diffusion_1d)
    throw ConfigError("simulate_diffusion expects the diffusion_1d system");
  const int S = spec.space_points;
  if (S < 3) throw ConfigError("diffusion needs at least 3 interior points");
  if (spec.n_steps < 4) throw ConfigError("n_steps must be at least 4");
  if (spec.initial_state.size() != static_cast<std::size_t>(S))
    throw ConfigError("initial_state must hold the " + std::to_string(S) +
                      " interior values");

  const bool stepped = spec.has_parameter("b0") || spec.has_parameter("b1");
  const double b0 = stepped ? spec.parameter("b0") : spec.parameter("b");
  const double b1 = stepped ? spec.parameter("b1") : b0;
  const double step_frac =
      spec.has_parameter("step_frac") ? spec.parameter("step_frac") : 0.5;
  const int switch_step = static_cast<int>(step_frac * spec.n_steps);

  auto ratio_of = [&](double b) {
    const double c = b * spec.dt / (spec.dx * spec.dx);
    if (c > 0.5)
      throw StabilityError("stability ratio c = " + std::to_string(c) + " exceeds 1/2");
    if (c < 0.0) throw ConfigError("diffusion coefficient must be non-negative");
    return c;
  };
  ratio_of(b0);
  ratio_of(b1);

  const std::size_t total = static_cast<std::size_t>(S) + 2;
  const std::size_t T = static_cast<std::size_t>(spec.n_steps) + 1;
  std::vector<double> coords(total);
  for (std::size_t i = 0; i < total; ++i) coords[i] = static_cast<double>(i) * spec.dx;

  std::vector<double> values(total * T);
  std::vector<double> padded(total), next(S);
  padded[0] = spec.boundary_left;
  padded[total - 1] = spec.boundary_right;
  for (int i = 0; i < S; ++i) padded[i + 1] = spec.initial_state[i];

  auto record = [&](std::size_t step) {
    for (std::size_t s = 0; s < total; ++s) values[s * T + step] = padded[s];
  };
  record(0);
  for (int step = 0; step < spec.n_steps; ++step) {
    const double c = ratio_of(step < switch_step ? b0 : b1);
    kernels::stencil3(padded.data(), next.data(), S, 1.0 - 2.0 * c, c);
    std::copy(next.begin(), next.end(), padded.begin() + 1);
    record(step + 1);
  }

  return Dataset(Grid::spatiotemporal(std::move(coords), uniform_times(spec.dt, spec.n_steps)),
                 component_labels(1), std::move(values));
}

Dataset add_noise(const Dataset& data, double sigma_rel, std::uint64_t seed) {
  if (sigma_rel < 0.0) throw ConfigError("noise level must be non-negative");
  if (sigma_rel == 0.0) return data;

  const std::size_t rows = data.num_rows();
  std::vector<double> values = data.values();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t n = 0; n < data.num_components(); ++n) {
    double* plane = values.data() + n * rows;
    const double mean = kernels::sum(plane, rows) / static_cast<double>(rows);
    double ss = 0.0;
    for (std::size_t i = 0; i < rows; ++i) ss += (plane[i] - mean) * (plane[i] - mean);
    const double sd = rows > 1 ? std::sqrt(ss / static_cast<double>(rows - 1)) : 0.0;
    const double scale = sigma_rel * sd;
    for (std::size_t i = 0; i < rows; ++i) plane[i] += scale * normal(rng);
  }
  return Dataset(data.grid(), data.component_names(), std::move(values),
                 data.covariate_names(), data.covariates());
}

Dataset simulate(const SimSpec& spec) {
  Dataset clean = spec.system == SystemKind::diffusion_1d ? simulate_diffusion(spec)
                                                          : rk4_integrate(spec);
  return add_noise(clean, spec.noise_level, spec.seed);
}

std::vector<TruthTerm> ground_truth_terms(const SimSpec& spec) {
  switch (spec.system) {
    case SystemKind::lorenz63: {
      const double sigma = spec.parameter("sigma");
      const double rho = spec.parameter("rho");
      const double beta = spec.parameter("beta");
      return {{0, "u1", -sigma}, {0, "u2", sigma},    {1, "u1", rho},
              {1, "u2", -1.0},   {1, "u1·u3", -1.0},  {2, "u3", -beta},
              {2, "u1·u2", 1.0}};
    }
    case SystemKind::lotka_volterra: {
      const double alpha = spec.parameter("alpha");
      const double beta = spec.parameter("beta");
      const double delta = spec.parameter("delta");
      const double gamma = spec.parameter("gamma");
      return {{0, "u1", alpha}, {0, "u1·u2", -beta}, {1, "u1·u2", delta}, {1, "u2", -gamma}};
    }
    case SystemKind::cubic_oscillator:
      return {{0, "u1^3", spec.parameter("a")}};
    case SystemKind::linear_2d: {
      const double a = spec.parameter("a");
      const double b = spec.parameter("b");
      return {{0, "u1", a}, {0, "u2", b}, {1, "u1", -b}, {1, "u2", a}};
    }
    case SystemKind::diffusion_1d: {
      const bool stepped = spec.has_parameter("b0") || spec.has_parameter("b1");
      const double b = stepped ? spec.parameter("b0") : spec.parameter("b");
      return {{0, "u1_xx", b}};
    }
  }
  throw ConfigError("unknown system kind");
}

}  // namespace eqdisc
