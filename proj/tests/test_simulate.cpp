#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eqdisc/errors.hpp"
#include "eqdisc/simulate.hpp"

using namespace eqdisc;

TEST_CASE("one RK4 step on u' = u matches the degree-4 Taylor value") {
  Dataset d = integrate_ode(
      [](double, std::span<const double> u, std::span<double> du) { du[0] = u[0]; },
      std::vector<double>{1.0}, 0.1, 10, {"u1"});
  CHECK(d.value(0, 1, 0) == doctest::Approx(1.1051708333333332).epsilon(1e-15));
}

TEST_CASE("zero right-hand side keeps the trajectory constant") {
  Dataset d = integrate_ode(
      [](double, std::span<const double>, std::span<double> du) { du[0] = 0.0; },
      std::vector<double>{3.25}, 0.05, 20, {"u1"});
  for (std::size_t t = 0; t < d.num_times(); ++t) CHECK(d.value(0, t, 0) == 3.25);
}

TEST_CASE("divergent trajectories fail with the step index") {
  CHECK_THROWS_WITH_AS(
      integrate_ode([](double, std::span<const double> u,
                       std::span<double> du) { du[0] = u[0] * u[0]; },
                    std::vector<double>{10.0}, 0.5, 100, {"u1"}),
      doctest::Contains("step"), DivergenceError);
}

TEST_CASE("RK4 on linear_2d shows fourth-order global error decay") {
  const double a = -0.1, b = 2.0;
  auto exact = [&](double t, int i) {
    // e^{At} for A = [[a, b], [-b, a]] starting at (1, 0)
    const double e = std::exp(a * t);
    return i == 0 ? e * std::cos(b * t) : -e * std::sin(b * t);
  };
  auto global_error = [&](double dt, int steps) {
    SimSpec spec;
    spec.system = SystemKind::linear_2d;
    spec.initial_state = {1.0, 0.0};
    spec.dt = dt;
    spec.n_steps = steps;
    Dataset d = rk4_integrate(spec);
    double worst = 0.0;
    for (std::size_t t = 0; t < d.num_times(); ++t) {
      const double tt = d.grid().times()[t];
      worst = std::max(worst, std::fabs(d.value(0, t, 0) - exact(tt, 0)));
      worst = std::max(worst, std::fabs(d.value(0, t, 1) - exact(tt, 1)));
    }
    return worst;
  };
  const double coarse = global_error(0.05, 20);   // T = 1
  const double fine = global_error(0.025, 40);
  const double ratio = coarse / fine;
  CHECK(ratio >= 16.0 * 0.7);
  CHECK(ratio <= 16.0 * 1.3);
}

TEST_CASE("diffusion propagator matches the explicit finite-difference matrices") {
  Propagator p = diffusion_propagator(1.0, 0.1, 1.0, 3);
  // c = 0.1; entries are exact in double precision
  CHECK(p.ratio == 0.1);
  CHECK(p.interior(0, 0) == 0.8);
  CHECK(p.interior(0, 1) == 0.1);
  CHECK(p.interior(0, 2) == 0.0);
  CHECK(p.interior(1, 0) == 0.1);
  CHECK(p.interior(1, 1) == 0.8);
  CHECK(p.interior(1, 2) == 0.1);
  CHECK(p.interior(2, 0) == 0.0);
  CHECK(p.interior(2, 1) == 0.1);
  CHECK(p.interior(2, 2) == 0.8);
  CHECK(p.boundary(0, 0) == 0.1);
  CHECK(p.boundary(0, 1) == 0.0);
  CHECK(p.boundary(1, 0) == 0.0);
  CHECK(p.boundary(1, 1) == 0.0);
  CHECK(p.boundary(2, 0) == 0.0);
  CHECK(p.boundary(2, 1) == 0.1);
}

TEST_CASE("zero diffusion gives the identity propagator") {
  Propagator p = diffusion_propagator(0.0, 0.1, 1.0, 4);
  CHECK(p.interior == Eigen::MatrixXd::Identity(4, 4));
  CHECK(p.boundary == Eigen::MatrixXd::Zero(4, 2));
}

TEST_CASE("propagator rows sum to one") {
  for (double c_target : {0.1, 0.25, 0.5}) {
    Propagator p = diffusion_propagator(c_target, 1.0, 1.0, 5);
    for (int i = 0; i < 5; ++i) {
      const double row = p.interior.row(i).sum() + p.boundary.row(i).sum();
      CHECK(row == 1.0);
    }
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pick(0.0, 0.5);
  for (int rep = 0; rep < 20; ++rep) {
    Propagator p = diffusion_propagator(pick(rng), 1.0, 1.0, 7);
    for (int i = 0; i < 7; ++i) {
      const double row = p.interior.row(i).sum() + p.boundary.row(i).sum();
      CHECK(row == doctest::Approx(1.0).epsilon(4e-16));
    }
  }
}

TEST_CASE("stability guard rejects c > 1/2") {
  CHECK_THROWS_AS(diffusion_propagator(1.0, 0.6, 1.0, 3), StabilityError);
  SimSpec spec;
  spec.system = SystemKind::diffusion_1d;
  spec.parameters["b"] = 1.0;
  spec.dt = 0.6;
  spec.dx = 1.0;
  spec.space_points = 5;
  spec.n_steps = 10;
  spec.initial_state.assign(5, 0.0);
  CHECK_THROWS_AS(simulate_diffusion(spec), StabilityError);
}

TEST_CASE("constant profile matching the boundaries is a fixed point") {
  SimSpec spec;
  spec.system = SystemKind::diffusion_1d;
  spec.parameters["b"] = 0.25;  // c = 0.25: dyadic, exact arithmetic
  spec.dt = 1.0;
  spec.dx = 1.0;
  spec.space_points = 7;
  spec.n_steps = 50;
  spec.boundary_left = 2.5;
  spec.boundary_right = 2.5;
  spec.initial_state.assign(7, 2.5);
  Dataset d = simulate_diffusion(spec);
  for (std::size_t s = 0; s < d.num_space(); ++s)
    for (std::size_t t = 0; t < d.num_times(); ++t) CHECK(d.value(s, t, 0) == 2.5);
}

TEST_CASE("symmetric initial bump stays symmetric") {
  SimSpec spec;
  spec.system = SystemKind::diffusion_1d;
  spec.parameters["b"] = 0.4;
  spec.dt = 1.0;
  spec.dx = 1.0;
  spec.space_points = 9;
  spec.n_steps = 30;
  spec.initial_state.assign(9, 0.0);
  for (int i = 0; i < 9; ++i) spec.initial_state[i] = std::exp(-0.3 * (i - 4) * (i - 4));
  Dataset d = simulate_diffusion(spec);
  const std::size_t S = d.num_space();
  for (std::size_t t = 0; t < d.num_times(); ++t)
    for (std::size_t s = 0; s < S; ++s)
      CHECK(d.value(s, t, 0) == d.value(S - 1 - s, t, 0));
}

TEST_CASE("sine profile decays at the analytic heat-equation rate") {
  SimSpec spec;
  spec.system = SystemKind::diffusion_1d;
  const double b = 0.5;
  spec.parameters["b"] = b;
  spec.space_points = 199;
  spec.dx = 1.0 / 200.0;
  spec.dt = 2e-5;  // c = 0.4
  spec.n_steps = 1000;
  spec.initial_state.resize(199);
  for (int i = 0; i < 199; ++i)
    spec.initial_state[i] = std::sin(M_PI * (i + 1) * spec.dx);
  Dataset d = simulate_diffusion(spec);

  // amplitude at the midpoint: u(0.5, t) = exp(-b pi^2 t)
  const std::size_t mid = d.num_space() / 2;
  const double t1 = d.grid().times()[200], t2 = d.grid().times()[1000];
  const double a1 = d.value(mid, 200, 0), a2 = d.value(mid, 1000, 0);
  const double rate = std::log(a1 / a2) / (t2 - t1);
  const double analytic = b * M_PI * M_PI;
  CHECK(std::fabs(rate - analytic) / analytic <= 0.02);
}

TEST_CASE("diffusion respects the maximum principle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(-1.0, 3.0);
  SimSpec spec;
  spec.system = SystemKind::diffusion_1d;
  spec.parameters["b"] = 0.45;
  spec.dt = 1.0;
  spec.dx = 1.0;
  spec.space_points = 11;
  spec.n_steps = 40;
  spec.boundary_left = val(rng);
  spec.boundary_right = val(rng);
  spec.initial_state.resize(11);
  for (auto& v : spec.initial_state) v = val(rng);

  double lo = std::min(spec.boundary_left, spec.boundary_right);
  double hi = std::max(spec.boundary_left, spec.boundary_right);
  for (double v : spec.initial_state) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Dataset d = simulate_diffusion(spec);
  for (std::size_t s = 0; s < d.num_space(); ++s)
    for (std::size_t t = 0; t < d.num_times(); ++t) {
      CHECK(d.value(s, t, 0) >= lo - 1e-12);
      CHECK(d.value(s, t, 0) <= hi + 1e-12);
    }
}

TEST_CASE("stepped diffusion schedule switches the coefficient") {
  SimSpec spec;
  spec.system = SystemKind::diffusion_1d;
  spec.parameters["b0"] = 0.1;
  spec.parameters["b1"] = 0.3;
  spec.dt = 1.0;
  spec.dx = 1.0;
  spec.space_points = 5;
  spec.n_steps = 10;
  spec.initial_state = {0.0, 1.0, 2.0, 1.0, 0.0};
  Dataset d = simulate_diffusion(spec);
  // first step uses b0: u(2) update = 2 + 0.1 * (1 - 4 + 1)
  CHECK(d.value(3, 1, 0) == doctest::Approx(2.0 + 0.1 * (1.0 - 4.0 + 1.0)));
  CHECK(d.num_times() == 11);
}

TEST_CASE("add_noise honours the seed and the zero level") {
  SimSpec spec;
  spec.system = SystemKind::cubic_oscillator;
  spec.initial_state = {1.5};
  spec.dt = 0.01;
  spec.n_steps = 500;
  Dataset clean = rk4_integrate(spec);

  CHECK(add_noise(clean, 0.0, 7) == clean);
  Dataset a = add_noise(clean, 0.05, 42);
  Dataset b = add_noise(clean, 0.05, 42);
  CHECK(a == b);
  Dataset c = add_noise(clean, 0.05, 43);
  CHECK_FALSE(a == c);
}

TEST_CASE("noise level matches its target on large samples") {
  Grid g = Grid::temporal([] {
    std::vector<double> t(20000);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return t;
  }());
  std::vector<double> values(20000);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::sin(0.01 * i);
  Dataset clean(g, {"u1"}, values);
  Dataset noisy = add_noise(clean, 0.1, 5);

  double signal_ss = 0.0, noise_ss = 0.0, signal_mean = 0.0;
  for (double v : values) signal_mean += v;
  signal_mean /= values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    signal_ss += (values[i] - signal_mean) * (values[i] - signal_mean);
    const double d = noisy.value(0, i, 0) - values[i];
    noise_ss += d * d;
  }
  const double ratio = std::sqrt(noise_ss / signal_ss) / 0.1;
  CHECK(ratio >= 0.9);
  CHECK(ratio <= 1.1);
}

TEST_CASE("ground truth tables expose the canonical coefficients") {
  SimSpec lorenz;
  lorenz.system = SystemKind::lorenz63;
  auto terms = ground_truth_terms(lorenz);
  CHECK(terms.size() == 7);
  bool found = false;
  for (const auto& t : terms) {
    if (t.component == 1 && t.descriptor == "u1·u3") {
      CHECK(t.value == -1.0);
      found = true;
    }
  }
  CHECK(found);

  SimSpec diff;
  diff.system = SystemKind::diffusion_1d;
  diff.parameters["b"] = 0.37;
  auto dterms = ground_truth_terms(diff);
  REQUIRE(dterms.size() == 1);
  CHECK(dterms[0].descriptor == "u1_xx");
  CHECK(dterms[0].value == 0.37);
}

TEST_CASE("system name round-trip and parameter validation") {
  CHECK(system_from_name("lorenz63") == SystemKind::lorenz63);
  CHECK(system_name(SystemKind::lotka_volterra) == "lotka_volterra");
  CHECK_THROWS_AS(system_from_name("unknown"), ConfigError);

  SimSpec spec;
  spec.system = SystemKind::lorenz63;
  spec.initial_state = {1.0};  // wrong dimension
  CHECK_THROWS_AS(rk4_integrate(spec), ConfigError);
}
