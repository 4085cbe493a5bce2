#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eqdisc/data.hpp"

namespace eqdisc {

enum class SystemKind { lorenz63, lotka_volterra, cubic_oscillator, linear_2d, diffusion_1d };

SystemKind system_from_name(const std::string& name);
std::string system_name(SystemKind kind);

/// Ground-truth generator settings. For ODE systems `initial_state` is the
/// state vector; for diffusion_1d it is the initial interior profile and the
/// dx / space_points / boundary fields apply. Missing parameters fall back to
/// the canonical defaults of each system. The diffusion coefficient may step
/// from b0 to b1 at step_frac of the run (parameters "b0", "b1", "step_frac")
/// instead of a constant "b".
struct SimSpec {
  SystemKind system = SystemKind::lorenz63;
  std::map<std::string, double> parameters;
  std::vector<double> initial_state;
  double dt = 0.001;
  int n_steps = 1000;
  // diffusion_1d only
  double dx = 0.01;
  int space_points = 0;  // interior point count S
  double boundary_left = 0.0;
  double boundary_right = 0.0;

  double noise_level = 0.0;  // relative noise sigma
  std::uint64_t seed = 0;

  double parameter(const std::string& name) const;
  bool has_parameter(const std::string& name) const { return parameters.count(name) > 0; }
};

/// Classical fixed-step RK4 over a caller-supplied right-hand side.
/// Throws DivergenceError (with the step index) on a non-finite state.
Dataset integrate_ode(
    const std::function<void(double, std::span<const double>, std::span<double>)>& rhs,
    std::span<const double> u0, double dt, int n_steps, std::vector<std::string> names);

/// RK4 integration of one of the built-in ODE systems (noiseless, S = 1).
Dataset rk4_integrate(const SimSpec& spec);

/// Explicit finite-difference transition matrices for u_t = b u_xx with fixed
/// boundaries: tridiagonal interior part (diagonal 1 - 2c, off-diagonals c)
/// and an S x 2 boundary part with c in the corners, c = b dt / dx^2.
struct Propagator {
  Eigen::MatrixXd interior;
  Eigen::MatrixXd boundary;
  double ratio = 0.0;  // c
};
Propagator diffusion_propagator(double b, double dt, double dx, int s_interior);

/// Iterates U(t + dt) = M U(t) + M_b U_b(t) from the initial profile. The
/// returned dataset includes the two fixed boundary points. Throws
/// StabilityError when c > 1/2 anywhere in the schedule.
Dataset simulate_diffusion(const SimSpec& spec);

/// Adds i.i.d. Gaussian noise with sd = sigma_rel * (per-component sample sd).
/// sigma_rel = 0 returns the input unchanged.
Dataset add_noise(const Dataset& data, double sigma_rel, std::uint64_t seed);

/// Runs the configured system and applies its noise settings.
Dataset simulate(const SimSpec& spec);

/// True equation of a built-in system in canonical library descriptors,
/// for harness comparisons.
struct TruthTerm {
  int component;
  std::string descriptor;
  double value;
};
std::vector<TruthTerm> ground_truth_terms(const SimSpec& spec);

}  // namespace eqdisc
