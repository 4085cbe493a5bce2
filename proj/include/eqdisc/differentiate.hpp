#pragma once

#include <set>
#include <span>
#include <vector>

#include "eqdisc/data.hpp"

namespace eqdisc {

enum class DiffMethod { central_fd, smoothed_poly };
enum class BoundaryPolicy { one_sided, trim };

/// Differentiation settings. smoothed_poly fits a local least-squares
/// polynomial of degree poly_degree over a poly_window-wide window per point
/// (windows shift near the series ends) and reads the derivative off the fit;
/// it is the designated path for noisy data.
struct DiffConfig {
  DiffMethod method = DiffMethod::central_fd;
  int poly_window = 11;  // odd, >= 5
  int poly_degree = 3;   // in [2, 6], < poly_window
  BoundaryPolicy boundary = BoundaryPolicy::one_sided;

  void validate() const;
};

/// Second-order central differences of a uniformly spaced series.
/// order 1: (u[i+1] - u[i-1]) / (2h); order 2: (u[i+1] - 2u[i] + u[i-1]) / h^2.
/// Boundaries use one-sided second-order stencils, or the output is trimmed
/// by one point per end.
std::vector<double> central_difference(std::span<const double> series, double step,
                                       int order,
                                       BoundaryPolicy boundary = BoundaryPolicy::one_sided);

/// (u[i+1] - u[i]) / h; the last point repeats the final difference under
/// one_sided, or is dropped under trim.
std::vector<double> forward_difference(std::span<const double> series, double step,
                                       BoundaryPolicy boundary = BoundaryPolicy::one_sided);

/// Local polynomial (Savitzky-Golay style) derivative of order 1 or 2.
std::vector<double> smoothed_poly_derivative(std::span<const double> series, double step,
                                             const DiffConfig& cfg, int order);

/// Applies the configured 1-D method along time for every (s, n) slice and
/// along space for every (t, n) slice. Requested orders must be 1 or 2;
/// spatial orders require a spatial axis. Under the trim policy the returned
/// field holds a copy of the dataset shrunk by one point per differentiated
/// dimension end, with all arrays aligned to it.
DerivativeField differentiate_dataset(const Dataset& data, const DiffConfig& cfg,
                                      const std::set<int>& temporal_orders,
                                      const std::set<int>& spatial_orders);

}  // namespace eqdisc
