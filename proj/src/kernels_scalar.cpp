#include "kernels_impl.hpp"

#include <cmath>

// Scalar reference kernels. Reductions stripe the input over four
// accumulators exactly like the 4-wide AVX2 lanes, and combine them in the
// same order, so both paths produce the same bits.

namespace eqdisc::kernels::detail {
namespace {

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(const double* a, double alpha, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * alpha;
}

void clamp_scalar(const double* a, double lo, double hi, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    // Written to mirror maxpd/minpd operand ordering.
    double t = a[i] > lo ? a[i] : lo;
    out[i] = t < hi ? t : hi;
  }
}

std::size_t guarded_div_scalar(const double* a, const double* b, double* out,
                               std::size_t n, double eps) {
  std::size_t guarded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(b[i]) < eps) {
      out[i] = 1.0;
      ++guarded;
    } else {
      out[i] = a[i] / b[i];
    }
  }
  return guarded;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    acc0 += a[i] * b[i];
    acc1 += a[i + 1] * b[i + 1];
    acc2 += a[i + 2] * b[i + 2];
    acc3 += a[i + 3] * b[i + 3];
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += a[i] * b[i];
  return ((acc0 + acc2) + (acc1 + acc3)) + tail;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    acc0 += a[i];
    acc1 += a[i + 1];
    acc2 += a[i + 2];
    acc3 += a[i + 3];
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += a[i];
  return ((acc0 + acc2) + (acc1 + acc3)) + tail;
}

double sum_squares_scalar(const double* a, std::size_t n) {
  return dot_scalar(a, a, n);
}

void central_diff1_scalar(const double* u, double* out, std::size_t n_out, double two_h) {
  for (std::size_t i = 0; i < n_out; ++i) out[i] = (u[i + 2] - u[i]) / two_h;
}

void central_diff2_scalar(const double* u, double* out, std::size_t n_out, double h_sq) {
  for (std::size_t i = 0; i < n_out; ++i)
    out[i] = ((u[i] + u[i + 2]) - 2.0 * u[i + 1]) / h_sq;
}

void stencil3_scalar(const double* u, double* out, std::size_t n_out, double c_mid,
                     double c_side) {
  for (std::size_t i = 0; i < n_out; ++i)
    out[i] = c_mid * u[i + 1] + c_side * (u[i] + u[i + 2]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      add_scalar,           sub_scalar,          mul_scalar,
      scale_scalar,         clamp_scalar,        guarded_div_scalar,
      dot_scalar,           sum_scalar,          sum_squares_scalar,
      central_diff1_scalar, central_diff2_scalar, stencil3_scalar,
  };
  return table;
}

}  // namespace eqdisc::kernels::detail
