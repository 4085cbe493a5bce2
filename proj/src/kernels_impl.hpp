#pragma once

#include <cstddef>

// Internal: the per-ISA kernel tables behind the public dispatch layer.

namespace eqdisc::kernels::detail {

struct KernelTable {
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(const double*, double, double*, std::size_t);
  void (*clamp)(const double*, double, double, double*, std::size_t);
  std::size_t (*guarded_div)(const double*, const double*, double*, std::size_t, double);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sum_squares)(const double*, std::size_t);
  void (*central_diff1)(const double*, double*, std::size_t, double);
  void (*central_diff2)(const double*, double*, std::size_t, double);
  void (*stencil3)(const double*, double*, std::size_t, double, double);
};

const KernelTable& scalar_table();

#if defined(EQDISC_BUILD_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace eqdisc::kernels::detail
