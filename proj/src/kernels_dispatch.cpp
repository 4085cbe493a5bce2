#include "eqdisc/kernels.hpp"

#include <cmath>
#include <cstdlib>

#include "kernels_impl.hpp"

namespace eqdisc::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(EQDISC_BUILD_AVX2)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const detail::KernelTable* table_for(Isa isa) {
#if defined(EQDISC_BUILD_AVX2)
  if (isa == Isa::avx2) return &detail::avx2_table();
#else
  (void)isa;
#endif
  return &detail::scalar_table();
}

struct Dispatch {
  Isa isa;
  const detail::KernelTable* table;
  Dispatch() {
    isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
    // EQDISC_ISA=scalar pins the reference kernels (debugging aid).
    if (const char* forced = std::getenv("EQDISC_ISA")) {
      if (std::string_view(forced) == "scalar") isa = Isa::scalar;
    }
    table = table_for(isa);
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Isa active_isa() { return dispatch().isa; }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
    default:
      return "scalar";
  }
}

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  return cpu_has_avx2();
}

bool force_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  dispatch().isa = isa;
  dispatch().table = table_for(isa);
  return true;
}

void add(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().table->add(a, b, out, n);
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().table->sub(a, b, out, n);
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().table->mul(a, b, out, n);
}

void scale(const double* a, double alpha, double* out, std::size_t n) {
  dispatch().table->scale(a, alpha, out, n);
}

void clamp(const double* a, double lo, double hi, double* out, std::size_t n) {
  dispatch().table->clamp(a, lo, hi, out, n);
}

std::size_t guarded_div(const double* a, const double* b, double* out, std::size_t n,
                        double eps) {
  return dispatch().table->guarded_div(a, b, out, n, eps);
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}

double sum(const double* a, std::size_t n) { return dispatch().table->sum(a, n); }

double sum_squares(const double* a, std::size_t n) {
  return dispatch().table->sum_squares(a, n);
}

void central_diff1(const double* u, double* out, std::size_t n_out, double two_h) {
  dispatch().table->central_diff1(u, out, n_out, two_h);
}

void central_diff2(const double* u, double* out, std::size_t n_out, double h_sq) {
  dispatch().table->central_diff2(u, out, n_out, h_sq);
}

void stencil3(const double* u, double* out, std::size_t n_out, double c_mid,
              double c_side) {
  dispatch().table->stencil3(u, out, n_out, c_mid, c_side);
}

void sin_array(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(a[i]);
}

void cos_array(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::cos(a[i]);
}

void exp_array(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a[i]);
}

}  // namespace eqdisc::kernels
