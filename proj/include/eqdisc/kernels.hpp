#pragma once

#include <cstddef>
#include <string_view>

namespace eqdisc::kernels {

// Inner-loop arithmetic used by the differentiation, library, simulation and
// expression-evaluation code. Every kernel has a scalar reference
// implementation and an AVX2 variant; the variant is selected once at startup
// from CPU capabilities. The two implementations round identically:
//  - elementwise kernels apply the same IEEE operations lane by lane,
//  - reductions accumulate into the same fixed 4-lane pattern before a fixed
//    combine order,
// so results are bit-equal whichever path runs. The equivalence tests assert
// exact equality.

enum class Isa { scalar, avx2 };

Isa active_isa();
std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

// Overrides the dispatch table (used by the equivalence tests). Returns false
// and leaves the table unchanged if the requested ISA is unavailable here.
bool force_isa(Isa isa);

// Elementwise kernels. n == 0 is fine; `out` may alias an input.
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double alpha, double* out, std::size_t n);

// out[i] = min(max(a[i], lo), hi); inputs are assumed finite.
void clamp(const double* a, double lo, double hi, double* out, std::size_t n);

// Division with the guard |b[i]| < eps -> out[i] = 1.0. Returns the number of
// guarded entries.
std::size_t guarded_div(const double* a, const double* b, double* out,
                        std::size_t n, double eps = 1e-12);

// Reductions (fixed 4-lane accumulation, bit-stable across ISAs).
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);

// Stencils read u[0..n_out+1]; `out` must not alias `u`.
// First derivative:  out[i] = (u[i+2] - u[i]) / two_h
void central_diff1(const double* u, double* out, std::size_t n_out, double two_h);
// Second derivative: out[i] = ((u[i] + u[i+2]) - 2*u[i+1]) / h_sq
void central_diff2(const double* u, double* out, std::size_t n_out, double h_sq);
// Explicit diffusion step: out[i] = c_mid*u[i+1] + c_side*(u[i] + u[i+2])
void stencil3(const double* u, double* out, std::size_t n_out, double c_mid,
              double c_side);

// Transcendentals go through libm in every variant (never dispatched) so the
// selected ISA cannot change their values.
void sin_array(const double* a, double* out, std::size_t n);
void cos_array(const double* a, double* out, std::size_t n);
void exp_array(const double* a, double* out, std::size_t n);

}  // namespace eqdisc::kernels
