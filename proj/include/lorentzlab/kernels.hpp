#pragma once

// Data-parallel inner loops of the mesh stencils. Every kernel has a scalar
// reference and an AVX2 variant; the variant is chosen once at runtime from
// the CPU and $LORENTZLAB_SIMD ("scalar" forces the reference path).
// Both variants perform the same IEEE operations in the same order, so their
// outputs are bit-identical.

#include <cstddef>
#include <string_view>

namespace lorentzlab::kernels {

enum class Isa { scalar, avx2 };

bool avx2_available() noexcept;
Isa active_isa() noexcept;
/// Override the dispatch (tests). Requesting avx2 on a CPU without it
/// falls back to scalar.
void force_isa(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// out[j] = (plus[j] - minus[j]) * scale
void difference_scaled(const double* plus, const double* minus, double* out, std::size_t n, double scale);
/// out[j] = ((plus[j] + minus[j]) - 2 * center[j]) * scale
void second_difference(const double* plus, const double* center, const double* minus, double* out,
                       std::size_t n, double scale);
/// out[j] = a[j] * b[j]
void multiply(const double* a, const double* b, double* out, std::size_t n);

namespace scalar {
void difference_scaled(const double* plus, const double* minus, double* out, std::size_t n, double scale);
void second_difference(const double* plus, const double* center, const double* minus, double* out,
                       std::size_t n, double scale);
void multiply(const double* a, const double* b, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void difference_scaled(const double* plus, const double* minus, double* out, std::size_t n, double scale);
void second_difference(const double* plus, const double* center, const double* minus, double* out,
                       std::size_t n, double scale);
void multiply(const double* a, const double* b, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace lorentzlab::kernels
