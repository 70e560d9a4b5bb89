#include "lorentzlab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace lorentzlab::kernels {

namespace scalar {

void difference_scaled(const double* plus, const double* minus, double* out, std::size_t n, double scale) {
  for (std::size_t j = 0; j < n; ++j) out[j] = (plus[j] - minus[j]) * scale;
}

void second_difference(const double* plus, const double* center, const double* minus, double* out,
                       std::size_t n, double scale) {
  for (std::size_t j = 0; j < n; ++j) {
    double sum = plus[j] + minus[j];
    double twice = 2.0 * center[j];
    out[j] = (sum - twice) * scale;
  }
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = a[j] * b[j];
}

}  // namespace scalar

namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("LORENTZLAB_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
  }
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_available() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && !avx2_available()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void difference_scaled(const double* plus, const double* minus, double* out, std::size_t n, double scale) {
#if defined(__x86_64__)
  if (active_isa() == Isa::avx2) return avx2::difference_scaled(plus, minus, out, n, scale);
#endif
  scalar::difference_scaled(plus, minus, out, n, scale);
}

void second_difference(const double* plus, const double* center, const double* minus, double* out,
                       std::size_t n, double scale) {
#if defined(__x86_64__)
  if (active_isa() == Isa::avx2) return avx2::second_difference(plus, center, minus, out, n, scale);
#endif
  scalar::second_difference(plus, center, minus, out, n, scale);
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
#if defined(__x86_64__)
  if (active_isa() == Isa::avx2) return avx2::multiply(a, b, out, n);
#endif
  scalar::multiply(a, b, out, n);
}

}  // namespace lorentzlab::kernels
