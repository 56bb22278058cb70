#include "ttr/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "ttr/error.hpp"

namespace ttr::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("TTR_FORCE_SCALAR"); env && std::string(env) == "1") {
    return Isa::Scalar;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) {
    throw UsageError("kernel size mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw UsageError("ISA " + std::string(to_string(isa)) + " not available on this CPU");
  }
  current().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const float> a, std::span<const float> b) {
  check_sizes(a.size(), b.size());
  return active_isa() == Isa::Avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  check_sizes(x.size(), y.size());
  if (active_isa() == Isa::Avx2) {
    avx2::axpy(alpha, x, y);
  } else {
    scalar::axpy(alpha, x, y);
  }
}

}  // namespace ttr::kernels
