#pragma once

// Dense float kernels behind the embedding arithmetic. Each kernel has a
// portable scalar reference and an AVX2/FMA variant; the dispatching entry
// points pick the variant once at startup from CPUID. Setting the
// environment variable TTR_FORCE_SCALAR=1 pins the scalar path.

#include <span>
#include <string_view>

namespace ttr::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
/// Overrides dispatch; throws UsageError if the ISA is unavailable here.
void force_isa(Isa isa);

/// Sum of a[i]*b[i], accumulated in double. Sizes must match.
double dot(std::span<const float> a, std::span<const float> b);
/// y += alpha * x. Sizes must match.
void axpy(float alpha, std::span<const float> x, std::span<float> y);
inline double squared_norm(std::span<const float> a) { return dot(a, a); }

namespace scalar {
double dot(std::span<const float> a, std::span<const float> b);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
}  // namespace scalar

namespace avx2 {
double dot(std::span<const float> a, std::span<const float> b);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
}  // namespace avx2

}  // namespace ttr::kernels
