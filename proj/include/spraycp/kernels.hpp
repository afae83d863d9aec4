#pragma once

// Batch kernels over row-major n x K matrices.
//
// Each kernel has a scalar reference implementation and SIMD variants (AVX2
// on x86-64, NEON on AArch64). The variant is chosen once at runtime from the
// CPU's capabilities. All variants are bit-identical to the scalar reference:
// they only use subtraction, max/min, comparison and blends, none of which is
// subject to reassociation or fused rounding.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace spraycp::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// Widest kernel set this build and CPU support.
Isa detected_isa();
/// Whether `isa` was compiled in and is supported by the running CPU.
bool isa_available(Isa isa);
/// The kernel set used by the dispatched entry points.
Isa active_isa();
/// Pins the dispatched entry points to `isa` (nullopt restores detection).
/// Throws std::invalid_argument if `isa` is unavailable. Not thread-safe;
/// call before starting workers.
void force_isa(std::optional<Isa> isa);

/// Largest supported class count (one bit per class in a mask).
inline constexpr std::size_t kMaxClasses = 64;

/// out[i] = 1 - probs[i] for every entry (IP score of every class).
void ip_scores(std::span<const double> probs, std::span<double> out);

/// Margin score of every class: max over the other classes of the row minus
/// the class's own probability. Requires k >= 2.
void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out);

/// Bit c of masks[i] is set iff scores[i*k + c] <= thresholds[c].
void inclusion_masks(std::span<const double> scores, std::size_t k, std::span<const double> thresholds,
                     std::span<std::uint64_t> masks);

// Individual variants, for equivalence testing and benchmarking.
namespace scalar {
void ip_scores(std::span<const double> probs, std::span<double> out);
void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out);
void inclusion_masks(std::span<const double> scores, std::size_t k, std::span<const double> thresholds,
                     std::span<std::uint64_t> masks);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SPRAYCP_HAVE_AVX2_KERNELS 1
namespace avx2 {
void ip_scores(std::span<const double> probs, std::span<double> out);
void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out);
void inclusion_masks(std::span<const double> scores, std::size_t k, std::span<const double> thresholds,
                     std::span<std::uint64_t> masks);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define SPRAYCP_HAVE_NEON_KERNELS 1
namespace neon {
void ip_scores(std::span<const double> probs, std::span<double> out);
void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out);
void inclusion_masks(std::span<const double> scores, std::size_t k, std::span<const double> thresholds,
                     std::span<std::uint64_t> masks);
}  // namespace neon
#endif

}  // namespace spraycp::kernels
