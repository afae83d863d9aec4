#include <stdexcept>
#include <string>

#include "spraycp/kernels.hpp"

namespace spraycp::kernels {

namespace {

struct KernelTable {
  void (*ip)(std::span<const double>, std::span<double>);
  void (*ms)(std::span<const double>, std::size_t, std::span<double>);
  void (*masks)(std::span<const double>, std::size_t, std::span<const double>, std::span<std::uint64_t>);
};

constexpr KernelTable kScalar{scalar::ip_scores, scalar::ms_scores, scalar::inclusion_masks};
#if defined(SPRAYCP_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{avx2::ip_scores, avx2::ms_scores, avx2::inclusion_masks};
#endif
#if defined(SPRAYCP_HAVE_NEON_KERNELS)
constexpr KernelTable kNeon{neon::ip_scores, neon::ms_scores, neon::inclusion_masks};
#endif

const KernelTable& table_for(Isa isa) {
  switch (isa) {
#if defined(SPRAYCP_HAVE_AVX2_KERNELS)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(SPRAYCP_HAVE_NEON_KERNELS)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

Isa& active() {
  static Isa isa = detected_isa();
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(SPRAYCP_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(SPRAYCP_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return active(); }

void force_isa(std::optional<Isa> isa) {
  if (isa && !isa_available(*isa)) {
    throw std::invalid_argument("kernel set '" + std::string(to_string(*isa)) + "' is not available on this machine");
  }
  active() = isa.value_or(detected_isa());
}

void ip_scores(std::span<const double> probs, std::span<double> out) { table_for(active()).ip(probs, out); }

void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out) {
  if (k < 2) throw std::invalid_argument("margin score needs at least two classes");
  table_for(active()).ms(probs, k, out);
}

void inclusion_masks(std::span<const double> scores, std::size_t k, std::span<const double> thresholds,
                     std::span<std::uint64_t> masks) {
  if (k == 0 || k > kMaxClasses) throw std::invalid_argument("class count must be in [1, 64]");
  table_for(active()).masks(scores, k, thresholds, masks);
}

}  // namespace spraycp::kernels
