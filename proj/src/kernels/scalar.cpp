#include <algorithm>

#include "spraycp/kernels.hpp"

namespace spraycp::kernels::scalar {

void ip_scores(std::span<const double> probs, std::span<double> out) {
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = 1.0 - probs[i];
}

void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out) {
  const std::size_t n = probs.size() / k;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs.data() + i * k;
    double* dst = out.data() + i * k;
    for (std::size_t c = 0; c < k; ++c) {
      double best = -1.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j != c) best = std::max(best, row[j]);
      }
      dst[c] = best - row[c];
    }
  }
}

void inclusion_masks(std::span<const double> scores, std::size_t k, std::span<const double> thresholds,
                     std::span<std::uint64_t> masks) {
  const std::size_t n = scores.size() / k;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = scores.data() + i * k;
    std::uint64_t m = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (row[c] <= thresholds[c]) m |= std::uint64_t{1} << c;
    }
    masks[i] = m;
  }
}

}  // namespace spraycp::kernels::scalar
