// NEON is part of the AArch64 baseline; no extra flags are needed.

#include "spraycp/kernels.hpp"

#if defined(SPRAYCP_HAVE_NEON_KERNELS)

#include <arm_neon.h>

#include <algorithm>

namespace spraycp::kernels::neon {

void ip_scores(std::span<const double> probs, std::span<double> out) {
  const std::size_t n = probs.size();
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out.data() + i, vsubq_f64(one, vld1q_f64(probs.data() + i)));
  for (; i < n; ++i) out[i] = 1.0 - probs[i];
}

void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out) {
  const std::size_t n = probs.size() / k;
  std::size_t i = 0;
  // Two rows per iteration, one row per lane.
  for (; i + 2 <= n; i += 2) {
    const double* r0 = probs.data() + i * k;
    const double* r1 = r0 + k;
    float64x2_t m1 = vdupq_n_f64(-1.0);
    float64x2_t m2 = m1;
    for (std::size_t c = 0; c < k; ++c) {
      const float64x2_t x = vcombine_f64(vld1_f64(r0 + c), vld1_f64(r1 + c));
      m2 = vmaxq_f64(m2, vminq_f64(m1, x));
      m1 = vmaxq_f64(m1, x);
    }
    for (std::size_t c = 0; c < k; ++c) {
      const float64x2_t x = vcombine_f64(vld1_f64(r0 + c), vld1_f64(r1 + c));
      const uint64x2_t is_top = vceqq_f64(x, m1);
      const float64x2_t res = vsubq_f64(vbslq_f64(is_top, m2, m1), x);
      out[i * k + c] = vgetq_lane_f64(res, 0);
      out[(i + 1) * k + c] = vgetq_lane_f64(res, 1);
    }
  }
  for (; i < n; ++i) {
    const double* row = probs.data() + i * k;
    double m1 = -1.0, m2 = -1.0;
    for (std::size_t c = 0; c < k; ++c) {
      m2 = std::max(m2, std::min(m1, row[c]));
      m1 = std::max(m1, row[c]);
    }
    for (std::size_t c = 0; c < k; ++c) out[i * k + c] = (row[c] == m1 ? m2 : m1) - row[c];
  }
}

void inclusion_masks(std::span<const double> scores, std::size_t k, std::span<const double> thresholds,
                     std::span<std::uint64_t> masks) {
  const std::size_t n = scores.size() / k;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = scores.data() + i * k;
    std::uint64_t m = 0;
    std::size_t c = 0;
    for (; c + 2 <= k; c += 2) {
      const uint64x2_t le = vcleq_f64(vld1q_f64(row + c), vld1q_f64(thresholds.data() + c));
      m |= (vgetq_lane_u64(le, 0) & 1u) << c;
      m |= (vgetq_lane_u64(le, 1) & 1u) << (c + 1);
    }
    for (; c < k; ++c) {
      if (row[c] <= thresholds[c]) m |= std::uint64_t{1} << c;
    }
    masks[i] = m;
  }
}

}  // namespace spraycp::kernels::neon

#endif
