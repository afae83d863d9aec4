// Compiled with -mavx2. Only called after the dispatcher has confirmed AVX2.

#include <immintrin.h>

#include <algorithm>

#include "spraycp/kernels.hpp"

namespace spraycp::kernels::avx2 {

void ip_scores(std::span<const double> probs, std::span<double> out) {
  const std::size_t n = probs.size();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, _mm256_sub_pd(one, _mm256_loadu_pd(probs.data() + i)));
  }
  for (; i < n; ++i) out[i] = 1.0 - probs[i];
}

void ms_scores(std::span<const double> probs, std::size_t k, std::span<double> out) {
  const std::size_t n = probs.size() / k;
  const auto stride = static_cast<long long>(k);
  // Four rows per iteration, one row per lane.
  const __m256i lane_offsets = _mm256_set_epi64x(3 * stride, 2 * stride, stride, 0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* base = probs.data() + i * k;
    __m256d m1 = _mm256_set1_pd(-1.0);
    __m256d m2 = m1;
    for (std::size_t c = 0; c < k; ++c) {
      const __m256d x = _mm256_i64gather_pd(base + c, lane_offsets, 8);
      m2 = _mm256_max_pd(m2, _mm256_min_pd(m1, x));
      m1 = _mm256_max_pd(m1, x);
    }
    alignas(32) double res[4];
    for (std::size_t c = 0; c < k; ++c) {
      const __m256d x = _mm256_i64gather_pd(base + c, lane_offsets, 8);
      const __m256d is_top = _mm256_cmp_pd(x, m1, _CMP_EQ_OQ);
      const __m256d others = _mm256_blendv_pd(m1, m2, is_top);
      _mm256_store_pd(res, _mm256_sub_pd(others, x));
      double* dst = out.data() + i * k + c;
      dst[0] = res[0];
      dst[k] = res[1];
      dst[2 * k] = res[2];
      dst[3 * k] = res[3];
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
    for (; c + 4 <= k; c += 4) {
      const __m256d le = _mm256_cmp_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(thresholds.data() + c), _CMP_LE_OQ);
      m |= static_cast<std::uint64_t>(_mm256_movemask_pd(le)) << c;
    }
    for (; c < k; ++c) {
      if (row[c] <= thresholds[c]) m |= std::uint64_t{1} << c;
    }
    masks[i] = m;
  }
}

}  // namespace spraycp::kernels::avx2
