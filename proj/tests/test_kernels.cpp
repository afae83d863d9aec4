#include <bit>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "spraycp/kernels.hpp"
#include "support.hpp"

using namespace spraycp;
using namespace spraycp::kernels;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> random_matrix(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<double> m;
  m.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = test::random_row(rng, k);
    m.insert(m.end(), row.begin(), row.end());
  }
  return m;
}

struct Variant {
  Isa isa;
  void (*ip)(std::span<const double>, std::span<double>);
  void (*ms)(std::span<const double>, std::size_t, std::span<double>);
  void (*masks)(std::span<const double>, std::size_t, std::span<const double>, std::span<std::uint64_t>);
};

std::vector<Variant> simd_variants() {
  std::vector<Variant> out;
#ifdef SPRAYCP_HAVE_AVX2_KERNELS
  if (isa_available(Isa::Avx2)) out.push_back({Isa::Avx2, avx2::ip_scores, avx2::ms_scores, avx2::inclusion_masks});
#endif
#ifdef SPRAYCP_HAVE_NEON_KERNELS
  if (isa_available(Isa::Neon)) out.push_back({Isa::Neon, neon::ip_scores, neon::ms_scores, neon::inclusion_masks});
#endif
  return out;
}

}  // namespace

TEST_CASE("scalar reference kernels") {
  const std::vector<double> p{0.7, 0.2, 0.1, 0.5, 0.5, 0.0};
  std::vector<double> out(6);
  scalar::ip_scores(p, out);
  CHECK(out[0] == 1.0 - 0.7);
  CHECK(out[5] == 1.0);

  scalar::ms_scores(p, 3, out);
  CHECK(out[0] == 0.2 - 0.7);
  CHECK(out[1] == 0.7 - 0.2);
  CHECK(out[2] == 0.7 - 0.1);
  CHECK(out[3] == 0.0);
  CHECK(out[4] == 0.0);
  CHECK(out[5] == 0.5);

  const std::vector<double> thr{0.0, 0.5, 0.6};
  std::vector<std::uint64_t> masks(2);
  scalar::inclusion_masks(out, 3, thr, masks);
  CHECK(masks[0] == 0b111);  // 0.6 <= 0.6 is inclusive
  CHECK(masks[1] == 0b111);
}

TEST_CASE("dispatch reports a usable ISA") {
  CHECK(isa_available(Isa::Scalar));
  CHECK(isa_available(detected_isa()));
  force_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  force_isa(std::nullopt);
  CHECK(active_isa() == detected_isa());
  MESSAGE("active kernels: " << to_string(active_isa()));
}

TEST_CASE("dispatched kernels validate their arguments") {
  std::vector<double> p(4, 0.25), out(4);
  CHECK_THROWS_AS(ms_scores(p, 1, out), std::invalid_argument);
  std::vector<double> thr(4, 0.5);
  std::vector<std::uint64_t> masks(1);
  CHECK_THROWS_AS(inclusion_masks(p, 0, thr, masks), std::invalid_argument);
}

TEST_CASE("SIMD kernels are bit-identical to scalar") {
  const auto variants = simd_variants();
  if (variants.empty()) MESSAGE("no SIMD variant available on this CPU; only scalar tested");
  Rng rng(101);
  for (const auto& v : variants) {
    CAPTURE(to_string(v.isa));
    // Row counts cover the 4-row blocks and every tail length; k covers
    // widths narrower and wider than one vector.
    for (std::size_t k : {2u, 3u, 4u, 5u, 6u, 7u, 8u, 13u, 64u}) {
      for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 257u}) {
        CAPTURE(k);
        CAPTURE(n);
        const auto m = random_matrix(rng, n, k);
        std::vector<double> ref(n * k), got(n * k);

        scalar::ip_scores(m, ref);
        v.ip(m, got);
        CHECK(same_bits(ref, got));

        scalar::ms_scores(m, k, ref);
        v.ms(m, k, got);
        CHECK(same_bits(ref, got));

        std::vector<double> thr(k);
        for (auto& t : thr) t = rng.below(5) == 0 ? ref.empty() ? 0.0 : ref[rng.below(ref.size())] : rng.uniform() * 2 - 1;
        std::vector<std::uint64_t> mref(n), mgot(n);
        scalar::inclusion_masks(ref, k, thr, mref);
        v.masks(ref, k, thr, mgot);
        CHECK(mref == mgot);
      }
    }
  }
}

TEST_CASE("SIMD inclusion masks handle infinite thresholds and exact ties") {
  Rng rng(7);
  for (const auto& v : simd_variants()) {
    const std::size_t k = 6, n = 37;
    auto scores = random_matrix(rng, n, k);
    std::vector<double> thr{std::numeric_limits<double>::infinity(), scores[1], scores[2], -1.0, scores[4], 0.5};
    std::vector<std::uint64_t> a(n), b(n);
    scalar::inclusion_masks(scores, k, thr, a);
    v.masks(scores, k, thr, b);
    CHECK(a == b);
    CHECK((a[0] & 0b10110) == 0b10110);
    for (auto m : a) CHECK((m & 1u) == 1u);
  }
}

TEST_CASE("dispatched entry points agree under every available ISA") {
  Rng rng(55);
  const std::size_t n = 123, k = 6;
  const auto m = random_matrix(rng, n, k);
  std::vector<double> base(n * k);
  force_isa(Isa::Scalar);
  ms_scores(m, k, base);
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (!isa_available(isa)) {
      CHECK_THROWS_AS(force_isa(isa), std::invalid_argument);
      continue;
    }
    force_isa(isa);
    std::vector<double> got(n * k);
    ms_scores(m, k, got);
    CHECK(same_bits(base, got));
  }
  force_isa(std::nullopt);
}
