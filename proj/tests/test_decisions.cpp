#include <vector>

#include "doctest.h"
#include "spraycp/decisions.hpp"
#include "support.hpp"

using namespace spraycp;

namespace {

constexpr ClassLabel kCorn{1};
constexpr ClassLabel kWeed{5};

PredictionSet set_of(std::vector<ClassLabel> members) {
  PredictionSet s;
  for (std::size_t i = 0; i < members.size(); ++i) s.scores.push_back(0.1 * static_cast<double>(i));
  s.members = std::move(members);
  return s;
}

}  // namespace

TEST_CASE("weed ranked first") {
  const auto s = set_of({kWeed, kCorn});
  CHECK(should_spray(SprayRule::WeedInSet, s, kWeed));
  CHECK(should_spray(SprayRule::WeedTop1, s, kWeed));
  CHECK_FALSE(should_spray(SprayRule::WeedSingleton, s, kWeed));
}

TEST_CASE("weed ranked second") {
  const auto s = set_of({kCorn, kWeed});
  CHECK(should_spray(SprayRule::WeedInSet, s, kWeed));
  CHECK_FALSE(should_spray(SprayRule::WeedTop1, s, kWeed));
  CHECK_FALSE(should_spray(SprayRule::WeedSingleton, s, kWeed));
}

TEST_CASE("empty set never sprays") {
  for (auto rule : kAllSprayRules) CHECK_FALSE(should_spray(rule, PredictionSet{}, kWeed));
}

TEST_CASE("weed singleton sprays under every rule") {
  for (auto rule : kAllSprayRules) CHECK(should_spray(rule, set_of({kWeed}), kWeed));
  for (auto rule : kAllSprayRules) CHECK_FALSE(should_spray(rule, set_of({kCorn}), kWeed));
}

TEST_CASE("decide carries the rule and id") {
  const auto d = decide(SprayRule::WeedTop1, set_of({kWeed}), kWeed, "img-3");
  CHECK(d.spray);
  CHECK(d.rule == SprayRule::WeedTop1);
  CHECK(d.example_id == "img-3");
}

TEST_CASE("rule names round-trip") {
  for (auto rule : kAllSprayRules) CHECK(parse_spray_rule(to_string(rule)) == rule);
  CHECK_THROWS_AS(parse_spray_rule("always"), std::invalid_argument);
}

TEST_CASE("property: singleton implies top1 implies in-set") {
  Rng rng(61);
  for (int trial = 0; trial < 20000; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(8));
    std::vector<ClassLabel> members;
    for (int c = 1; c <= k; ++c) {
      if (rng.below(2) == 0) members.push_back(ClassLabel{c});
    }
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    const auto s = set_of(members);
    const ClassLabel weed{1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)))};
    const bool single = should_spray(SprayRule::WeedSingleton, s, weed);
    const bool top = should_spray(SprayRule::WeedTop1, s, weed);
    const bool in = should_spray(SprayRule::WeedInSet, s, weed);
    CHECK((!single || top));
    CHECK((!top || in));
    CHECK(in == s.contains(weed));
  }
}
