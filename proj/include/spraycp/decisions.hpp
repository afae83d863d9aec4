#pragma once

// Spray / no-spray rules applied to prediction sets.

#include <array>
#include <string>
#include <string_view>

#include "spraycp/conformal.hpp"

namespace spraycp {

enum class SprayRule {
  WeedInSet,      // weed is anywhere in the set
  WeedTop1,       // weed is the lowest-score member
  WeedSingleton,  // the set is exactly {weed}
};

inline constexpr std::array<SprayRule, 3> kAllSprayRules{SprayRule::WeedInSet, SprayRule::WeedTop1,
                                                         SprayRule::WeedSingleton};

std::string_view to_string(SprayRule rule);  // "weed_in_set", "weed_top1", "weed_singleton"
SprayRule parse_spray_rule(std::string_view name);

struct SprayDecision {
  bool spray = false;
  SprayRule rule = SprayRule::WeedInSet;
  std::string example_id;

  friend bool operator==(const SprayDecision&, const SprayDecision&) = default;
};

/// Empty sets never spray.
bool should_spray(SprayRule rule, const PredictionSet& set, ClassLabel weed);

SprayDecision decide(SprayRule rule, const PredictionSet& set, ClassLabel weed, std::string example_id = {});

}  // namespace spraycp
