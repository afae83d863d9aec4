#include "spraycp/decisions.hpp"

#include <stdexcept>

namespace spraycp {

std::string_view to_string(SprayRule rule) {
  switch (rule) {
    case SprayRule::WeedInSet: return "weed_in_set";
    case SprayRule::WeedTop1: return "weed_top1";
    case SprayRule::WeedSingleton: return "weed_singleton";
  }
  return "?";
}

SprayRule parse_spray_rule(std::string_view name) {
  for (SprayRule r : kAllSprayRules) {
    if (name == to_string(r)) return r;
  }
  if (name == "in-set" || name == "inset") return SprayRule::WeedInSet;
  if (name == "top1" || name == "top-1") return SprayRule::WeedTop1;
  if (name == "singleton") return SprayRule::WeedSingleton;
  throw std::invalid_argument("unknown spray rule '" + std::string(name) + "'");
}

bool should_spray(SprayRule rule, const PredictionSet& set, ClassLabel weed) {
  switch (rule) {
    case SprayRule::WeedInSet: return set.contains(weed);
    case SprayRule::WeedTop1: return !set.empty() && set.members.front() == weed;
    case SprayRule::WeedSingleton: return set.size() == 1 && set.members.front() == weed;
  }
  return false;
}

SprayDecision decide(SprayRule rule, const PredictionSet& set, ClassLabel weed, std::string example_id) {
  return SprayDecision{should_spray(rule, set, weed), rule, std::move(example_id)};
}

}  // namespace spraycp
