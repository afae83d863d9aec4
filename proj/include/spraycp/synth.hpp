#pragma once

// Synthetic classifier outputs with a known label-conditional distribution.
//
// Each example draws its label from `priors`, then its probability vector
// from Dirichlet(concentration + true_boost * [k == label]). Examples are
// i.i.d. given the configuration, hence exchangeable, which is exactly the
// condition under which conformal coverage holds. A Shift perturbs new-farm
// data: it may re-weight the label priors and blend outputs toward the
// uniform vector, making the classifier less confident than it was on the
// calibration population.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spraycp/domain.hpp"

namespace spraycp {

struct Shift {
  std::optional<std::vector<double>> priors;  // replaces the config priors
  double damping = 0.0;                       // p <- (1 - damping) p + damping / K, in [0, 1)
};

struct SynthConfig {
  int k = 6;
  std::vector<double> priors;  // k entries summing to 1
  double concentration = 1.0;
  double true_boost = 4.0;
  std::optional<Shift> shift;
  std::uint64_t seed = 0;
  std::string farm_tag;
  ClassLabel weed{5};
  std::vector<std::string> class_names;  // empty or k names
  std::string id_prefix;                 // defaults to farm_tag, or "ex"
};

/// Throws std::invalid_argument describing the first broken invariant.
void validate(const SynthConfig& cfg);

/// K=6 crop/weed/background configuration with balanced priors.
SynthConfig default_synth_config(std::uint64_t seed = 0);

/// Class names used by default_synth_config (weed is label 5).
const std::vector<std::string>& default_class_names();

/// n examples. Example i uses the stream derive_seed(cfg.seed, i), so the
/// output is independent of `workers`.
Dataset generate(const SynthConfig& cfg, std::size_t n, unsigned workers = 1);

/// One farm of a multi-farm population.
struct FarmSpec {
  std::string tag;
  std::size_t n = 0;
  std::optional<std::vector<double>> priors;  // label priors on this farm
  double damping = 0.0;                       // confidence damping on this farm
};

/// Concatenation of one dataset per farm. Farm f uses seed
/// derive_seed(base.seed, f + 1) and ids "<tag>-<i>"; `base.shift` is ignored.
Dataset generate_farms(const SynthConfig& base, std::span<const FarmSpec> farms, unsigned workers = 1);

/// Priors of `k` classes with `weed_share` on the weed label and the rest
/// spread evenly.
std::vector<double> priors_with_weed(int k, ClassLabel weed, double weed_share);

/// Six farms spanning low, medium and high infestation. Farm difficulty
/// varies: each farm's damping is `damping` times a fixed per-farm factor in
/// (0, 1], so damping = 0 gives in-distribution farms.
std::vector<FarmSpec> default_farm_specs(const SynthConfig& base, double damping, std::size_t n_per_farm = 6000);

}  // namespace spraycp
