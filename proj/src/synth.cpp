#include "spraycp/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spraycp/parallel.hpp"
#include "spraycp/random.hpp"

namespace spraycp {

namespace {

void check_priors(const std::vector<double>& priors, int k, const char* what) {
  if (priors.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument(std::string(what) + " must have k=" + std::to_string(k) + " entries");
  }
  double sum = 0.0;
  for (double p : priors) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument(std::string(what) + " must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + " must sum to 1");
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("k must be at least 1");
  check_priors(cfg.priors, cfg.k, "priors");
  if (!(cfg.concentration > 0.0) || !std::isfinite(cfg.concentration)) {
    throw std::invalid_argument("concentration must be positive");
  }
  if (!(cfg.true_boost >= 0.0) || !std::isfinite(cfg.true_boost)) {
    throw std::invalid_argument("true_boost must be non-negative");
  }
  if (cfg.weed.index < 1 || cfg.weed.index > cfg.k) throw std::invalid_argument("weed label outside [1, k]");
  if (!cfg.class_names.empty() && cfg.class_names.size() != static_cast<std::size_t>(cfg.k)) {
    throw std::invalid_argument("class_names must be empty or have k entries");
  }
  if (cfg.shift) {
    if (cfg.shift->priors) check_priors(*cfg.shift->priors, cfg.k, "shift priors");
    if (!(cfg.shift->damping >= 0.0 && cfg.shift->damping < 1.0)) {
      throw std::invalid_argument("shift damping must lie in [0, 1)");
    }
  }
}

const std::vector<std::string>& default_class_names() {
  static const std::vector<std::string> names{"corn", "rapeseed", "sugar_beet", "sunflower", "weed", "background"};
  return names;
}

SynthConfig default_synth_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.k = 6;
  cfg.priors.assign(6, 1.0 / 6.0);
  cfg.concentration = 1.0;
  cfg.true_boost = 4.0;
  cfg.seed = seed;
  cfg.weed = ClassLabel{5};
  cfg.class_names = default_class_names();
  return cfg;
}

Dataset generate(const SynthConfig& cfg, std::size_t n, unsigned workers) {
  validate(cfg);
  if (n == 0) throw std::invalid_argument("n must be at least 1");
  const auto k = static_cast<std::size_t>(cfg.k);
  const auto& priors = cfg.shift && cfg.shift->priors ? *cfg.shift->priors : cfg.priors;
  const double damping = cfg.shift ? cfg.shift->damping : 0.0;
  const std::string prefix = !cfg.id_prefix.empty() ? cfg.id_prefix : !cfg.farm_tag.empty() ? cfg.farm_tag : "ex";

  std::vector<std::optional<Example>> slots(n);
  parallel_for(n, workers, [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, i));
    const std::size_t label = rng.categorical(priors);
    std::vector<double> p(k);
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double shape = cfg.concentration + (c == label ? cfg.true_boost : 0.0);
      p[c] = rng.gamma(shape);
      total += p[c];
    }
    if (!(total > 0.0)) {
      // Every gamma draw underflowed; only possible for tiny shapes.
      p.assign(k, 0.0);
      p[label] = 1.0;
      total = 1.0;
    }
    for (double& v : p) {
      v /= total;
      if (damping > 0.0) v = (1.0 - damping) * v + damping / static_cast<double>(k);
    }
    slots[i] = Example{prefix + "-" + std::to_string(i), cfg.farm_tag, ClassLabel::from_zero_based(label),
                       ProbVector::from(std::move(p))};
  });

  Dataset ds{cfg.k, cfg.weed, cfg.class_names, {}};
  ds.examples.reserve(n);
  for (auto& s : slots) ds.examples.push_back(std::move(*s));
  return ds;
}

std::vector<double> priors_with_weed(int k, ClassLabel weed, double weed_share) {
  if (k < 2) throw std::invalid_argument("need at least two classes");
  if (!(weed_share >= 0.0 && weed_share <= 1.0)) throw std::invalid_argument("weed share must lie in [0, 1]");
  std::vector<double> p(static_cast<std::size_t>(k), (1.0 - weed_share) / static_cast<double>(k - 1));
  p.at(weed.zero_based()) = weed_share;
  return p;
}

Dataset generate_farms(const SynthConfig& base, std::span<const FarmSpec> farms, unsigned workers) {
  validate(base);
  Dataset out{base.k, base.weed, base.class_names, {}};
  for (std::size_t f = 0; f < farms.size(); ++f) {
    const auto& spec = farms[f];
    if (spec.tag.empty()) throw std::invalid_argument("farm " + std::to_string(f + 1) + " has an empty tag");
    SynthConfig cfg = base;
    cfg.seed = derive_seed(base.seed, f + 1);
    cfg.farm_tag = spec.tag;
    cfg.id_prefix = spec.tag;
    cfg.shift.reset();
    if (spec.priors || spec.damping > 0.0) cfg.shift = Shift{spec.priors, spec.damping};
    auto ds = generate(cfg, spec.n, workers);
    for (auto& ex : ds.examples) out.examples.push_back(std::move(ex));
  }
  return out;
}

std::vector<FarmSpec> default_farm_specs(const SynthConfig& base, double damping, std::size_t n_per_farm) {
  static constexpr double kWeedShare[] = {0.10, 0.15, 0.25, 0.35, 0.45, 0.60};
  static constexpr double kDifficulty[] = {0.25, 1.00, 0.50, 0.75, 1.00, 0.50};
  std::vector<FarmSpec> specs;
  for (std::size_t f = 0; f < 6; ++f) {
    specs.push_back(FarmSpec{"farm" + std::to_string(f + 1), n_per_farm, priors_with_weed(base.k, base.weed, kWeedShare[f]),
                             damping * kDifficulty[f]});
  }
  return specs;
}

}  // namespace spraycp
