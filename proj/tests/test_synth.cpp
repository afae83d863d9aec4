#include <cmath>
#include <vector>

#include "doctest.h"
#include "spraycp/conformal.hpp"
#include "spraycp/metrics.hpp"
#include "spraycp/synth.hpp"

using namespace spraycp;

namespace {

double top1_accuracy(const Dataset& ds) {
  std::size_t hits = 0;
  for (const auto& ex : ds.examples) hits += top1(ex.probs) == ex.label;
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace

TEST_CASE("default config") {
  const auto cfg = default_synth_config(3);
  CHECK(cfg.k == 6);
  CHECK(cfg.weed == ClassLabel{5});
  CHECK(cfg.class_names[4] == "weed");
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("validate rejects broken configs") {
  auto cfg = default_synth_config();
  cfg.priors = {0.5, 0.5};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = default_synth_config();
  cfg.concentration = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = default_synth_config();
  cfg.weed = ClassLabel{7};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = default_synth_config();
  cfg.shift = Shift{std::nullopt, 1.0};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  CHECK_THROWS_AS(generate(default_synth_config(), 0), std::invalid_argument);
}

TEST_CASE("generated datasets are valid and labelled") {
  const auto ds = generate(default_synth_config(1), 500);
  CHECK(ds.size() == 500);
  CHECK_NOTHROW(ds.validate());
  CHECK(ds.examples[7].id == "ex-7");
}

TEST_CASE("generation is deterministic and independent of worker count") {
  const auto cfg = default_synth_config(2);
  const auto a = generate(cfg, 1000, 1);
  CHECK(generate(cfg, 1000, 1) == a);
  CHECK(generate(cfg, 1000, 4) == a);
  CHECK(generate(cfg, 1000, 13) == a);
  auto other = cfg;
  other.seed = 3;
  CHECK_FALSE(generate(other, 1000) == a);
}

TEST_CASE("a prefix of a larger sample is the smaller sample") {
  const auto cfg = default_synth_config(4);
  const auto small = generate(cfg, 50);
  const auto big = generate(cfg, 100);
  for (std::size_t i = 0; i < 50; ++i) CHECK(small.examples[i] == big.examples[i]);
}

TEST_CASE("very large true_boost gives a near-perfect classifier") {
  auto cfg = default_synth_config(5);
  cfg.true_boost = 1e6;
  const auto ds = generate(cfg, 2000);
  CHECK(top1_accuracy(ds) == 1.0);
  for (const auto& ex : ds.examples) CHECK(score_ip(ex.probs, ex.label) < 1e-3);
}

TEST_CASE("true_boost 0 makes probabilities uninformative") {
  // Probabilities are symmetric Dirichlet draws independent of the label, so
  // the argmax is uniform and hits the label with probability 1/K whatever
  // the priors.
  auto cfg = default_synth_config(6);
  cfg.true_boost = 0.0;
  cfg.priors = {0.5, 0.1, 0.1, 0.1, 0.1, 0.1};
  const auto ds = generate(cfg, 60000);
  CHECK(std::abs(top1_accuracy(ds) - 1.0 / 6.0) < 0.008);  // ~5 sd
}

TEST_CASE("labels follow the priors") {
  auto cfg = default_synth_config(7);
  cfg.priors = priors_with_weed(6, cfg.weed, 0.15);
  const auto ds = generate(cfg, 40000);
  std::size_t weeds = 0;
  for (const auto& ex : ds.examples) weeds += ex.label == cfg.weed;
  CHECK(std::abs(static_cast<double>(weeds) / 40000.0 - 0.15) < 0.009);
}

TEST_CASE("damping blends outputs toward uniform") {
  auto cfg = default_synth_config(8);
  const auto plain = generate(cfg, 200);
  cfg.shift = Shift{std::nullopt, 0.5};
  const auto damped = generate(cfg, 200);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(damped.examples[i].label == plain.examples[i].label);
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(damped.examples[i].probs[c] == doctest::Approx(0.5 * plain.examples[i].probs[c] + 0.5 / 6));
    }
  }
}

TEST_CASE("Monte Carlo: downstream coverage at alpha 0.1") {
  const auto pool = generate(default_synth_config(9), 20000);
  std::vector<std::size_t> cal_idx, test_idx;
  for (std::size_t i = 0; i < pool.size(); ++i) (i < 4000 ? cal_idx : test_idx).push_back(i);
  const auto cal = pool.subset(cal_idx);
  const auto test_ds = pool.subset(test_idx);
  const auto model = calibrate(cal, CalibrationMode::Marginal, 0.1, ScoreKind::IP, 0);
  const double cov = empirical_coverage(predict_sets(model, test_ds), test_ds.labels());
  CHECK(cov >= 0.88);
  CHECK(cov <= 0.92);
}

TEST_CASE("generate_farms tags farms and seeds them independently") {
  const auto base = default_synth_config(10);
  const auto specs = default_farm_specs(base, 0.0, 300);
  REQUIRE(specs.size() == 6);
  const auto ds = generate_farms(base, specs, 3);
  CHECK(ds.size() == 1800);
  CHECK(ds.examples[0].farm == "farm1");
  CHECK(ds.examples[0].id == "farm1-0");
  CHECK(ds.examples[300].farm == "farm2");
  CHECK(generate_farms(base, specs, 1) == ds);
  CHECK_FALSE(ds.examples[0].probs == ds.examples[300].probs);
}

TEST_CASE("priors_with_weed") {
  const auto p = priors_with_weed(6, ClassLabel{5}, 0.5);
  CHECK(p[4] == 0.5);
  CHECK(p[0] == 0.1);
  CHECK_THROWS_AS(priors_with_weed(6, ClassLabel{5}, 1.5), std::invalid_argument);
}
