#pragma once

// Experiment protocols.
//
// Experiment 1 resplits one pool into calibration and test sets many times
// (in-distribution); Experiment 2 calibrates once and evaluates farm by farm
// on a second population (near out-of-distribution).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spraycp/conformal.hpp"
#include "spraycp/decisions.hpp"
#include "spraycp/metrics.hpp"

namespace spraycp {

enum class Infestation { Low, Medium, High };

std::string_view to_string(Infestation level);

/// Low below 0.2, Medium on [0.2, 0.4], High above 0.4.
Infestation categorize_infestation(double level);

struct ExperimentConfig {
  double alpha = 0.1;
  std::vector<ScoreKind> scores{kAllScoreKinds.begin(), kAllScoreKinds.end()};
  CalibrationMode mode = CalibrationMode::ClassConditional;
  std::size_t repetitions = 100;
  double cal_fraction = 0.45;  // share of the pool used for calibration
  std::uint64_t seed = 0;
  std::vector<SprayRule> rules{kAllSprayRules.begin(), kAllSprayRules.end()};
  unsigned workers = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// One calibrate/predict/evaluate pass: a repetition (Experiment 1) or a
/// farm (Experiment 2) for one score kind.
struct RunResult {
  std::size_t index = 0;  // repetition or farm number
  std::string farm;       // Experiment 2 only
  ScoreKind score = ScoreKind::IP;
  bool failed = false;
  std::string error;
  std::vector<std::string> warnings;
  std::size_t n_cal = 0;
  ConformalReport conformal;
  std::vector<SprayReport> spray;  // parallel to ExperimentReport::rules
  Infestation category = Infestation::Low;
};

struct AggregateRow {
  ScoreKind score = ScoreKind::IP;
  SprayRule rule = SprayRule::WeedInSet;
  std::string group;  // "all" or an infestation category
  std::size_t n_runs = 0;
  std::size_t n_failed = 0;
  Summary coverage, weed_coverage, efficiency, informativeness;
  Summary sprayed_ratio, infestation_level, spray_reduction, spray_surplus, precision, recall, f1;
};

struct ExperimentReport {
  std::string protocol;  // "exp1" or "exp2"
  int k = 0;
  ClassLabel weed;
  double alpha = 0.0;
  CalibrationMode mode = CalibrationMode::Marginal;
  std::vector<SprayRule> rules;
  std::vector<RunResult> runs;  // ordered by (index, score)
  std::vector<AggregateRow> aggregate;
  std::size_t n_failed = 0;

  /// Per-class summary of coverage across the successful runs of `score`.
  std::vector<Summary> class_coverage(ScoreKind score) const;
};

/// Disjoint calibration and test indices covering [0, n), drawn from `seed`.
struct Split {
  std::vector<std::size_t> cal;
  std::vector<std::size_t> test;
};
Split split_pool(std::size_t n, double cal_fraction, std::uint64_t seed);

/// Seed of repetition `rep` (splitmix derivation).
std::uint64_t repetition_seed(std::uint64_t seed, std::size_t rep);

/// Throws DataError if the pool is too small to split.
ExperimentReport run_experiment1(const Dataset& pool, const ExperimentConfig& cfg);

/// Calibrates once per score on `cal`, then evaluates each farm of
/// `new_farms` (grouped by exact farm tag, in order of first appearance).
ExperimentReport run_experiment2(const Dataset& cal, const Dataset& new_farms, const ExperimentConfig& cfg);

/// Tidy CSV: one row per run and rule.
void write_runs_csv(const ExperimentReport& report, std::ostream& out);
/// One row per run and class.
void write_class_coverage_csv(const ExperimentReport& report, std::ostream& out);
/// One row per (score, rule, group).
void write_aggregate_csv(const ExperimentReport& report, std::ostream& out);

}  // namespace spraycp
