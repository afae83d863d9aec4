#pragma once

// Evaluation at three levels: point classification, conformal sets, and
// spraying decisions.
//
// A ratio whose denominator is zero is reported as missing (std::nullopt),
// never as 0 or 1. Aggregates skip missing values and count them.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spraycp/conformal.hpp"
#include "spraycp/decisions.hpp"

namespace spraycp {

using Metric = std::optional<double>;

struct ConformalReport {
  double coverage = 0.0;
  std::vector<Metric> per_class_coverage;  // size k
  double efficiency = 0.0;                 // mean set size
  double informativeness = 0.0;            // fraction of singletons
  std::size_t n_test = 0;
};

struct SprayReport {
  double sprayed_ratio = 0.0;
  double infestation_level = 0.0;
  double spray_reduction = 0.0;  // 1 - sprayed_ratio
  double spray_surplus = 0.0;    // sprayed_ratio - infestation_level
  Metric precision;              // weed among sprayed
  Metric recall;                 // sprayed among weed
  Metric f1;
  std::size_t n_test = 0;
  std::size_t n_weed = 0;
  std::size_t n_spray = 0;
};

struct ClassMetrics {
  Metric precision;
  Metric recall;
  Metric f1;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> per_class;  // index = zero-based class
  double accuracy = 0.0;
};

/// Throws std::invalid_argument on empty input or mismatched lengths.
double empirical_coverage(std::span<const PredictionSet> sets, std::span<const ClassLabel> labels);
double efficiency(std::span<const PredictionSet> sets);
double informativeness(std::span<const PredictionSet> sets);
/// Missing when no example carries label `y`.
Metric class_conditional_coverage(std::span<const PredictionSet> sets, std::span<const ClassLabel> labels,
                                  ClassLabel y);

ConformalReport conformal_report(std::span<const PredictionSet> sets, std::span<const ClassLabel> labels, int k);

/// Spray is the positive prediction, weed the positive ground truth.
SprayReport spray_metrics(std::span<const SprayDecision> decisions, std::span<const ClassLabel> labels,
                          ClassLabel weed);
SprayReport spray_metrics(std::span<const bool> spray, std::span<const ClassLabel> labels, ClassLabel weed);

/// Harmonic mean; missing if either side is missing, 0 if both are 0.
Metric f1_score(Metric precision, Metric recall);

/// Argmax class, lowest index on ties.
ClassLabel top1(const ProbVector& p);

ClassificationReport classification_metrics(std::span<const ClassLabel> top1, std::span<const ClassLabel> labels,
                                            int k);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Summary {
  Metric mean;
  Metric sd;  // sample standard deviation (n - 1); missing for n < 2
  std::size_t n = 0;
  std::size_t excluded = 0;  // missing inputs skipped
};

/// Ordered reduction: the result depends only on the order of `values`.
Summary summarize(std::span<const Metric> values);
Summary summarize(std::span<const double> values);

}  // namespace spraycp
