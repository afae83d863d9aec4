#pragma once

// Split-conformal calibration (marginal and class-conditional) and
// prediction-set construction.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spraycp/domain.hpp"
#include "spraycp/scores.hpp"

namespace spraycp {

enum class CalibrationMode { Marginal, ClassConditional };

std::string_view to_string(CalibrationMode mode);  // "marginal" / "class-conditional"
CalibrationMode parse_calibration_mode(std::string_view name);

struct CalibrationModel {
  CalibrationMode mode = CalibrationMode::Marginal;
  double alpha = 0.1;
  ScoreKind kind = ScoreKind::IP;
  std::uint64_t seed = 0;  // keys the APS tie-break stream
  int k = 0;
  std::vector<double> quantiles;          // 1 (marginal) or k (class-conditional)
  std::size_t n_cal = 0;
  std::vector<std::size_t> class_counts;  // calibration examples per class, size k
  std::vector<std::string> warnings;      // not serialized

  /// Inclusion threshold for class `y`.
  double threshold(ClassLabel y) const {
    return mode == CalibrationMode::Marginal ? quantiles.front() : quantiles[y.zero_based()];
  }
  /// Thresholds for all k classes.
  std::vector<double> thresholds() const;

  friend bool operator==(const CalibrationModel& a, const CalibrationModel& b) {
    return a.mode == b.mode && a.alpha == b.alpha && a.kind == b.kind && a.seed == b.seed && a.k == b.k &&
           a.quantiles == b.quantiles && a.n_cal == b.n_cal && a.class_counts == b.class_counts;
  }
};

/// Classes judged plausible for one object, ascending by nonconformity score
/// (ties by class index). May be empty.
struct PredictionSet {
  std::vector<ClassLabel> members;
  std::vector<double> scores;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  bool contains(ClassLabel y) const;
  std::optional<ClassLabel> top() const {
    return members.empty() ? std::nullopt : std::optional<ClassLabel>(members.front());
  }

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

/// ceil((n+1)(1-alpha)), with products within 1e-9 of an integer snapped to
/// it so decimal alphas such as 0.1 behave as written.
std::size_t conformal_rank(std::size_t n, double alpha);

/// The conformal_rank(n, alpha)-th smallest score; +inf when that rank
/// exceeds n. Throws std::invalid_argument for empty input or alpha outside
/// (0, 1).
double conformal_quantile(std::span<const double> scores, double alpha);

/// Throws DataError on an empty calibration set.
CalibrationModel calibrate_marginal(const Dataset& cal, double alpha, ScoreKind kind, std::uint64_t seed);

/// One quantile per class from that class's examples only. A class with no
/// examples (or too few for alpha) gets +inf and a warning.
CalibrationModel calibrate_class_conditional(const Dataset& cal, double alpha, ScoreKind kind, std::uint64_t seed);

CalibrationModel calibrate(const Dataset& cal, CalibrationMode mode, double alpha, ScoreKind kind,
                           std::uint64_t seed);

/// Nonconformity score of each example's true class (the calibration scores).
std::vector<double> true_class_scores(const Dataset& ds, ScoreKind kind, std::uint64_t seed);

PredictionSet predict_set(const CalibrationModel& model, const ProbVector& p, std::string_view example_id);

/// Prediction sets for every example of `ds`, through the batch kernels.
/// Identical to calling predict_set per example.
std::vector<PredictionSet> predict_sets(const CalibrationModel& model, const Dataset& ds);

/// Versioned text form. Quantiles are written with 17 significant digits.
std::string serialize_model(const CalibrationModel& model);
/// Throws DataError naming the offending line.
CalibrationModel parse_model(std::string_view text);

}  // namespace spraycp
