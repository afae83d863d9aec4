#pragma once

// Core value types: class labels, probability vectors, examples and datasets.
// Every object is represented only through the probability vector emitted by
// some upstream classifier.

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spraycp {

/// Raised for invalid input data (bad probabilities, unknown labels, malformed
/// files). Messages name the offending row or field where one exists.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 1-based class label in {1, ..., K}.
struct ClassLabel {
  int index = 1;

  constexpr std::size_t zero_based() const { return static_cast<std::size_t>(index - 1); }
  static constexpr ClassLabel from_zero_based(std::size_t i) { return ClassLabel{static_cast<int>(i) + 1}; }

  friend constexpr auto operator<=>(const ClassLabel&, const ClassLabel&) = default;
};

/// Sums within this distance of 1 are accepted as-is.
inline constexpr double kProbSumTolerance = 1e-6;
/// Sums within this distance of 1 (but outside kProbSumTolerance) are renormalized.
inline constexpr double kRenormalizeTolerance = 1e-3;

/// A validated K-dimensional probability estimate. Entries are non-negative
/// and sum to 1 within kProbSumTolerance.
class ProbVector {
 public:
  /// Validates `probs`, renormalizing when the sum is off by at most
  /// kRenormalizeTolerance. Throws DataError otherwise.
  static ProbVector from(std::vector<double> probs);

  std::span<const double> values() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t zero_based) const { return probs_[zero_based]; }
  double prob(ClassLabel y) const { return probs_[y.zero_based()]; }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  explicit ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

struct Example {
  std::string id;
  std::string farm;
  ClassLabel label;
  ProbVector probs;

  friend bool operator==(const Example&, const Example&) = default;
};

struct Dataset {
  int k = 0;
  ClassLabel weed;
  std::vector<std::string> class_names;  // empty or exactly k names
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  /// Throws DataError if any invariant is broken.
  void validate() const;

  /// Copy of the header (k, weed, names) with the selected examples, in order.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Row-major n x k matrix of probabilities.
  std::vector<double> prob_matrix() const;

  std::vector<ClassLabel> labels() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Descending-probability ordering of the classes of one ProbVector.
struct RankedProbs {
  std::vector<ClassLabel> order;  // order[r-1] is the class of rank r
  std::vector<int> ranks;         // ranks[k.zero_based()] is the 1-based rank of k

  int rank(ClassLabel y) const { return ranks[y.zero_based()]; }
};

/// Sorts classes by decreasing probability; ties go to the lower class index.
RankedProbs rank_probs(const ProbVector& p);

/// Same ordering computed on a raw row into `order` (zero-based class
/// indices). `order` must have p.size() entries.
void rank_order(std::span<const double> p, std::span<int> order);

}  // namespace spraycp
