#include "spraycp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace spraycp {

ProbVector ProbVector::from(std::vector<double> probs) {
  if (probs.empty()) throw DataError("probability vector is empty");
  double sum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double v = probs[k];
    if (!std::isfinite(v) || v < 0.0) {
      throw DataError("probability for class " + std::to_string(k + 1) + " is " + std::to_string(v) +
                      "; entries must be finite and non-negative");
    }
    probs[k] = v + 0.0;  // -0.0 -> +0.0
    sum += v;
  }
  const double off = std::abs(sum - 1.0);
  if (off > kRenormalizeTolerance) {
    throw DataError("probabilities sum to " + std::to_string(sum) + ", beyond the 1e-3 tolerance");
  }
  if (off > kProbSumTolerance) {
    for (double& v : probs) v /= sum;
  }
  return ProbVector(std::move(probs));
}

void Dataset::validate() const {
  if (k < 1) throw DataError("class count k must be at least 1");
  if (weed.index < 1 || weed.index > k) {
    throw DataError("weed label " + std::to_string(weed.index) + " is outside [1, " + std::to_string(k) + "]");
  }
  if (!class_names.empty() && class_names.size() != static_cast<std::size_t>(k)) {
    throw DataError("expected " + std::to_string(k) + " class names, got " + std::to_string(class_names.size()));
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (ex.probs.size() != static_cast<std::size_t>(k)) {
      throw DataError("example " + std::to_string(i) + " (" + ex.id + ") has " + std::to_string(ex.probs.size()) +
                      " probabilities, expected " + std::to_string(k));
    }
    if (ex.label.index < 1 || ex.label.index > k) {
      throw DataError("example " + std::to_string(i) + " (" + ex.id + ") has unknown label " +
                      std::to_string(ex.label.index));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out{k, weed, class_names, {}};
  out.examples.reserve(indices.size());
  for (std::size_t i : indices) out.examples.push_back(examples.at(i));
  return out;
}

std::vector<double> Dataset::prob_matrix() const {
  std::vector<double> m;
  m.reserve(examples.size() * static_cast<std::size_t>(k));
  for (const auto& ex : examples) {
    auto v = ex.probs.values();
    m.insert(m.end(), v.begin(), v.end());
  }
  return m;
}

std::vector<ClassLabel> Dataset::labels() const {
  std::vector<ClassLabel> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(ex.label);
  return out;
}

void rank_order(std::span<const double> p, std::span<int> order) {
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (p[a] != p[b]) return p[a] > p[b];
    return a < b;
  });
}

RankedProbs rank_probs(const ProbVector& p) {
  const std::size_t k = p.size();
  std::vector<int> order(k);
  rank_order(p.values(), order);
  RankedProbs out;
  out.order.reserve(k);
  out.ranks.assign(k, 0);
  for (std::size_t r = 0; r < k; ++r) {
    out.order.push_back(ClassLabel::from_zero_based(static_cast<std::size_t>(order[r])));
    out.ranks[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
  }
  return out;
}

}  // namespace spraycp
