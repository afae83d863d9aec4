#include "spraycp/metrics.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace spraycp {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a == 0) throw std::invalid_argument("metric of an empty sample");
  if (a != b) throw std::invalid_argument("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

Metric ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double empirical_coverage(std::span<const PredictionSet> sets, std::span<const ClassLabel> labels) {
  check_lengths(sets.size(), labels.size());
  std::size_t covered = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) covered += sets[i].contains(labels[i]);
  return *ratio(covered, sets.size());
}

double efficiency(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw std::invalid_argument("metric of an empty sample");
  std::size_t total = 0;
  for (const auto& s : sets) total += s.size();
  return *ratio(total, sets.size());
}

double informativeness(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw std::invalid_argument("metric of an empty sample");
  std::size_t singletons = 0;
  for (const auto& s : sets) singletons += s.size() == 1;
  return *ratio(singletons, sets.size());
}

Metric class_conditional_coverage(std::span<const PredictionSet> sets, std::span<const ClassLabel> labels,
                                  ClassLabel y) {
  check_lengths(sets.size(), labels.size());
  std::size_t covered = 0, total = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (labels[i] != y) continue;
    ++total;
    covered += sets[i].contains(y);
  }
  return ratio(covered, total);
}

ConformalReport conformal_report(std::span<const PredictionSet> sets, std::span<const ClassLabel> labels, int k) {
  ConformalReport r;
  r.coverage = empirical_coverage(sets, labels);
  r.efficiency = efficiency(sets);
  r.informativeness = informativeness(sets);
  r.n_test = sets.size();
  r.per_class_coverage.reserve(static_cast<std::size_t>(k));
  for (int c = 1; c <= k; ++c) r.per_class_coverage.push_back(class_conditional_coverage(sets, labels, ClassLabel{c}));
  return r;
}

Metric f1_score(Metric precision, Metric recall) {
  if (!precision || !recall) return std::nullopt;
  if (*precision + *recall == 0.0) return 0.0;
  return 2.0 * *precision * *recall / (*precision + *recall);
}

SprayReport spray_metrics(std::span<const bool> spray, std::span<const ClassLabel> labels, ClassLabel weed) {
  check_lengths(spray.size(), labels.size());
  SprayReport r;
  r.n_test = spray.size();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < spray.size(); ++i) {
    const bool is_weed = labels[i] == weed;
    r.n_weed += is_weed;
    r.n_spray += spray[i];
    hits += spray[i] && is_weed;
  }
  r.sprayed_ratio = *ratio(r.n_spray, r.n_test);
  r.infestation_level = *ratio(r.n_weed, r.n_test);
  r.spray_reduction = 1.0 - r.sprayed_ratio;
  r.spray_surplus = r.sprayed_ratio - r.infestation_level;
  r.precision = ratio(hits, r.n_spray);
  r.recall = ratio(hits, r.n_weed);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

SprayReport spray_metrics(std::span<const SprayDecision> decisions, std::span<const ClassLabel> labels,
                          ClassLabel weed) {
  // std::vector<bool> has no contiguous storage.
  std::unique_ptr<bool[]> flags(new bool[decisions.size()]);
  for (std::size_t i = 0; i < decisions.size(); ++i) flags[i] = decisions[i].spray;
  return spray_metrics(std::span<const bool>(flags.get(), decisions.size()), labels, weed);
}

ClassLabel top1(const ProbVector& p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return ClassLabel::from_zero_based(best);
}

ClassificationReport classification_metrics(std::span<const ClassLabel> predicted, std::span<const ClassLabel> labels,
                                            int k) {
  check_lengths(predicted.size(), labels.size());
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::size_t> tp(kk, 0), pred(kk, 0), support(kk, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto p = predicted[i].zero_based(), y = labels[i].zero_based();
    if (p >= kk || y >= kk) throw std::invalid_argument("label outside [1, k]");
    ++pred[p];
    ++support[y];
    if (p == y) {
      ++tp[p];
      ++correct;
    }
  }
  ClassificationReport r;
  r.accuracy = *ratio(correct, predicted.size());
  r.per_class.resize(kk);
  for (std::size_t c = 0; c < kk; ++c) {
    auto& m = r.per_class[c];
    m.precision = ratio(tp[c], pred[c]);
    m.recall = ratio(tp[c], support[c]);
    m.f1 = f1_score(m.precision, m.recall);
    m.support = support[c];
  }
  return r;
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

Summary summarize(std::span<const Metric> values) {
  Summary s;
  CompensatedSum sum;
  for (const auto& v : values) {
    if (!v) {
      ++s.excluded;
      continue;
    }
    sum.add(*v);
    ++s.n;
  }
  if (s.n == 0) return s;
  const double mean = sum.value() / static_cast<double>(s.n);
  s.mean = mean;
  if (s.n >= 2) {
    CompensatedSum sq;
    for (const auto& v : values) {
      if (v) sq.add((*v - mean) * (*v - mean));
    }
    s.sd = std::sqrt(sq.value() / static_cast<double>(s.n - 1));
  }
  return s;
}

Summary summarize(std::span<const double> values) {
  std::vector<Metric> wrapped(values.begin(), values.end());
  return summarize(std::span<const Metric>(wrapped));
}

}  // namespace spraycp
