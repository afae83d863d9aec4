#include "spraycp/scores.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "spraycp/random.hpp"

namespace spraycp {

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::IP: return "ip";
    case ScoreKind::MS: return "ms";
    case ScoreKind::APS: return "aps";
    case ScoreKind::PIP: return "pip";
  }
  return "?";
}

ScoreKind parse_score_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (ScoreKind k : kAllScoreKinds) {
    if (lower == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown score '" + std::string(name) + "' (expected ip, ms, aps or pip)");
}

TieBreak tie_break(std::uint64_t seed, std::string_view example_id) {
  return TieBreak{open_unit(derive_seed(seed, hash_string(example_id)))};
}

namespace {

// Rank order of a row; small K so a local vector is fine.
std::vector<int> order_of(std::span<const double> p) {
  std::vector<int> order(p.size());
  rank_order(p, order);
  return order;
}

}  // namespace

double score_ip(const ProbVector& p, ClassLabel y) { return 1.0 - p.prob(y); }

double score_ms(const ProbVector& p, ClassLabel y) {
  if (p.size() < 2) throw std::invalid_argument("margin score needs at least two classes");
  const std::size_t self = y.zero_based();
  double best = -1.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k != self) best = std::max(best, p[k]);
  }
  return best - p[self];
}

double score_aps(const ProbVector& p, ClassLabel y, TieBreak t) {
  const auto order = order_of(p.values());
  const int self = static_cast<int>(y.zero_based());
  double prefix = 0.0;
  for (int c : order) {
    if (c == self) break;
    prefix += p[static_cast<std::size_t>(c)];
  }
  return prefix + t.u * p[y.zero_based()];
}

double score_pip(const ProbVector& p, ClassLabel y) {
  const auto order = order_of(p.values());
  const int self = static_cast<int>(y.zero_based());
  const double base = 1.0 - p[y.zero_based()];
  if (order.front() == self) return base;
  double penalty = 0.0;
  for (std::size_t r = 0; r < order.size() && order[r] != self; ++r) {
    penalty += p[static_cast<std::size_t>(order[r])] / static_cast<double>(r + 1);
  }
  return base + penalty;
}

double score(ScoreKind kind, const ProbVector& p, ClassLabel y, TieBreak t) {
  switch (kind) {
    case ScoreKind::IP: return score_ip(p, y);
    case ScoreKind::MS: return score_ms(p, y);
    case ScoreKind::APS: return score_aps(p, y, t);
    case ScoreKind::PIP: return score_pip(p, y);
  }
  throw std::invalid_argument("unknown score kind");
}

void score_all(ScoreKind kind, std::span<const double> p, TieBreak t, std::span<double> out) {
  const std::size_t k = p.size();
  switch (kind) {
    case ScoreKind::IP:
      for (std::size_t c = 0; c < k; ++c) out[c] = 1.0 - p[c];
      return;
    case ScoreKind::MS: {
      if (k < 2) throw std::invalid_argument("margin score needs at least two classes");
      // Largest and second largest entry; a tied maximum makes them equal.
      double m1 = -1.0, m2 = -1.0;
      for (double v : p) {
        m2 = std::max(m2, std::min(m1, v));
        m1 = std::max(m1, v);
      }
      for (std::size_t c = 0; c < k; ++c) out[c] = (p[c] == m1 ? m2 : m1) - p[c];
      return;
    }
    case ScoreKind::APS: {
      const auto order = order_of(p);
      double prefix = 0.0;
      for (int c : order) {
        const auto i = static_cast<std::size_t>(c);
        out[i] = prefix + t.u * p[i];
        prefix += p[i];
      }
      return;
    }
    case ScoreKind::PIP: {
      const auto order = order_of(p);
      double penalty = 0.0;
      for (std::size_t r = 0; r < k; ++r) {
        const auto i = static_cast<std::size_t>(order[r]);
        const double base = 1.0 - p[i];
        out[i] = r == 0 ? base : base + penalty;
        penalty += p[i] / static_cast<double>(r + 1);
      }
      return;
    }
  }
}

}  // namespace spraycp
