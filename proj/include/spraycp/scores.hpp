#pragma once

// Nonconformity scores for classification. Lower means more plausible.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "spraycp/domain.hpp"

namespace spraycp {

enum class ScoreKind { IP, MS, APS, PIP };

inline constexpr std::array<ScoreKind, 4> kAllScoreKinds{ScoreKind::IP, ScoreKind::MS, ScoreKind::APS,
                                                         ScoreKind::PIP};

/// Lower-case name ("ip", "ms", "aps", "pip").
std::string_view to_string(ScoreKind kind);
/// Case-insensitive inverse of to_string. Throws std::invalid_argument.
ScoreKind parse_score_kind(std::string_view name);

/// Uniform draw in (0, 1) for the APS randomized term.
struct TieBreak {
  double u = 0.5;
};

/// The tie-break for one example: a counter-based draw keyed by
/// (seed, example id). One draw serves all K class evaluations of an example.
TieBreak tie_break(std::uint64_t seed, std::string_view example_id);

/// Inverse probability (hinge loss): 1 - p[y].
double score_ip(const ProbVector& p, ClassLabel y);

/// Margin: max_{k != y} p[k] - p[y]. Throws std::invalid_argument when K < 2.
double score_ms(const ProbVector& p, ClassLabel y);

/// Adaptive prediction sets: probability mass ranked strictly above y, plus
/// u times p[y].
double score_aps(const ProbVector& p, ClassLabel y, TieBreak t);

/// Penalized inverse probability: 1 - p[y] plus sum of p^[r] / r over the
/// ranks r above y. Equal to score_ip when y is the top-ranked class.
double score_pip(const ProbVector& p, ClassLabel y);

/// Dispatch on `kind`; `t` only matters for APS.
double score(ScoreKind kind, const ProbVector& p, ClassLabel y, TieBreak t);

/// Scores of every class of one row into `out` (size K). Bit-identical to
/// calling score() once per class.
void score_all(ScoreKind kind, std::span<const double> p, TieBreak t, std::span<double> out);

}  // namespace spraycp
