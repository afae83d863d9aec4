#include "spraycp/conformal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "spraycp/kernels.hpp"
#include "spraycp/text.hpp"

namespace spraycp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::string_view kModelMagic = "spraycp-model";
constexpr int kModelVersion = 1;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1), got " + text::format_double(alpha));
  }
}

std::string vacuous_warning(std::string_view what, std::size_t n, double alpha) {
  return std::string(what) + ": " + std::to_string(n) + " calibration score(s) is too few for alpha=" +
         text::format_double(alpha) + "; quantile set to +inf (every class included)";
}

// Members of `mask` ordered by (score, class index).
PredictionSet build_set(std::uint64_t mask, std::span<const double> row_scores) {
  PredictionSet set;
  for (std::size_t c = 0; c < row_scores.size(); ++c) {
    if (mask >> c & 1u) set.members.push_back(ClassLabel::from_zero_based(c));
  }
  std::sort(set.members.begin(), set.members.end(), [&](ClassLabel a, ClassLabel b) {
    const double sa = row_scores[a.zero_based()], sb = row_scores[b.zero_based()];
    if (sa != sb) return sa < sb;
    return a < b;
  });
  set.scores.reserve(set.members.size());
  for (ClassLabel m : set.members) set.scores.push_back(row_scores[m.zero_based()]);
  return set;
}

void require_nonempty(const Dataset& cal) {
  if (cal.empty()) throw DataError("calibration set is empty");
  cal.validate();
}

}  // namespace

std::string_view to_string(CalibrationMode mode) {
  return mode == CalibrationMode::Marginal ? "marginal" : "class-conditional";
}

CalibrationMode parse_calibration_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "marginal") return CalibrationMode::Marginal;
  if (lower == "class-conditional" || lower == "class_conditional" || lower == "cc") {
    return CalibrationMode::ClassConditional;
  }
  throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected marginal or class-conditional)");
}

std::vector<double> CalibrationModel::thresholds() const {
  if (mode == CalibrationMode::Marginal) return std::vector<double>(static_cast<std::size_t>(k), quantiles.front());
  return quantiles;
}

bool PredictionSet::contains(ClassLabel y) const {
  return std::find(members.begin(), members.end(), y) != members.end();
}

std::size_t conformal_rank(std::size_t n, double alpha) {
  check_alpha(alpha);
  const double x = static_cast<double>(n + 1) * (1.0 - alpha);
  const double nearest = std::round(x);
  const double r = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return static_cast<std::size_t>(std::max(1.0, r));
}

double conformal_quantile(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw std::invalid_argument("conformal quantile of an empty score list");
  const std::size_t rank = conformal_rank(scores.size(), alpha);
  if (rank > scores.size()) return kInf;
  std::vector<double> work(scores.begin(), scores.end());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(rank - 1), work.end());
  return work[rank - 1];
}

std::vector<double> true_class_scores(const Dataset& ds, ScoreKind kind, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& ex : ds.examples) {
    const TieBreak t = kind == ScoreKind::APS ? tie_break(seed, ex.id) : TieBreak{};
    out.push_back(score(kind, ex.probs, ex.label, t));
  }
  return out;
}

CalibrationModel calibrate_marginal(const Dataset& cal, double alpha, ScoreKind kind, std::uint64_t seed) {
  check_alpha(alpha);
  require_nonempty(cal);
  CalibrationModel model;
  model.mode = CalibrationMode::Marginal;
  model.alpha = alpha;
  model.kind = kind;
  model.seed = seed;
  model.k = cal.k;
  model.n_cal = cal.size();
  model.class_counts.assign(static_cast<std::size_t>(cal.k), 0);
  for (const auto& ex : cal.examples) ++model.class_counts[ex.label.zero_based()];

  const auto scores = true_class_scores(cal, kind, seed);
  model.quantiles = {conformal_quantile(scores, alpha)};
  if (std::isinf(model.quantiles.front())) model.warnings.push_back(vacuous_warning("marginal", scores.size(), alpha));
  return model;
}

CalibrationModel calibrate_class_conditional(const Dataset& cal, double alpha, ScoreKind kind, std::uint64_t seed) {
  check_alpha(alpha);
  require_nonempty(cal);
  const auto k = static_cast<std::size_t>(cal.k);
  CalibrationModel model;
  model.mode = CalibrationMode::ClassConditional;
  model.alpha = alpha;
  model.kind = kind;
  model.seed = seed;
  model.k = cal.k;
  model.n_cal = cal.size();
  model.class_counts.assign(k, 0);

  const auto scores = true_class_scores(cal, kind, seed);
  std::vector<std::vector<double>> by_class(k);
  for (std::size_t i = 0; i < cal.size(); ++i) by_class[cal.examples[i].label.zero_based()].push_back(scores[i]);

  model.quantiles.assign(k, kInf);
  for (std::size_t c = 0; c < k; ++c) {
    model.class_counts[c] = by_class[c].size();
    const std::string what = "class " + std::to_string(c + 1);
    if (by_class[c].empty()) {
      model.warnings.push_back(what + ": no calibration examples; quantile set to +inf (always included)");
      continue;
    }
    model.quantiles[c] = conformal_quantile(by_class[c], alpha);
    if (std::isinf(model.quantiles[c])) model.warnings.push_back(vacuous_warning(what, by_class[c].size(), alpha));
  }
  return model;
}

CalibrationModel calibrate(const Dataset& cal, CalibrationMode mode, double alpha, ScoreKind kind,
                           std::uint64_t seed) {
  return mode == CalibrationMode::Marginal ? calibrate_marginal(cal, alpha, kind, seed)
                                           : calibrate_class_conditional(cal, alpha, kind, seed);
}

PredictionSet predict_set(const CalibrationModel& model, const ProbVector& p, std::string_view example_id) {
  if (p.size() != static_cast<std::size_t>(model.k)) {
    throw DataError("probability vector has " + std::to_string(p.size()) + " entries, model expects " +
                    std::to_string(model.k));
  }
  const TieBreak t = model.kind == ScoreKind::APS ? tie_break(model.seed, example_id) : TieBreak{};
  std::vector<double> s(p.size());
  score_all(model.kind, p.values(), t, s);
  std::uint64_t mask = 0;
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (s[c] <= model.threshold(ClassLabel::from_zero_based(c))) mask |= std::uint64_t{1} << c;
  }
  return build_set(mask, s);
}

std::vector<PredictionSet> predict_sets(const CalibrationModel& model, const Dataset& ds) {
  const auto k = static_cast<std::size_t>(model.k);
  if (ds.k != model.k) {
    throw DataError("dataset has " + std::to_string(ds.k) + " classes, model expects " + std::to_string(model.k));
  }
  if (k > kernels::kMaxClasses) throw DataError("at most 64 classes are supported");
  const std::size_t n = ds.size();
  const auto probs = ds.prob_matrix();
  std::vector<double> scores(n * k);
  switch (model.kind) {
    case ScoreKind::IP: kernels::ip_scores(probs, scores); break;
    case ScoreKind::MS: kernels::ms_scores(probs, k, scores); break;
    case ScoreKind::APS:
    case ScoreKind::PIP:
      for (std::size_t i = 0; i < n; ++i) {
        const TieBreak t = model.kind == ScoreKind::APS ? tie_break(model.seed, ds.examples[i].id) : TieBreak{};
        score_all(model.kind, std::span(probs).subspan(i * k, k), t, std::span(scores).subspan(i * k, k));
      }
      break;
  }
  const auto thr = model.thresholds();
  std::vector<std::uint64_t> masks(n);
  kernels::inclusion_masks(scores, k, thr, masks);

  std::vector<PredictionSet> sets;
  sets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) sets.push_back(build_set(masks[i], std::span(scores).subspan(i * k, k)));
  return sets;
}

std::string serialize_model(const CalibrationModel& m) {
  std::ostringstream os;
  os << kModelMagic << ' ' << kModelVersion << '\n';
  os << "mode " << to_string(m.mode) << '\n';
  os << "score " << to_string(m.kind) << '\n';
  os << "alpha " << text::format_double(m.alpha) << '\n';
  os << "seed " << m.seed << '\n';
  os << "k " << m.k << '\n';
  os << "n_cal " << m.n_cal << '\n';
  os << "quantiles";
  for (double q : m.quantiles) os << ' ' << text::format_double(q);
  os << '\n';
  os << "counts";
  for (std::size_t c : m.class_counts) os << ' ' << c;
  os << '\n';
  return os.str();
}

CalibrationModel parse_model(std::string_view body) {
  CalibrationModel m;
  const auto lines = text::split(body, '\n');
  bool seen_header = false;
  bool seen[7] = {};
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = text::trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "model line " + std::to_string(ln + 1);
    const auto sp = line.find(' ');
    const auto key = line.substr(0, sp);
    const auto rest = sp == std::string_view::npos ? std::string_view{} : text::trim(line.substr(sp + 1));
    auto fields = [&] {
      std::vector<std::string> out;
      for (auto& f : text::split(rest, ' ')) {
        if (!f.empty()) out.push_back(f);
      }
      return out;
    };
    auto uint_of = [&](std::string_view s) -> unsigned long long {
      const auto v = text::parse_int(s);
      if (!v || *v < 0) throw DataError(where + ": expected a non-negative integer, got '" + std::string(s) + "'");
      return static_cast<unsigned long long>(*v);
    };
    if (!seen_header) {
      if (key != kModelMagic) throw DataError(where + ": not a spraycp model file");
      const auto v = text::parse_int(rest);
      if (!v || *v != kModelVersion) throw DataError(where + ": unsupported model version '" + std::string(rest) + "'");
      seen_header = true;
      continue;
    }
    try {
      if (key == "mode") {
        m.mode = parse_calibration_mode(rest);
        seen[0] = true;
      } else if (key == "score") {
        m.kind = parse_score_kind(rest);
        seen[1] = true;
      } else if (key == "alpha") {
        const auto a = text::parse_double(rest);
        if (!a) throw DataError("bad alpha");
        m.alpha = *a;
        seen[2] = true;
      } else if (key == "seed") {
        // Seeds span the full unsigned range.
        const std::string s(rest);
        std::size_t used = 0;
        if (s.empty() || !std::isdigit(static_cast<unsigned char>(s.front()))) throw DataError("bad seed");
        const std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw DataError("bad seed");
        m.seed = v;
        seen[3] = true;
      } else if (key == "k") {
        m.k = static_cast<int>(uint_of(rest));
        seen[4] = true;
      } else if (key == "n_cal") {
        m.n_cal = uint_of(rest);
        seen[5] = true;
      } else if (key == "quantiles") {
        m.quantiles.clear();
        for (const auto& f : fields()) {
          const auto q = text::parse_double(f);
          if (!q) throw DataError("bad quantile '" + f + "'");
          m.quantiles.push_back(*q);
        }
        seen[6] = true;
      } else if (key == "counts") {
        m.class_counts.clear();
        for (const auto& f : fields()) m.class_counts.push_back(uint_of(f));
      } else {
        throw DataError("unknown key '" + std::string(key) + "'");
      }
    } catch (const DataError& e) {
      if (std::string_view(e.what()).starts_with("model line")) throw;
      throw DataError(where + ": " + e.what());
    } catch (const std::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  if (!seen_header) throw DataError("model file is empty");
  static constexpr const char* kNames[] = {"mode", "score", "alpha", "seed", "k", "n_cal", "quantiles"};
  for (int i = 0; i < 7; ++i) {
    if (!seen[i]) throw DataError(std::string("model file is missing '") + kNames[i] + "'");
  }
  check_alpha(m.alpha);
  const std::size_t want = m.mode == CalibrationMode::Marginal ? 1 : static_cast<std::size_t>(m.k);
  if (m.k < 1 || m.quantiles.size() != want) {
    throw DataError("model file has " + std::to_string(m.quantiles.size()) + " quantile(s), expected " +
                    std::to_string(want));
  }
  if (m.class_counts.empty()) m.class_counts.assign(static_cast<std::size_t>(m.k), 0);
  if (m.class_counts.size() != static_cast<std::size_t>(m.k)) throw DataError("model file counts must have k entries");
  return m;
}

}  // namespace spraycp
