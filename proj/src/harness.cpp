#include "spraycp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "spraycp/parallel.hpp"
#include "spraycp/random.hpp"
#include "spraycp/text.hpp"

namespace spraycp {

namespace {

std::vector<RunResult> evaluate_scores(const Dataset& test, const std::vector<CalibrationModel>& models,
                                       const ExperimentConfig& cfg, std::size_t index, const std::string& farm) {
  std::vector<RunResult> out;
  const auto labels = test.labels();
  for (const auto& model : models) {
    RunResult run;
    run.index = index;
    run.farm = farm;
    run.score = model.kind;
    run.n_cal = model.n_cal;
    run.warnings = model.warnings;
    try {
      const auto sets = predict_sets(model, test);
      run.conformal = conformal_report(sets, labels, test.k);
      std::unique_ptr<bool[]> flags(new bool[sets.size()]);
      for (SprayRule rule : cfg.rules) {
        for (std::size_t i = 0; i < sets.size(); ++i) flags[i] = should_spray(rule, sets[i], test.weed);
        run.spray.push_back(spray_metrics(std::span<const bool>(flags.get(), sets.size()), labels, test.weed));
      }
      const auto n_weed = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), test.weed));
      run.category = categorize_infestation(static_cast<double>(n_weed) / static_cast<double>(labels.size()));
    } catch (const std::exception& e) {
      run.failed = true;
      run.error = e.what();
    }
    out.push_back(std::move(run));
  }
  return out;
}

RunResult failed_run(std::size_t index, std::string farm, ScoreKind score, std::string error) {
  RunResult run;
  run.index = index;
  run.farm = std::move(farm);
  run.score = score;
  run.failed = true;
  run.error = std::move(error);
  return run;
}

void aggregate(ExperimentReport& report, const ExperimentConfig& cfg, bool by_category) {
  std::vector<std::string> groups{"all"};
  if (by_category) {
    for (Infestation c : {Infestation::Low, Infestation::Medium, Infestation::High}) {
      const bool present = std::any_of(report.runs.begin(), report.runs.end(),
                                       [&](const RunResult& r) { return !r.failed && r.category == c; });
      if (present) groups.emplace_back(to_string(c));
    }
  }
  const auto weed = report.weed.zero_based();
  for (ScoreKind score : cfg.scores) {
    for (std::size_t ri = 0; ri < report.rules.size(); ++ri) {
      for (const auto& group : groups) {
        AggregateRow row;
        row.score = score;
        row.rule = report.rules[ri];
        row.group = group;
        std::vector<Metric> cov, wcov, eff, info, sr, il, red, sur, prec, rec, f1;
        for (const auto& run : report.runs) {
          if (run.score != score) continue;
          if (group != "all" && (run.failed || to_string(run.category) != group)) continue;
          ++row.n_runs;
          if (run.failed) {
            ++row.n_failed;
            continue;
          }
          const auto& s = run.spray[ri];
          cov.push_back(run.conformal.coverage);
          wcov.push_back(run.conformal.per_class_coverage[weed]);
          eff.push_back(run.conformal.efficiency);
          info.push_back(run.conformal.informativeness);
          sr.push_back(s.sprayed_ratio);
          il.push_back(s.infestation_level);
          red.push_back(s.spray_reduction);
          sur.push_back(s.spray_surplus);
          prec.push_back(s.precision);
          rec.push_back(s.recall);
          f1.push_back(s.f1);
        }
        row.coverage = summarize(cov);
        row.weed_coverage = summarize(wcov);
        row.efficiency = summarize(eff);
        row.informativeness = summarize(info);
        row.sprayed_ratio = summarize(sr);
        row.infestation_level = summarize(il);
        row.spray_reduction = summarize(red);
        row.spray_surplus = summarize(sur);
        row.precision = summarize(prec);
        row.recall = summarize(rec);
        row.f1 = summarize(f1);
        report.aggregate.push_back(std::move(row));
      }
    }
  }
}

ExperimentReport start_report(std::string protocol, const Dataset& ds, const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.protocol = std::move(protocol);
  r.k = ds.k;
  r.weed = ds.weed;
  r.alpha = cfg.alpha;
  r.mode = cfg.mode;
  r.rules = cfg.rules;
  return r;
}

}  // namespace

std::string_view to_string(Infestation level) {
  switch (level) {
    case Infestation::Low: return "low";
    case Infestation::Medium: return "medium";
    case Infestation::High: return "high";
  }
  return "?";
}

Infestation categorize_infestation(double level) {
  if (level < 0.2) return Infestation::Low;
  if (level <= 0.4) return Infestation::Medium;
  return Infestation::High;
}

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(cal_fraction > 0.0 && cal_fraction < 1.0)) throw std::invalid_argument("cal_fraction must lie in (0, 1)");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (scores.empty()) throw std::invalid_argument("at least one score kind is required");
  if (rules.empty()) throw std::invalid_argument("at least one spray rule is required");
}

std::vector<Summary> ExperimentReport::class_coverage(ScoreKind score) const {
  std::vector<Summary> out;
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    std::vector<Metric> vals;
    for (const auto& run : runs) {
      if (run.score == score && !run.failed) vals.push_back(run.conformal.per_class_coverage[c]);
    }
    out.push_back(summarize(vals));
  }
  return out;
}

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t rep) { return derive_seed(seed, rep); }

Split split_pool(std::size_t n, double cal_fraction, std::uint64_t seed) {
  if (n < 2) throw DataError("a pool of " + std::to_string(n) + " example(s) cannot be split");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
  const auto wanted = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cal_fraction));
  const std::size_t n_cal = std::clamp<std::size_t>(wanted, 1, n - 1);
  Split s;
  s.cal.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_cal));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_cal), idx.end());
  std::sort(s.cal.begin(), s.cal.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

ExperimentReport run_experiment1(const Dataset& pool, const ExperimentConfig& cfg) {
  cfg.validate();
  pool.validate();
  if (pool.size() < 2) throw DataError("experiment 1 needs a pool of at least two examples");
  auto report = start_report("exp1", pool, cfg);

  std::vector<std::vector<RunResult>> per_rep(cfg.repetitions);
  parallel_for(cfg.repetitions, cfg.workers, [&](std::size_t rep) {
    const std::uint64_t seed = repetition_seed(cfg.seed, rep);
    const auto split = split_pool(pool.size(), cfg.cal_fraction, seed);
    const auto cal = pool.subset(split.cal);
    const auto test = pool.subset(split.test);
    std::vector<CalibrationModel> models;
    std::vector<RunResult> failures;
    for (ScoreKind kind : cfg.scores) {
      try {
        models.push_back(calibrate(cal, cfg.mode, cfg.alpha, kind, seed));
      } catch (const std::exception& e) {
        failures.push_back(failed_run(rep, "", kind, e.what()));
      }
    }
    auto runs = evaluate_scores(test, models, cfg, rep, "");
    runs.insert(runs.end(), failures.begin(), failures.end());
    // Keep the configured score order.
    std::stable_sort(runs.begin(), runs.end(), [&](const RunResult& a, const RunResult& b) {
      const auto pos = [&](ScoreKind k) { return std::find(cfg.scores.begin(), cfg.scores.end(), k) - cfg.scores.begin(); };
      return pos(a.score) < pos(b.score);
    });
    per_rep[rep] = std::move(runs);
  });

  for (auto& runs : per_rep) {
    for (auto& run : runs) {
      report.n_failed += run.failed;
      report.runs.push_back(std::move(run));
    }
  }
  aggregate(report, cfg, false);
  return report;
}

ExperimentReport run_experiment2(const Dataset& cal, const Dataset& new_farms, const ExperimentConfig& cfg) {
  cfg.validate();
  if (cal.empty()) throw DataError("calibration set is empty");
  if (new_farms.empty()) throw DataError("new-farm dataset has no examples");
  cal.validate();
  new_farms.validate();
  if (cal.k != new_farms.k) throw DataError("calibration and new-farm datasets differ in class count");
  if (cal.weed != new_farms.weed) throw DataError("calibration and new-farm datasets designate different weed labels");
  auto report = start_report("exp2", new_farms, cfg);

  std::vector<std::string> farms;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < new_farms.size(); ++i) {
    const auto& tag = new_farms.examples[i].farm;
    auto [it, inserted] = members.try_emplace(tag);
    if (inserted) farms.push_back(tag);
    it->second.push_back(i);
  }

  std::vector<CalibrationModel> models;
  std::vector<std::string> calibration_errors;
  for (ScoreKind kind : cfg.scores) {
    try {
      models.push_back(calibrate(cal, cfg.mode, cfg.alpha, kind, cfg.seed));
    } catch (const std::exception& e) {
      calibration_errors.push_back(std::string(to_string(kind)) + ": " + e.what());
    }
  }
  if (models.empty()) throw DataError("calibration failed for every score: " + calibration_errors.front());

  std::vector<std::vector<RunResult>> per_farm(farms.size());
  parallel_for(farms.size(), cfg.workers, [&](std::size_t f) {
    const auto test = new_farms.subset(members.at(farms[f]));
    per_farm[f] = evaluate_scores(test, models, cfg, f, farms[f]);
  });
  for (auto& runs : per_farm) {
    for (auto& run : runs) {
      report.n_failed += run.failed;
      report.runs.push_back(std::move(run));
    }
  }
  aggregate(report, cfg, true);
  return report;
}

void write_runs_csv(const ExperimentReport& report, std::ostream& out) {
  out << "protocol,index,farm,score,mode,rule,status,n_warnings,n_cal,n_test,n_weed,category,coverage,weed_coverage,"
         "efficiency,informativeness,sprayed_ratio,infestation_level,spray_reduction,spray_surplus,precision,recall,"
         "f1\n";
  const auto weed = report.weed.zero_based();
  for (const auto& run : report.runs) {
    for (std::size_t ri = 0; ri < report.rules.size(); ++ri) {
      out << report.protocol << ',' << run.index << ',' << run.farm << ',' << to_string(run.score) << ','
          << to_string(report.mode) << ',' << to_string(report.rules[ri]) << ',' << (run.failed ? "failed" : "ok")
          << ',' << run.warnings.size() << ',' << run.n_cal << ',';
      if (run.failed) {
        out << "NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA\n";
        continue;
      }
      const auto& c = run.conformal;
      const auto& s = run.spray[ri];
      out << c.n_test << ',' << s.n_weed << ',' << to_string(run.category) << ',' << text::format_double(c.coverage)
          << ',' << text::format_metric(c.per_class_coverage[weed]) << ',' << text::format_double(c.efficiency) << ','
          << text::format_double(c.informativeness) << ',' << text::format_double(s.sprayed_ratio) << ','
          << text::format_double(s.infestation_level) << ',' << text::format_double(s.spray_reduction) << ','
          << text::format_double(s.spray_surplus) << ',' << text::format_metric(s.precision) << ','
          << text::format_metric(s.recall) << ',' << text::format_metric(s.f1) << '\n';
    }
  }
}

void write_class_coverage_csv(const ExperimentReport& report, std::ostream& out) {
  out << "protocol,index,farm,score,class,coverage\n";
  for (const auto& run : report.runs) {
    if (run.failed) continue;
    for (std::size_t c = 0; c < run.conformal.per_class_coverage.size(); ++c) {
      out << report.protocol << ',' << run.index << ',' << run.farm << ',' << to_string(run.score) << ',' << c + 1
          << ',' << text::format_metric(run.conformal.per_class_coverage[c]) << '\n';
    }
  }
}

void write_aggregate_csv(const ExperimentReport& report, std::ostream& out) {
  static constexpr const char* kMetrics[] = {"coverage",      "weed_coverage",     "efficiency",
                                             "informativeness", "sprayed_ratio",   "infestation_level",
                                             "spray_reduction", "spray_surplus",   "precision",
                                             "recall",          "f1"};
  out << "protocol,score,mode,rule,group,n_runs,n_failed";
  for (const char* m : kMetrics) out << ',' << m << "_mean," << m << "_sd";
  out << '\n';
  for (const auto& row : report.aggregate) {
    out << report.protocol << ',' << to_string(row.score) << ',' << to_string(report.mode) << ','
        << to_string(row.rule) << ',' << row.group << ',' << row.n_runs << ',' << row.n_failed;
    for (const Summary* s : {&row.coverage, &row.weed_coverage, &row.efficiency, &row.informativeness,
                             &row.sprayed_ratio, &row.infestation_level, &row.spray_reduction, &row.spray_surplus,
                             &row.precision, &row.recall, &row.f1}) {
      out << ',' << text::format_metric(s->mean) << ',' << text::format_metric(s->sd);
    }
    out << '\n';
  }
}

}  // namespace spraycp
