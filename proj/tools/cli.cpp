#include "cli.hpp"

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spraycp/conformal.hpp"
#include "spraycp/decisions.hpp"
#include "spraycp/harness.hpp"
#include "spraycp/ingest.hpp"
#include "spraycp/metrics.hpp"
#include "spraycp/parallel.hpp"
#include "spraycp/synth.hpp"
#include "spraycp/text.hpp"

namespace spraycp::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Bad flag values discovered after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<ScoreKind> parse_scores(const std::string& list) {
  std::vector<ScoreKind> out;
  for (const auto& item : text::split(list, ',')) {
    const auto name = text::trim(item);
    if (!name.empty()) out.push_back(parse_score_kind(name));
  }
  if (out.empty()) throw std::invalid_argument("--scores is empty");
  return out;
}

std::vector<SprayRule> parse_rules(const std::string& list) {
  if (list == "all") return {kAllSprayRules.begin(), kAllSprayRules.end()};
  std::vector<SprayRule> out;
  for (const auto& item : text::split(list, ',')) out.push_back(parse_spray_rule(text::trim(item)));
  return out;
}

void print_warnings(const CalibrationModel& m) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------
// synth

SynthConfig config_from_json(const json& j, std::size_t& n, std::vector<FarmSpec>& farms) {
  SynthConfig cfg = default_synth_config();
  cfg.k = j.value("k", cfg.k);
  if (j.contains("priors")) {
    cfg.priors = j.at("priors").get<std::vector<double>>();
  } else {
    cfg.priors.assign(static_cast<std::size_t>(cfg.k), 1.0 / cfg.k);
  }
  cfg.concentration = j.value("concentration", cfg.concentration);
  cfg.true_boost = j.value("true_boost", cfg.true_boost);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.weed = ClassLabel{j.value("weed", cfg.weed.index)};
  if (j.contains("class_names")) {
    cfg.class_names = j.at("class_names").get<std::vector<std::string>>();
  } else if (cfg.k != 6) {
    cfg.class_names.clear();
  }
  cfg.farm_tag = j.value("farm_tag", std::string{});
  cfg.id_prefix = j.value("id_prefix", std::string{});
  auto shift_of = [](const json& s) {
    Shift shift;
    if (s.contains("priors")) shift.priors = s.at("priors").get<std::vector<double>>();
    shift.damping = s.value("damping", 0.0);
    return shift;
  };
  if (j.contains("shift")) cfg.shift = shift_of(j.at("shift"));
  n = j.value("n", n);
  if (j.contains("farms")) {
    for (const auto& f : j.at("farms")) {
      FarmSpec spec;
      spec.tag = f.at("tag").get<std::string>();
      spec.n = f.value("n", n);
      if (f.contains("priors")) spec.priors = f.at("priors").get<std::vector<double>>();
      if (f.contains("weed_share")) spec.priors = priors_with_weed(cfg.k, cfg.weed, f.at("weed_share").get<double>());
      spec.damping = f.value("damping", 0.0);
      farms.push_back(std::move(spec));
    }
  }
  return cfg;
}

struct SynthArgs {
  std::string config;
  std::string out;
  std::string format;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned workers = default_workers();
};

int cmd_synth(const SynthArgs& a) {
  std::size_t n = 1000;
  std::vector<FarmSpec> farms;
  SynthConfig cfg = default_synth_config();
  if (!a.config.empty()) {
    json j;
    try {
      j = json::parse(read_text_file(a.config));
      cfg = config_from_json(j, n, farms);
    } catch (const json::exception& e) {
      throw DataError(a.config + ": " + e.what());
    }
  }
  if (a.n > 0) {
    n = a.n;
    for (auto& f : farms) f.n = a.n;
  }
  if (a.seed_set) cfg.seed = a.seed;
  try {
    const Dataset ds = farms.empty() ? generate(cfg, n, a.workers) : generate_farms(cfg, farms, a.workers);
    const auto format = a.format.empty() ? format_from_path(a.out) : parse_file_format(a.format);
    write_dataset(ds, a.out, format);
    std::cout << "wrote " << ds.size() << " examples to " << a.out << '\n';
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("synthetic config: ") + e.what());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// calibrate / predict / evaluate

struct CalibrateArgs {
  std::string data;
  std::string out;
  double alpha = 0.1;
  std::string score = "ip";
  std::string mode = "class-conditional";
  std::uint64_t seed = 0;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const auto kind = parse_score_kind(a.score);
  const auto mode = parse_calibration_mode(a.mode);
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  const auto ds = read_dataset(a.data);
  if (ds.empty()) throw DataError(a.data + ": empty dataset");
  const auto model = calibrate(ds, mode, a.alpha, kind, a.seed);
  print_warnings(model);
  write_text_file(a.out, serialize_model(model));
  std::cout << "calibrated " << to_string(mode) << ' ' << to_string(kind) << " model on " << ds.size()
            << " examples -> " << a.out << '\n';
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
};

int cmd_predict(const PredictArgs& a) {
  CalibrationModel model;
  try {
    model = parse_model(read_text_file(a.model));
  } catch (const DataError& e) {
    throw DataError(a.model + ": " + e.what());
  }
  const auto ds = read_dataset(a.data);
  if (ds.empty()) throw DataError(a.data + ": empty dataset, nothing to predict");
  if (ds.k != model.k) {
    throw DataError(a.data + ": dataset has " + std::to_string(ds.k) + " classes but the model has " +
                    std::to_string(model.k));
  }
  const auto sets = predict_sets(model, ds);
  PredictionFile file{ds.k, ds.weed, model.alpha, model.kind, model.mode, {}};
  file.rows.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& ex = ds.examples[i];
    PredictionRow row{ex.id, ex.farm, ex.label, top1(ex.probs), sets[i], {}};
    for (std::size_t r = 0; r < kAllSprayRules.size(); ++r) row.spray[r] = should_spray(kAllSprayRules[r], sets[i], ds.weed);
    file.rows.push_back(std::move(row));
  }
  std::ostringstream os;
  write_predictions(file, os);
  write_text_file(a.out, os.str());
  std::cout << "wrote " << file.rows.size() << " predictions to " << a.out << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string predictions;
  std::string out;
  std::string format = "kv";
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto format = parse_report_format(a.format);
  const auto file = read_predictions(a.predictions);
  if (file.rows.empty()) throw DataError(a.predictions + ": empty predictions file");
  std::vector<PredictionSet> sets;
  std::vector<ClassLabel> labels, tops;
  for (const auto& row : file.rows) {
    sets.push_back(row.set);
    labels.push_back(row.label);
    tops.push_back(row.top1);
  }
  Record rec{{"score", std::string(to_string(file.kind))},
             {"mode", std::string(to_string(file.mode))},
             {"alpha", text::format_double(file.alpha)}};
  for (auto& kv : to_record(conformal_report(sets, labels, file.k))) rec.push_back(std::move(kv));
  for (std::size_t r = 0; r < kAllSprayRules.size(); ++r) {
    std::unique_ptr<bool[]> spray(new bool[file.rows.size()]);
    for (std::size_t i = 0; i < file.rows.size(); ++i) spray[i] = file.rows[i].spray[r];
    const auto report = spray_metrics(std::span<const bool>(spray.get(), file.rows.size()), labels, file.weed);
    for (auto& [k, v] : to_record(report)) rec.emplace_back(std::string(to_string(kAllSprayRules[r])) + "." + k, v);
  }
  for (auto& [k, v] : to_record(classification_metrics(tops, labels, file.k))) rec.emplace_back("top1." + k, v);

  std::ostringstream os;
  write_records(std::span<const Record>(&rec, 1), os, format);
  if (a.out.empty() || a.out == "-") {
    std::cout << os.str();
  } else {
    write_text_file(a.out, os.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// exp1 / exp2

struct ExperimentArgs {
  std::string data;  // exp1 pool
  std::string cal;   // exp2
  std::string farms; // exp2
  std::size_t pool_size = 20000;
  std::size_t farm_size = 6000;
  double damping = 0.0;
  std::size_t reps = 100;
  double alpha = 0.1;
  std::string scores = "ip,ms,aps,pip";
  std::string mode = "class-conditional";
  std::string rules = "all";
  double cal_fraction = 0.45;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
  std::string out_dir = ".";
};

ExperimentConfig experiment_config(const ExperimentArgs& a) {
  ExperimentConfig cfg;
  cfg.alpha = a.alpha;
  cfg.scores = parse_scores(a.scores);
  cfg.mode = parse_calibration_mode(a.mode);
  cfg.rules = parse_rules(a.rules);
  cfg.repetitions = a.reps;
  cfg.cal_fraction = a.cal_fraction;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  cfg.validate();
  return cfg;
}

void write_experiment(const ExperimentReport& report, const fs::path& dir, const std::string& runs_name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
  std::ostringstream runs, agg, cls;
  write_runs_csv(report, runs);
  write_aggregate_csv(report, agg);
  write_class_coverage_csv(report, cls);
  write_text_file(dir / (report.protocol + "_" + runs_name + ".csv"), runs.str());
  write_text_file(dir / (report.protocol + "_aggregate.csv"), agg.str());
  write_text_file(dir / (report.protocol + "_class_coverage.csv"), cls.str());
}

void print_summary(const ExperimentReport& report) {
  for (const auto& row : report.aggregate) {
    if (row.rule != report.rules.front()) continue;
    std::cout << report.protocol << ' ' << to_string(row.score) << " [" << row.group << "] runs=" << row.n_runs
              << " failed=" << row.n_failed << " coverage=" << text::format_metric(row.coverage.mean)
              << " weed_coverage=" << text::format_metric(row.weed_coverage.mean)
              << " efficiency=" << text::format_metric(row.efficiency.mean)
              << " informativeness=" << text::format_metric(row.informativeness.mean) << '\n';
  }
  if (report.n_failed > 0) std::cerr << "warning: " << report.n_failed << " run(s) failed\n";
}

int cmd_exp1(const ExperimentArgs& a) {
  const auto cfg = experiment_config(a);
  Dataset pool;
  if (!a.data.empty()) {
    pool = read_dataset(a.data);
  } else {
    pool = generate(default_synth_config(a.seed), a.pool_size, a.workers);
  }
  if (pool.empty()) throw DataError("empty dataset");
  const auto report = run_experiment1(pool, cfg);
  write_experiment(report, a.out_dir, "runs");
  print_summary(report);
  return kExitOk;
}

int cmd_exp2(const ExperimentArgs& a) {
  const auto cfg = experiment_config(a);
  if (!(a.damping >= 0.0 && a.damping < 1.0)) throw UsageError("--damping must lie in [0, 1)");
  const auto base = default_synth_config(a.seed);
  Dataset cal, farms;
  if (!a.cal.empty()) {
    cal = read_dataset(a.cal);
  } else {
    auto cfg_cal = base;
    cfg_cal.id_prefix = "cal";
    cal = generate(cfg_cal, a.pool_size, a.workers);
  }
  if (!a.farms.empty()) {
    farms = read_dataset(a.farms);
  } else {
    auto specs = default_farm_specs(base, a.damping, a.farm_size);
    farms = generate_farms(base, specs, a.workers);
  }
  if (cal.empty()) throw DataError("empty calibration dataset");
  if (farms.empty()) throw DataError("empty new-farm dataset");
  const auto report = run_experiment2(cal, farms, cfg);
  write_experiment(report, a.out_dir, "farms");
  print_summary(report);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Conformal prediction sets and spray decisions for weed classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "spraycp 1.0");
  app.footer(
      "Every flag may also be set through the environment variable shown next to it; "
      "flags take precedence over the environment, which takes precedence over defaults.\n"
      "Exit codes: 0 success, 1 usage error, 2 data error.");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--config", sy.config, "JSON generator config (defaults: K=6, balanced priors)")
      
      ->envname("SPRAYCP_SYNTH_CONFIG");
  synth->add_option("--out", sy.out, "Output dataset path")->required()->envname("SPRAYCP_OUT");
  synth->add_option("--format", sy.format, "csv or jsonl (default: from the file extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}))->envname("SPRAYCP_DATA_FORMAT");
  synth->add_option("--n", sy.n, "Examples to generate (per farm when the config lists farms)")
      ->check(CLI::PositiveNumber)
      ->envname("SPRAYCP_N");
  auto* synth_seed = synth->add_option("--seed", sy.seed, "Overrides the config seed")->envname("SPRAYCP_SEED");
  synth->add_option("--workers", sy.workers, "Worker threads")->check(CLI::PositiveNumber)->envname("SPRAYCP_WORKERS");

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Calibrate a conformal model on a dataset");
  cal->add_option("--data", ca.data, "Calibration dataset (.csv or .jsonl)")->required()->envname("SPRAYCP_DATA");
  cal->add_option("--out", ca.out, "Model output path")->required()->envname("SPRAYCP_OUT");
  cal->add_option("--alpha", ca.alpha, "Error tolerance in (0, 1)")->capture_default_str()->envname("SPRAYCP_ALPHA");
  cal->add_option("--score", ca.score, "ip, ms, aps or pip")->capture_default_str()->envname("SPRAYCP_SCORE");
  cal->add_option("--mode", ca.mode, "marginal or class-conditional")->capture_default_str()->envname("SPRAYCP_MODE");
  cal->add_option("--seed", ca.seed, "Seed of the APS tie-break stream")->capture_default_str()->envname("SPRAYCP_SEED");

  PredictArgs pa;
  auto* pred = app.add_subcommand("predict", "Prediction sets and spray decisions for a dataset");
  pred->add_option("--model", pa.model, "Model file from calibrate")->required()->envname("SPRAYCP_MODEL");
  pred->add_option("--data", pa.data, "Dataset to predict")->required()->envname("SPRAYCP_DATA");
  pred->add_option("--out", pa.out, "Predictions CSV path")->required()->envname("SPRAYCP_OUT");

  EvaluateArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Conformal, spraying and top-1 metrics of a predictions file");
  eval->add_option("--predictions", ea.predictions, "Predictions CSV from predict")->required()->envname("SPRAYCP_PREDICTIONS");
  eval->add_option("--out", ea.out, "Report path (default: stdout)")->envname("SPRAYCP_OUT");
  eval->add_option("--format", ea.format, "kv or csv")->capture_default_str()->check(CLI::IsMember({"kv", "csv"}))
      ->envname("SPRAYCP_REPORT_FORMAT");

  ExperimentArgs xa;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--alpha", xa.alpha, "Error tolerance in (0, 1)")->capture_default_str()->envname("SPRAYCP_ALPHA");
    sub->add_option("--scores", xa.scores, "Comma-separated score kinds")->capture_default_str()->envname("SPRAYCP_SCORES");
    sub->add_option("--mode", xa.mode, "marginal or class-conditional")->capture_default_str()->envname("SPRAYCP_MODE");
    sub->add_option("--rules", xa.rules, "Comma-separated spray rules or 'all'")->capture_default_str()
        ->envname("SPRAYCP_RULES");
    sub->add_option("--seed", xa.seed, "Experiment seed")->capture_default_str()->envname("SPRAYCP_SEED");
    sub->add_option("--workers", xa.workers, "Worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber)
        ->envname("SPRAYCP_WORKERS");
    sub->add_option("--out-dir", xa.out_dir, "Directory for report CSVs")->capture_default_str()->envname("SPRAYCP_OUT_DIR");
  };
  auto* exp1 = app.add_subcommand("exp1", "Repeated random calibration/test splits of one pool");
  exp1->add_option("--data", xa.data, "Pool dataset (default: synthetic K=6 pool)")->envname("SPRAYCP_DATA");
  exp1->add_option("--pool-size", xa.pool_size, "Size of the synthetic pool")->capture_default_str()
      ->check(CLI::PositiveNumber)->envname("SPRAYCP_POOL_SIZE");
  exp1->add_option("--reps", xa.reps, "Repetitions")->capture_default_str()->check(CLI::PositiveNumber)
      ->envname("SPRAYCP_REPS");
  exp1->add_option("--cal-fraction", xa.cal_fraction, "Share of the pool used for calibration")->capture_default_str()
      ->envname("SPRAYCP_CAL_FRACTION");
  add_common(exp1);

  auto* exp2 = app.add_subcommand("exp2", "Calibrate once, evaluate each new farm");
  exp2->add_option("--cal", xa.cal, "Calibration dataset (default: synthetic)")->envname("SPRAYCP_CAL");
  exp2->add_option("--farms", xa.farms, "New-farm dataset grouped by farm (default: six synthetic farms)")
      ->envname("SPRAYCP_FARMS");
  exp2->add_option("--cal-size", xa.pool_size, "Size of the synthetic calibration set")->capture_default_str()
      ->check(CLI::PositiveNumber)->envname("SPRAYCP_CAL_SIZE");
  exp2->add_option("--farm-size", xa.farm_size, "Examples per synthetic farm")->capture_default_str()
      ->check(CLI::PositiveNumber)->envname("SPRAYCP_FARM_SIZE");
  exp2->add_option("--damping", xa.damping, "Confidence damping of the synthetic farms, in [0, 1)")
      ->capture_default_str()
      ->envname("SPRAYCP_DAMPING");
  add_common(exp2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  sy.seed_set = synth_seed->count() > 0 || std::getenv("SPRAYCP_SEED") != nullptr;

  try {
    if (*synth) return cmd_synth(sy);
    if (*cal) return cmd_calibrate(ca);
    if (*pred) return cmd_predict(pa);
    if (*eval) return cmd_evaluate(ea);
    if (*exp1) return cmd_exp1(xa);
    if (*exp2) return cmd_exp2(xa);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace spraycp::cli
