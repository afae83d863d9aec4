#include "spraycp/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "spraycp/text.hpp"

namespace spraycp {

namespace {

using json = nlohmann::json;

constexpr std::string_view kDatasetMagic = "spraycp-dataset";
constexpr std::string_view kPredictionsMagic = "spraycp-predictions";

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

// Metadata shared by both dataset formats.
struct Header {
  std::optional<int> k;
  std::optional<int> weed;
  int label_base = 1;
  std::vector<std::string> classes;
};

int header_int(std::string_view key, std::string_view value, std::size_t line) {
  const auto v = text::parse_int(value);
  if (!v) throw DataError(at_line(line) + ": header field '" + std::string(key) + "' is not an integer");
  return static_cast<int>(*v);
}

Dataset start_dataset(const Header& h) {
  if (!h.k) throw DataError("dataset header is missing 'k'");
  if (!h.weed) throw DataError("dataset header is missing 'weed'");
  if (h.label_base != 0 && h.label_base != 1) throw DataError("label_base must be 0 or 1");
  Dataset ds;
  ds.k = *h.k;
  // The weed designation follows the same base as the row labels.
  ds.weed = ClassLabel{*h.weed + (1 - h.label_base)};
  ds.class_names = h.classes;
  ds.validate();
  return ds;
}

ClassLabel row_label(long long raw, const Header& h, int k, std::size_t line) {
  const long long one_based = raw + (1 - h.label_base);
  if (one_based < 1 || one_based > k) {
    throw DataError(at_line(line) + ": field 'label': unknown label index " + std::to_string(raw));
  }
  return ClassLabel{static_cast<int>(one_based)};
}

ProbVector row_probs(std::vector<double> p, std::size_t line) {
  try {
    return ProbVector::from(std::move(p));
  } catch (const DataError& e) {
    throw DataError(at_line(line) + ": field 'probs': " + e.what());
  }
}

void check_plain_field(std::string_view value, std::string_view what, const std::string& id) {
  if (value.find_first_of(",\"\n\r") != std::string_view::npos) {
    throw DataError(std::string(what) + " of example '" + id + "' contains a comma, quote or newline");
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string join_labels(const PredictionSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(s.members[i].index);
  }
  return out;
}

std::string join_scores(const PredictionSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (i) out += ';';
    out += text::format_double(s.scores[i]);
  }
  return out;
}

}  // namespace

FileFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".ndjson" ? FileFormat::Jsonl : FileFormat::Csv;
}

FileFormat parse_file_format(std::string_view name) {
  if (name == "csv") return FileFormat::Csv;
  if (name == "jsonl") return FileFormat::Jsonl;
  throw std::invalid_argument("unknown file format '" + std::string(name) + "' (expected csv or jsonl)");
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "kv" || name == "text") return ReportFormat::KeyValue;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "' (expected csv or kv)");
}

// ---------------------------------------------------------------------------
// CSV datasets

Dataset parse_dataset_csv(std::istream& in) {
  Header h;
  std::string raw;
  std::size_t line = 0;
  bool have_columns = false;
  std::optional<Dataset> ds;
  while (std::getline(in, raw)) {
    ++line;
    const std::string row = strip_cr(raw);
    if (row.empty()) continue;
    if (row.front() == '#') {
      if (have_columns) throw DataError(at_line(line) + ": metadata comment after the column header");
      const auto body = text::trim(std::string_view(row).substr(1));
      if (body.starts_with(kDatasetMagic)) continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // free-form comment
      const auto key = text::trim(body.substr(0, eq));
      const auto value = text::trim(body.substr(eq + 1));
      if (key == "k") h.k = header_int(key, value, line);
      else if (key == "weed") h.weed = header_int(key, value, line);
      else if (key == "label_base") h.label_base = header_int(key, value, line);
      else if (key == "classes") h.classes = text::split(value, ',');
      continue;
    }
    if (!have_columns) {
      ds = start_dataset(h);
      const auto cols = text::split(row, ',');
      const std::size_t want = 3 + static_cast<std::size_t>(ds->k);
      if (cols.size() != want || cols[0] != "id" || cols[1] != "farm" || cols[2] != "label") {
        throw DataError(at_line(line) + ": column header must be id,farm,label followed by " +
                        std::to_string(ds->k) + " probability columns");
      }
      have_columns = true;
      continue;
    }
    const auto fields = text::split(row, ',');
    const std::size_t want = 3 + static_cast<std::size_t>(ds->k);
    if (fields.size() != want) {
      throw DataError(at_line(line) + ": expected " + std::to_string(want) + " fields, found " +
                      std::to_string(fields.size()));
    }
    const auto label = text::parse_int(fields[2]);
    if (!label) throw DataError(at_line(line) + ": field 'label': '" + fields[2] + "' is not an integer");
    std::vector<double> p;
    p.reserve(static_cast<std::size_t>(ds->k));
    for (std::size_t c = 3; c < fields.size(); ++c) {
      const auto v = text::parse_double(fields[c]);
      if (!v) {
        throw DataError(at_line(line) + ": field 'p" + std::to_string(c - 2) + "': '" + fields[c] +
                        "' is not a number");
      }
      p.push_back(*v);
    }
    ds->examples.push_back(
        Example{fields[0], fields[1], row_label(*label, h, ds->k, line), row_probs(std::move(p), line)});
  }
  if (!have_columns) {
    if (!h.k) throw DataError("dataset has no header");
    throw DataError("dataset is missing its column header line");
  }
  return std::move(*ds);
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  ds.validate();
  out << "# " << kDatasetMagic << " 1\n";
  out << "# k=" << ds.k << '\n';
  out << "# weed=" << ds.weed.index << '\n';
  out << "# label_base=1\n";
  if (!ds.class_names.empty()) {
    out << "# classes=";
    for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
      check_plain_field(ds.class_names[c], "class name", ds.class_names[c]);
      out << (c ? "," : "") << ds.class_names[c];
    }
    out << '\n';
  }
  out << "id,farm,label";
  for (int c = 1; c <= ds.k; ++c) out << ",p" << c;
  out << '\n';
  for (const auto& ex : ds.examples) {
    check_plain_field(ex.id, "id", ex.id);
    check_plain_field(ex.farm, "farm", ex.id);
    out << ex.id << ',' << ex.farm << ',' << ex.label.index;
    for (double v : ex.probs.values()) out << ',' << text::format_double(v);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSONL datasets

Dataset parse_dataset_jsonl(std::istream& in) {
  Header h;
  std::optional<Dataset> ds;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string row = strip_cr(raw);
    if (text::trim(row).empty()) continue;
    json obj;
    try {
      obj = json::parse(row);
    } catch (const json::exception& e) {
      throw DataError(at_line(line) + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw DataError(at_line(line) + ": expected a JSON object");
    try {
      if (!ds) {
        if (!obj.contains(kDatasetMagic)) throw DataError("first object must be the dataset header");
        if (obj.contains("k")) h.k = obj.at("k").get<int>();
        if (obj.contains("weed")) h.weed = obj.at("weed").get<int>();
        if (obj.contains("label_base")) h.label_base = obj.at("label_base").get<int>();
        if (obj.contains("classes")) h.classes = obj.at("classes").get<std::vector<std::string>>();
        ds = start_dataset(h);
        continue;
      }
      for (const char* key : {"id", "farm", "label", "probs"}) {
        if (!obj.contains(key)) throw DataError(std::string("field '") + key + "' is missing");
      }
      const auto& probs = obj.at("probs");
      if (!probs.is_array() || probs.size() != static_cast<std::size_t>(ds->k)) {
        throw DataError("field 'probs' must be an array of " + std::to_string(ds->k) + " numbers");
      }
      std::vector<double> p;
      for (const auto& v : probs) {
        if (!v.is_number()) throw DataError("field 'probs' contains a non-number");
        p.push_back(v.get<double>());
      }
      if (!obj.at("label").is_number_integer()) throw DataError("field 'label' must be an integer");
      ds->examples.push_back(Example{obj.at("id").get<std::string>(), obj.at("farm").get<std::string>(),
                                     row_label(obj.at("label").get<long long>(), h, ds->k, line),
                                     row_probs(std::move(p), line)});
    } catch (const json::exception& e) {
      throw DataError(at_line(line) + ": " + e.what());
    } catch (const DataError& e) {
      if (std::string_view(e.what()).starts_with("line ")) throw;
      throw DataError(at_line(line) + ": " + e.what());
    }
  }
  if (!ds) throw DataError("dataset has no header");
  return std::move(*ds);
}

void write_dataset_jsonl(const Dataset& ds, std::ostream& out) {
  ds.validate();
  json header{{std::string(kDatasetMagic), 1}, {"k", ds.k}, {"weed", ds.weed.index}, {"label_base", 1}};
  if (!ds.class_names.empty()) header["classes"] = ds.class_names;
  out << header.dump() << '\n';
  for (const auto& ex : ds.examples) {
    json row{{"id", ex.id}, {"farm", ex.farm}, {"label", ex.label.index}};
    row["probs"] = std::vector<double>(ex.probs.values().begin(), ex.probs.values().end());
    out << row.dump() << '\n';
  }
}

Dataset read_dataset(const std::filesystem::path& path, FileFormat format) {
  auto in = open_in(path);
  try {
    return format == FileFormat::Csv ? parse_dataset_csv(in) : parse_dataset_jsonl(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Dataset read_dataset(const std::filesystem::path& path) { return read_dataset(path, format_from_path(path)); }

void write_dataset(const Dataset& ds, const std::filesystem::path& path, FileFormat format) {
  auto out = open_out(path);
  if (format == FileFormat::Csv) {
    write_dataset_csv(ds, out);
  } else {
    write_dataset_jsonl(ds, out);
  }
  finish(out, path);
}

// ---------------------------------------------------------------------------
// Predictions

void write_predictions(const PredictionFile& file, std::ostream& out) {
  out << "# " << kPredictionsMagic << " 1\n";
  out << "# k=" << file.k << '\n';
  out << "# weed=" << file.weed.index << '\n';
  out << "# alpha=" << text::format_double(file.alpha) << '\n';
  out << "# score=" << to_string(file.kind) << '\n';
  out << "# mode=" << to_string(file.mode) << '\n';
  out << "id,farm,label,top1,set,set_scores";
  for (SprayRule r : kAllSprayRules) out << ',' << to_string(r);
  out << '\n';
  for (const auto& row : file.rows) {
    check_plain_field(row.id, "id", row.id);
    check_plain_field(row.farm, "farm", row.id);
    out << row.id << ',' << row.farm << ',' << row.label.index << ',' << row.top1.index << ',' << join_labels(row.set)
        << ',' << join_scores(row.set);
    for (bool s : row.spray) out << ',' << (s ? 1 : 0);
    out << '\n';
  }
}

PredictionFile parse_predictions(std::istream& in) {
  PredictionFile f;
  std::map<std::string, std::string, std::less<>> meta;
  std::string raw;
  std::size_t line = 0;
  bool have_columns = false;
  auto meta_int = [&](const char* key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw DataError(std::string("predictions header is missing '") + key + "'");
    const auto v = text::parse_int(it->second);
    if (!v) throw DataError(std::string("predictions header field '") + key + "' is not an integer");
    return static_cast<int>(*v);
  };
  while (std::getline(in, raw)) {
    ++line;
    const std::string row = strip_cr(raw);
    if (row.empty()) continue;
    if (row.front() == '#') {
      const auto body = text::trim(std::string_view(row).substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) meta[std::string(text::trim(body.substr(0, eq)))] = text::trim(body.substr(eq + 1));
      continue;
    }
    if (!have_columns) {
      f.k = meta_int("k");
      f.weed = ClassLabel{meta_int("weed")};
      if (f.k < 1 || f.weed.index < 1 || f.weed.index > f.k) throw DataError("predictions header has invalid k/weed");
      try {
        if (meta.count("alpha")) f.alpha = text::parse_double(meta["alpha"]).value_or(0.0);
        if (meta.count("score")) f.kind = parse_score_kind(meta["score"]);
        if (meta.count("mode")) f.mode = parse_calibration_mode(meta["mode"]);
      } catch (const std::invalid_argument& e) {
        throw DataError(std::string("predictions header: ") + e.what());
      }
      have_columns = true;
      continue;
    }
    const auto fields = text::split(row, ',');
    if (fields.size() != 9) {
      throw DataError(at_line(line) + ": expected 9 fields, found " + std::to_string(fields.size()));
    }
    PredictionRow pr;
    pr.id = fields[0];
    pr.farm = fields[1];
    auto label_of = [&](std::string_view s, const char* what) {
      const auto v = text::parse_int(s);
      if (!v || *v < 1 || *v > f.k) {
        throw DataError(at_line(line) + ": field '" + what + "': invalid label '" + std::string(s) + "'");
      }
      return ClassLabel{static_cast<int>(*v)};
    };
    pr.label = label_of(fields[2], "label");
    pr.top1 = label_of(fields[3], "top1");
    if (!fields[4].empty()) {
      for (const auto& m : text::split(fields[4], ';')) pr.set.members.push_back(label_of(m, "set"));
    }
    if (!fields[5].empty()) {
      for (const auto& s : text::split(fields[5], ';')) {
        const auto v = text::parse_double(s);
        if (!v) throw DataError(at_line(line) + ": field 'set_scores': '" + s + "' is not a number");
        pr.set.scores.push_back(*v);
      }
    }
    if (pr.set.scores.size() != pr.set.members.size()) {
      throw DataError(at_line(line) + ": set and set_scores differ in length");
    }
    for (std::size_t r = 0; r < 3; ++r) {
      const auto& v = fields[6 + r];
      if (v != "0" && v != "1") throw DataError(at_line(line) + ": field '" + std::string(to_string(kAllSprayRules[r])) + "' must be 0 or 1");
      pr.spray[r] = v == "1";
    }
    f.rows.push_back(std::move(pr));
  }
  if (!have_columns) throw DataError("predictions file has no column header");
  return f;
}

PredictionFile read_predictions(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return parse_predictions(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

Record to_record(const ConformalReport& r) {
  Record rec{{"n_test", std::to_string(r.n_test)},
             {"coverage", text::format_double(r.coverage)},
             {"efficiency", text::format_double(r.efficiency)},
             {"informativeness", text::format_double(r.informativeness)}};
  for (std::size_t c = 0; c < r.per_class_coverage.size(); ++c) {
    rec.emplace_back("coverage_class" + std::to_string(c + 1), text::format_metric(r.per_class_coverage[c]));
  }
  return rec;
}

Record to_record(const SprayReport& r) {
  return {{"n_test", std::to_string(r.n_test)},
          {"n_weed", std::to_string(r.n_weed)},
          {"n_spray", std::to_string(r.n_spray)},
          {"sprayed_ratio", text::format_double(r.sprayed_ratio)},
          {"infestation_level", text::format_double(r.infestation_level)},
          {"spray_reduction", text::format_double(r.spray_reduction)},
          {"spray_surplus", text::format_double(r.spray_surplus)},
          {"precision", text::format_metric(r.precision)},
          {"recall", text::format_metric(r.recall)},
          {"f1", text::format_metric(r.f1)}};
}

Record to_record(const ClassificationReport& r) {
  Record rec{{"accuracy", text::format_double(r.accuracy)}};
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto p = "class" + std::to_string(c + 1) + "_";
    rec.emplace_back(p + "precision", text::format_metric(r.per_class[c].precision));
    rec.emplace_back(p + "recall", text::format_metric(r.per_class[c].recall));
    rec.emplace_back(p + "f1", text::format_metric(r.per_class[c].f1));
    rec.emplace_back(p + "support", std::to_string(r.per_class[c].support));
  }
  return rec;
}

void write_records(std::span<const Record> records, std::ostream& out, ReportFormat format) {
  if (format == ReportFormat::KeyValue) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (i) out << '\n';
      for (const auto& [k, v] : records[i]) out << k << '=' << v << '\n';
    }
    return;
  }
  if (records.empty()) return;
  const auto& first = records.front();
  for (std::size_t c = 0; c < first.size(); ++c) out << (c ? "," : "") << first[c].first;
  out << '\n';
  for (const auto& rec : records) {
    if (rec.size() != first.size()) throw std::invalid_argument("CSV records must share one column set");
    for (std::size_t c = 0; c < rec.size(); ++c) {
      if (rec[c].first != first[c].first) throw std::invalid_argument("CSV records must share one column order");
      out << (c ? "," : "") << rec[c].second;
    }
    out << '\n';
  }
}

void write_records(std::span<const Record> records, const std::filesystem::path& path, ReportFormat format) {
  auto out = open_out(path);
  write_records(records, out, format);
  finish(out, path);
}

void write_report(const Record& record, const std::filesystem::path& path, ReportFormat format) {
  write_records(std::span<const Record>(&record, 1), path, format);
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view body) {
  auto out = open_out(path);
  out << body;
  finish(out, path);
}

}  // namespace spraycp
