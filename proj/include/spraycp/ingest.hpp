#pragma once

// Dataset, prediction and report files. Formats are specified in
// docs/file-formats.md.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spraycp/conformal.hpp"
#include "spraycp/decisions.hpp"
#include "spraycp/domain.hpp"
#include "spraycp/metrics.hpp"

namespace spraycp {

enum class FileFormat { Csv, Jsonl };

/// ".jsonl"/".ndjson" -> Jsonl, anything else -> Csv.
FileFormat format_from_path(const std::filesystem::path& path);
FileFormat parse_file_format(std::string_view name);

/// Reads and validates a dataset. Throws DataError naming the line and field.
/// Nothing is returned unless the whole file is valid.
Dataset read_dataset(const std::filesystem::path& path, FileFormat format);
Dataset read_dataset(const std::filesystem::path& path);
Dataset parse_dataset_csv(std::istream& in);
Dataset parse_dataset_jsonl(std::istream& in);

void write_dataset(const Dataset& ds, const std::filesystem::path& path, FileFormat format);
void write_dataset_csv(const Dataset& ds, std::ostream& out);
void write_dataset_jsonl(const Dataset& ds, std::ostream& out);

/// Per-example output of `predict`.
struct PredictionRow {
  std::string id;
  std::string farm;
  ClassLabel label;
  ClassLabel top1;
  PredictionSet set;
  std::array<bool, 3> spray{};  // indexed like kAllSprayRules
};

struct PredictionFile {
  int k = 0;
  ClassLabel weed;
  double alpha = 0.0;
  ScoreKind kind = ScoreKind::IP;
  CalibrationMode mode = CalibrationMode::Marginal;
  std::vector<PredictionRow> rows;
};

void write_predictions(const PredictionFile& file, std::ostream& out);
PredictionFile parse_predictions(std::istream& in);
PredictionFile read_predictions(const std::filesystem::path& path);

/// One report as ordered key/value pairs.
using Record = std::vector<std::pair<std::string, std::string>>;

enum class ReportFormat { Csv, KeyValue };
ReportFormat parse_report_format(std::string_view name);

Record to_record(const ConformalReport& r);
Record to_record(const SprayReport& r);
/// Per-class precision/recall/f1/support flattened as class<i>_<metric>.
Record to_record(const ClassificationReport& r);

/// CSV: header then one row per record (all records must share keys).
/// KeyValue: `key=value` lines, records separated by a blank line.
void write_records(std::span<const Record> records, std::ostream& out, ReportFormat format);
void write_report(const Record& record, const std::filesystem::path& path, ReportFormat format);
void write_records(std::span<const Record> records, const std::filesystem::path& path, ReportFormat format);

/// Whole-file helpers; throw DataError on I/O failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view body);

}  // namespace spraycp
