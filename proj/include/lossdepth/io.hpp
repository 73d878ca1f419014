#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lossdepth/matrix.hpp"

namespace lossdepth {

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

struct LabeledDataset {
  DataMatrix features;
  /// Anomaly benchmarks use 0 = inlier, 1 = outlier.
  std::optional<std::vector<int>> labels;
  /// Feature column names; empty without a header.
  std::vector<std::string> names;
};

/// Selects the label column by header name or by 0-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

struct CsvOptions {
  bool has_header = true;
  std::optional<ColumnRef> label_column;
};

/// Comma-separated numeric table with optional double-quoted fields.
LabeledDataset read_csv(const std::filesystem::path& path, const CsvOptions& options);
LabeledDataset parse_csv(const std::string& text, const CsvOptions& options);

/// Writes features (and labels as a trailing "label" column) with 17
/// significant digits. Column names default to x0, x1, ...
void write_csv(const std::filesystem::path& path, const LabeledDataset& data);

struct IdxOptions {
  /// Empty keeps every class.
  std::set<int> keep_classes;
  std::optional<std::size_t> limit;
};

/// Image/label pair in the IDX format (plain or gzip-compressed). Pixels are
/// scaled by 1/255 and flattened row-major.
LabeledDataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        const IdxOptions& options = {});

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct Report {
  std::string title;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& name);

/// Doubles are printed with 17 significant digits.
std::string format_double(double v);

std::string render_report(const Report& report, ReportFormat format);
/// Written to a temporary sibling and renamed into place.
void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace lossdepth
