#include "lossdepth/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lossdepth {

namespace {

std::vector<std::string> split_record(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError("row " + std::to_string(row) + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string location(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

double parse_number(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(location(row, col) + ": '" + s + "' is not a number");
  }
  if (!std::isfinite(v)) throw ParseError(location(row, col) + ": non-finite value '" + s + "'");
  return v;
}

int parse_label(const std::string& raw, std::size_t row, std::size_t col) {
  const double v = parse_number(raw, row, col);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ParseError(location(row, col) + ": label '" + trim(raw) + "' is not an integer");
  }
  return static_cast<int>(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  int got = 0;
  while ((got = gzread(f, buf, sizeof buf)) > 0) out.insert(out.end(), buf, buf + got);
  int err = 0;
  const char* msg = gzerror(f, &err);
  const std::string what = msg ? msg : "";
  gzclose(f);
  if (got < 0 || (err != Z_OK && err != Z_STREAM_END)) throw IoError("read error in " + path.string() + ": " + what);
  return out;
}

std::uint32_t big_endian_u32(const std::vector<unsigned char>& b, std::size_t offset) {
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

struct IdxHeader {
  std::vector<std::size_t> dims;
  std::size_t payload = 0;
};

IdxHeader parse_idx_header(const std::vector<unsigned char>& bytes, std::uint32_t magic, const std::string& what) {
  if (bytes.size() < 4) throw ParseError(what + ": file too short for an IDX header");
  const std::uint32_t got = big_endian_u32(bytes, 0);
  if (got != magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ": bad magic 0x%08X (expected 0x%08X)", got, magic);
    throw ParseError(what + buf);
  }
  IdxHeader h;
  const std::size_t ndim = magic & 0xFFu;
  h.payload = 4 + 4 * ndim;
  if (bytes.size() < h.payload) throw ParseError(what + ": truncated IDX header");
  std::size_t total = 1;
  for (std::size_t k = 0; k < ndim; ++k) {
    h.dims.push_back(big_endian_u32(bytes, 4 + 4 * k));
    total *= h.dims.back();
  }
  if (bytes.size() - h.payload < total) {
    throw ParseError(what + ": truncated (expected " + std::to_string(total) + " bytes of data, found " +
                     std::to_string(bytes.size() - h.payload) + ")");
  }
  return h;
}

}  // namespace

LabeledDataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::vector<std::vector<std::string>> records;
  {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      ++row;
      if (trim(line).empty()) continue;
      records.push_back(split_record(line, row));
    }
  }

  LabeledDataset out;
  std::vector<std::string> header;
  std::size_t first = 0;
  if (options.has_header) {
    if (records.empty()) throw ParseError("missing header row");
    for (auto& h : records[0]) header.push_back(trim(h));
    first = 1;
  }
  const std::size_t width = !header.empty() ? header.size() : (records.empty() ? 0 : records[0].size());

  std::optional<std::size_t> label_col;
  if (options.label_column) {
    if (const auto* name = std::get_if<std::string>(&*options.label_column)) {
      if (header.empty()) throw ParseError("label column '" + *name + "' named but the file has no header");
      const auto it = std::find(header.begin(), header.end(), *name);
      if (it == header.end()) throw ParseError("label column '" + *name + "' not found in header");
      label_col = static_cast<std::size_t>(it - header.begin());
    } else {
      label_col = std::get<std::size_t>(*options.label_column);
      if (width != 0 && *label_col >= width) {
        throw ParseError("label column " + std::to_string(*label_col) + " out of range (" + std::to_string(width) +
                         " columns)");
      }
    }
  }

  if (label_col && width == 0) throw ParseError("label column given for an empty file");
  const std::size_t n = records.size() - first;
  const std::size_t d = width - (label_col ? 1 : 0);
  std::vector<double> values;
  values.reserve(n * d);
  std::vector<int> labels;
  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row_index = r + 1;
    if (rec.size() != width) {
      throw ParseError("row " + std::to_string(row_index) + ": expected " + std::to_string(width) + " fields, found " +
                       std::to_string(rec.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) labels.push_back(parse_label(rec[c], row_index, c + 1));
      else values.push_back(parse_number(rec[c], row_index, c + 1));
    }
  }
  out.features = Matrix(n, d, std::move(values));
  if (label_col) out.labels = std::move(labels);
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!label_col || c != *label_col) out.names.push_back(header[c]);
  return out;
}

LabeledDataset read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_csv(ss.str(), options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  const auto& m = data.features;
  if (data.labels && data.labels->size() != m.rows()) throw DimensionMismatch("label count differs from row count");
  if (!data.names.empty() && data.names.size() != m.cols()) throw DimensionMismatch("name count differs from columns");
  std::string text;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (j) text += ',';
    text += csv_field(data.names.empty() ? "x" + std::to_string(j) : data.names[j]);
  }
  if (data.labels) text += m.cols() ? ",label" : "label";
  text += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) text += ',';
      text += format_double(m(i, j));
    }
    if (data.labels) {
      if (m.cols()) text += ',';
      text += std::to_string((*data.labels)[i]);
    }
    text += '\n';
  }
  write_text_atomic(path, text);
}

LabeledDataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        const IdxOptions& options) {
  const auto img = read_all(images);
  const auto lab = read_all(labels);
  const auto ih = parse_idx_header(img, 0x00000803u, images.string());
  const auto lh = parse_idx_header(lab, 0x00000801u, labels.string());
  const std::size_t count = ih.dims[0];
  if (lh.dims[0] != count) {
    throw ParseError("image count " + std::to_string(count) + " differs from label count " +
                     std::to_string(lh.dims[0]));
  }
  const std::size_t d = ih.dims[1] * ih.dims[2];

  std::vector<double> values;
  std::vector<int> kept;
  for (std::size_t i = 0; i < count; ++i) {
    if (options.limit && kept.size() >= *options.limit) break;
    const int cls = lab[lh.payload + i];
    if (!options.keep_classes.empty() && !options.keep_classes.count(cls)) continue;
    kept.push_back(cls);
    const unsigned char* px = img.data() + ih.payload + i * d;
    for (std::size_t j = 0; j < d; ++j) values.push_back(px[j] / 255.0);
  }
  LabeledDataset out;
  out.features = Matrix(kept.size(), d, std::move(values));
  out.labels = std::move(kept);
  return out;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw InvalidArgument("unknown report format '" + name + "' (expected csv or json)");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_report(const Report& report, ReportFormat format) {
  for (const auto& row : report.rows) {
    if (row.size() != report.columns.size()) throw DimensionMismatch("report row width differs from its columns");
  }
  if (format == ReportFormat::Csv) {
    std::string text;
    for (std::size_t j = 0; j < report.columns.size(); ++j) {
      if (j) text += ',';
      text += csv_field(report.columns[j]);
    }
    text += '\n';
    for (const auto& row : report.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) text += ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) text += format_double(v);
              else if constexpr (std::is_same_v<T, std::string>) text += csv_field(v);
              else if constexpr (std::is_same_v<T, bool>) text += v ? "true" : "false";
              else text += std::to_string(v);
            },
            row[j]);
      }
      text += '\n';
    }
    return text;
  }

  nlohmann::ordered_json doc;
  doc["title"] = report.title;
  doc["config"] = report.config;
  doc["summary"] = report.summary;
  doc["columns"] = report.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    auto obj = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::visit([&](const auto& v) { obj[report.columns[j]] = v; }, row[j]);
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move report into " + path.string());
  }
}

void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
  write_text_atomic(path, render_report(report, format));
}

}  // namespace lossdepth
