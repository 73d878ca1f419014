#include "lossdepth/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace lossdepth {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
  if (cols == 0 && rows != 0) throw InvalidArgument("matrix must have at least one column");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (cols == 0 && rows != 0) throw InvalidArgument("matrix must have at least one column");
  if (values_.size() != rows * cols) {
    throw DimensionMismatch("matrix storage holds " + std::to_string(values_.size()) +
                            " values, expected " + std::to_string(rows * cols));
  }
  if (!all_finite(values_)) throw InvalidArgument("matrix contains non-finite entries");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw DimensionMismatch("row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " +
                              std::to_string(cols));
    }
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return Matrix(rows.size(), cols, std::move(values));
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * cols_);
  for (std::size_t i : indices) {
    if (i >= rows_) throw InvalidArgument("row index out of range");
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return Matrix(indices.size(), cols_, std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace lossdepth
