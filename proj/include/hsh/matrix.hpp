#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "hsh/errors.hpp"

namespace hsh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;
using Labels = std::vector<int>;

enum class GridFormat { whitespace_grid, csv };

/// Throws unless `m` is square, finite, nonnegative, symmetric with zero diagonal.
inline void validate_distance_values(const Matrix& m) {
  if (m.rows() != m.cols())
    throw FormatError("distance matrix must be square, got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0) throw ValueError("nonzero diagonal at " + std::to_string(i));
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) throw ValueError("non-finite distance");
      if (v < 0.0) throw ValueError("negative distance");
      if (v != m(j, i)) throw ValueError("distance matrix is not symmetric");
    }
  }
}

/// Counters collected while repairing a raw matrix into a DistanceMatrix.
struct ValidationReport {
  std::size_t diagonal_zeroed = 0;
  std::size_t asymmetric_pairs = 0;
};

/// Symmetric, nonnegative, finite, zero-diagonal pairwise distance matrix.
/// Immutable once constructed.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  /// Takes ownership of an already valid matrix; throws if any invariant fails.
  explicit DistanceMatrix(Matrix values, std::vector<std::string> node_ids = {},
                          ValidationReport report = {})
      : values_(std::move(values)), node_ids_(std::move(node_ids)), report_(report) {
    check();
  }

  Index size() const noexcept { return values_.rows(); }
  const Matrix& values() const noexcept { return values_; }
  double operator()(Index i, Index j) const { return values_(i, j); }
  const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }
  const ValidationReport& report() const noexcept { return report_; }

  /// Rows and columns restricted to `rows` x `cols` (global indices).
  Matrix block(std::span<const int> rows, std::span<const int> cols) const {
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (Index i = 0; i < out.rows(); ++i)
      for (Index j = 0; j < out.cols(); ++j) out(i, j) = values_(rows[i], cols[j]);
    return out;
  }

  DistanceMatrix permuted(std::span<const int> order) const {
    return DistanceMatrix(block(order, order));
  }

 private:
  void check() const {
    if (!node_ids_.empty() && static_cast<Index>(node_ids_.size()) != values_.rows())
      throw DimensionError("node id count does not match matrix size");
    validate_distance_values(values_);
  }

  Matrix values_;
  std::vector<std::string> node_ids_;
  ValidationReport report_;
};

/// Landmark-landmark and target-landmark blocks; target-target distances are
/// never copied.
struct PartialObservation {
  Matrix landmark_block;  // L x L
  Matrix target_block;    // D x L
  std::vector<int> landmark_indices;
  std::vector<int> target_indices;

  Index landmark_count() const noexcept { return landmark_block.rows(); }
  Index target_count() const noexcept { return target_block.rows(); }
  Index node_count() const noexcept { return landmark_count() + target_count(); }

  void validate() const {
    const auto L = static_cast<Index>(landmark_indices.size());
    const auto D = static_cast<Index>(target_indices.size());
    if (landmark_block.rows() != L || landmark_block.cols() != L)
      throw DimensionError("landmark block shape does not match landmark indices");
    if (target_block.rows() != D || (D > 0 && target_block.cols() != L))
      throw DimensionError("target block shape does not match indices");
    validate_distance_values(landmark_block);
    if (!target_block.allFinite() || (target_block.array() < 0.0).any())
      throw ValueError("target block entries must be finite and nonnegative");
    std::vector<int> all(landmark_indices);
    all.insert(all.end(), target_indices.begin(), target_indices.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
      throw IndexError("landmark and target indices overlap");
  }
};

/// Averages the two directions and zeroes the diagonal.
inline DistanceMatrix symmetrize(const Matrix& raw) {
  if (raw.rows() != raw.cols()) throw FormatError("symmetrize requires a square matrix");
  if (!raw.allFinite()) throw ValueError("symmetrize requires finite entries");
  const Index n = raw.rows();
  ValidationReport report;
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    if (raw(i, i) != 0.0) ++report.diagonal_zeroed;
    out(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      if (raw(i, j) != raw(j, i)) ++report.asymmetric_pairs;
      const double v = (raw(i, j) + raw(j, i)) / 2.0;
      if (v < 0.0)
        throw ValueError("negative distance between " + std::to_string(i) + " and " +
                         std::to_string(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return DistanceMatrix(std::move(out), {}, report);
}

inline DistanceMatrix symmetrize(const DistanceMatrix& m) { return symmetrize(m.values()); }

inline PartialObservation extract_observation(const DistanceMatrix& w,
                                              std::span<const int> landmark_indices) {
  const Index n = w.size();
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (int idx : landmark_indices) {
    if (idx < 0 || idx >= n) throw IndexError("landmark index out of range: " + std::to_string(idx));
    if (taken[idx]) throw IndexError("duplicate landmark index: " + std::to_string(idx));
    taken[idx] = 1;
  }
  PartialObservation obs;
  obs.landmark_indices.assign(landmark_indices.begin(), landmark_indices.end());
  for (int i = 0; i < n; ++i)
    if (!taken[i]) obs.target_indices.push_back(i);
  obs.landmark_block = w.block(obs.landmark_indices, obs.landmark_indices);
  obs.target_block = w.block(obs.target_indices, obs.landmark_indices);
  return obs;
}

// ---------------------------------------------------------------------------
// Text I/O

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line, GridFormat format) {
  std::vector<std::string_view> out;
  if (format == GridFormat::csv) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    std::size_t pos = 0;
    while (pos < line.size()) {
      pos = line.find_first_not_of(" \t\r", pos);
      if (pos == std::string_view::npos) break;
      const auto end = line.find_first_of(" \t\r", pos);
      out.push_back(line.substr(pos, end == std::string_view::npos ? end : end - pos));
      pos = end;
    }
  }
  return out;
}

struct Grid {
  Matrix values;
  std::vector<std::string> header;
};

inline Grid read_grid(const std::string& path, GridFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, format);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (auto f : fields) {
      if (f.empty()) throw FormatError(path + ":" + std::to_string(line_no) + ": missing entry");
      const auto v = parse_number(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (format == GridFormat::csv && rows.empty() && header.empty()) {
        for (auto f : fields) header.emplace_back(f);
        continue;
      }
      throw FormatError(path + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failure on " + path);
  Grid grid;
  grid.header = std::move(header);
  const Index r = static_cast<Index>(rows.size());
  const Index c = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  grid.values.resize(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) grid.values(i, j) = rows[i][j];
  return grid;
}

}  // namespace detail

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw ValueError("cannot format value");
  return std::string(buf, ptr);
}

/// Rectangular numeric grid (e.g. point coordinates).
inline Matrix load_grid(const std::string& path, GridFormat format = GridFormat::whitespace_grid) {
  return detail::read_grid(path, format).values;
}

inline DistanceMatrix load_matrix(const std::string& path, GridFormat format) {
  auto grid = detail::read_grid(path, format);
  if (grid.values.rows() != grid.values.cols() || grid.values.rows() == 0)
    throw FormatError(path + ": expected a non-empty square grid, got " +
                      std::to_string(grid.values.rows()) + "x" + std::to_string(grid.values.cols()));
  if (!grid.header.empty() && static_cast<Index>(grid.header.size()) != grid.values.rows())
    throw FormatError(path + ": header length does not match matrix size");
  if (!grid.values.allFinite()) throw ValueError(path + ": non-finite entry");
  if ((grid.values.array() < 0.0).any()) throw ValueError(path + ": negative entry");
  auto sym = symmetrize(grid.values);
  return DistanceMatrix(sym.values(), std::move(grid.header), sym.report());
}

/// Guesses the format from the extension: ".csv" is csv, anything else a grid.
inline GridFormat format_for_path(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? GridFormat::csv
                                                                     : GridFormat::whitespace_grid;
}

inline void write_grid(std::ostream& out, const Matrix& m, GridFormat format,
                       const std::vector<std::string>& header = {}) {
  const char sep = format == GridFormat::csv ? ',' : ' ';
  if (format == GridFormat::csv && !header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << sep;
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_grid(const std::string& path, const Matrix& m,
                       GridFormat format = GridFormat::whitespace_grid,
                       const std::vector<std::string>& header = {}) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_grid(out, m, format, header);
  if (!out) throw IoError("write failure on " + path);
}

inline void write_matrix(const std::string& path, const DistanceMatrix& w, GridFormat format) {
  write_grid(path, w.values(), format, w.node_ids());
}

}  // namespace hsh
