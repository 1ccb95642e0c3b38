#include "sparsetik/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace sparsetik::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const VectorXd& values, int width, int height) {
  check_dimension("write_pgm", static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                  static_cast<std::size_t>(values.size()));
  auto out = open_out(path);
  const double lo = values.size() ? values.minCoeff() : 0.0;
  const double hi = values.size() ? values.maxCoeff() : 0.0;
  const double span = hi - lo;
  out << "P2\n" << width << ' ' << height << "\n255\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double v = values(static_cast<Index>(r) * width + c);
      const int level = span > 0 ? static_cast<int>(std::lround(255.0 * (v - lo) / span)) : 0;
      out << std::clamp(level, 0, 255) << (c + 1 < width ? ' ' : '\n');
    }
  }
}

void write_values_csv(const std::filesystem::path& path, const VectorXd& values) {
  auto out = open_out(path);
  for (Index i = 0; i < values.size(); ++i) out << format_value(values(i)) << '\n';
}

VectorXd read_values_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    try {
      vals.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return Eigen::Map<VectorXd>(vals.data(), static_cast<Index>(vals.size()));
}

void write_matrix_market(const std::filesystem::path& path, const CsrMatrix<double>& A) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
  for (Index i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      out << i + 1 << ' ' << cols[k] + 1 << ' ' << format_value(vals[k]) << '\n';
  }
}

CsrMatrix<double> read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
    throw std::runtime_error(path.string() + ": unsupported MatrixMarket header");
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  Index rows = 0, cols = 0, nnz = 0;
  if (!(std::istringstream(line) >> rows >> cols >> nnz))
    throw std::runtime_error(path.string() + ": malformed size line");
  std::vector<std::tuple<Index, Index, double>> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (Index k = 0; k < nnz; ++k) {
    Index i = 0, j = 0;
    double v = 0;
    if (!(in >> i >> j >> v)) throw std::runtime_error(path.string() + ": truncated entry list");
    entries.emplace_back(i - 1, j - 1, v);
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  for (const auto& [i, j, v] : entries) {
    if (i < 0 || i >= rows) throw std::runtime_error(path.string() + ": row index out of range");
    ++offsets[static_cast<std::size_t>(i) + 1];
    col_idx.push_back(j);
    values.push_back(v);
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  return CsrMatrix<double>(rows, cols, std::move(offsets), std::move(col_idx), std::move(values));
}

}  // namespace sparsetik::io
