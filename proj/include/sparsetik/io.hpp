#pragma once

#include <filesystem>

#include "sparsetik/linalg.hpp"

namespace sparsetik::io {

/// Plain PGM (P2, maxval 255), row-major, linear min-max scaling. A constant
/// image is written as all zeros.
void write_pgm(const std::filesystem::path& path, const VectorXd& values, int width, int height);

/// One value per line, row-major, full round-trip precision.
void write_values_csv(const std::filesystem::path& path, const VectorXd& values);
VectorXd read_values_csv(const std::filesystem::path& path);

/// MatrixMarket coordinate format, 1-based indices.
void write_matrix_market(const std::filesystem::path& path, const CsrMatrix<double>& A);
CsrMatrix<double> read_matrix_market(const std::filesystem::path& path);

}  // namespace sparsetik::io
