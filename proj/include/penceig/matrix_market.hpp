#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"

namespace penceig {

namespace detail {

inline std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

/// Reads a coordinate-format "real general" matrix.  Indices in the file
/// are 1-based; duplicate entries are summed.
inline SparseMatrix<double> read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");

  std::string line;
  long lineno = 0;

  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket")
      throw ParseError(path, lineno, "missing %%MatrixMarket banner");
    if (detail::lowercase(object) != "matrix" ||
        detail::lowercase(format) != "coordinate" ||
        detail::lowercase(field) != "real" ||
        detail::lowercase(symmetry) != "general")
      throw ParseError(path, lineno,
                       "unsupported header, expected: matrix coordinate real general");
  }

  int rows = 0, cols = 0;
  long declared = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> declared))
      throw ParseError(path, lineno, "malformed size line");
    break;
  }
  if (declared < 0) throw ParseError(path, lineno, "missing size line");
  if (rows <= 0 || cols <= 0)
    throw ParseError(path, lineno, "matrix dimensions must be positive");

  std::vector<Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(declared));
  long seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    int i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v))
      throw ParseError(path, lineno, "malformed entry line");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw ParseError(path, lineno, "entry index out of range");
    entries.push_back({i - 1, j - 1, v});
    ++seen;
  }
  if (seen != declared)
    throw ParseError(path, lineno,
                     "entry count " + std::to_string(seen) +
                         " does not match declared " + std::to_string(declared));
  return SparseMatrix<double>::from_triplets(rows, cols, entries);
}

/// Writes coordinate-format "real general" with 1-based indices.  Values
/// are printed with 17 significant digits so that a read back after a
/// write reproduces every double bit for bit.
inline void write_matrix_market(const SparseMatrix<double>& a,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
  char buf[64];
  for (const auto& t : a.to_triplets()) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g", t.row + 1, t.col + 1, t.value);
    out << buf << "\n";
  }
  if (!out) throw ParseError(path, 0, "write failure");
}

}  // namespace penceig
