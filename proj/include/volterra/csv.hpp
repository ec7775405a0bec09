#pragma once

// CSV export of paths and families. Numbers use 17 significant digits so a
// written value parses back to the same double.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/resolvent.hpp"
#include "volterra/time_grid.hpp"
#include "volterra/wiener.hpp"

namespace volterra::csv {

inline std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Two columns: t,value.
inline void write(std::ostream& os, const ScalarPath& p) {
  os << "t,value\n";
  for (std::size_t i = 0; i < p.size(); ++i) os << number(p.grid()[i]) << ',' << number(p[i]) << '\n';
}

namespace detail {

template <class Row>
void write_matrix(std::ostream& os, const TimeGrid& grid, std::size_t rows, Row&& row) {
  os << "mode";
  for (std::size_t i = 0; i < grid.size(); ++i) os << ',' << number(grid[i]);
  os << '\n';
  for (std::size_t k = 0; k < rows; ++k) {
    os << (k + 1);
    for (double v : row(k)) os << ',' << number(v);
    os << '\n';
  }
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace detail

/// Header row "mode,t_0,...,t_N", then one row per mode.
inline void write(std::ostream& os, const HilbertPath& x) {
  detail::write_matrix(os, x.grid(), x.modes(), [&x](std::size_t k) { return x.mode(k); });
}

inline void write(std::ostream& os, const ResolventFamily& fam) {
  detail::write_matrix(os, fam.grid(), fam.modes(), [&fam](std::size_t k) { return fam.mode(k); });
}

/// Cumulative values W_k(t_i) in the HilbertPath layout.
inline void write(std::ostream& os, const NoisePath& w) { write(os, w.values()); }

/// Parses the layout written by write(os, HilbertPath). The grid must be uniform.
inline HilbertPath read_hilbert_path(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  const auto header = detail::split(line);
  if (header.size() < 3 || header[0] != "mode") throw std::runtime_error("csv: malformed header");
  std::vector<double> times;
  for (std::size_t j = 1; j < header.size(); ++j) times.push_back(std::stod(header[j]));
  const TimeGrid grid(times.back(), times.size() - 1);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line);
    if (cells.size() != header.size()) throw std::runtime_error("csv: row length differs from header");
    std::vector<double> r;
    for (std::size_t j = 1; j < cells.size(); ++j) r.push_back(std::stod(cells[j]));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error("csv: no data rows");
  HilbertPath x(grid, rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 0; i < grid.size(); ++i) x(k, i) = rows[k][i];
  return x;
}

/// Generic table with a header line.
class Table {
public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<double> row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("csv::Table: row width mismatch");
    rows_.push_back(std::move(row));
  }

  void write(std::ostream& os) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) os << (j ? "," : "") << columns_[j];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << number(r[j]);
      os << '\n';
    }
  }

  std::size_t size() const noexcept { return rows_.size(); }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace volterra::csv
