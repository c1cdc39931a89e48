#pragma once

#include "magwell/fbi.hpp"
#include "magwell/operator.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace magwell {

using Json = nlohmann::ordered_json;

/// Shortest round-trip form is not used: every number is written with 17 significant digits.
std::string format_double(double v);

class CsvWriter {
 public:
  using Cell = std::variant<double, long, std::string>;

  explicit CsvWriter(std::vector<std::string> header);

  void add_row(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  double number(std::size_t row, const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

/// Coordinate format, one-based, every stored entry as "row col real imag".
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Little-endian interleaved float32 pairs plus a JSON header next to it.
void write_complex64(const std::filesystem::path& bin, const std::vector<cd>& values);
std::vector<cd> read_complex64(const std::filesystem::path& bin);

struct EigenvectorRecord {
  Grid2D grid;
  double h = 0.0;
  int index = 0;
  double eigenvalue = 0.0;
  double residual = 0.0;
  std::string field;
};

/// Writes <stem>.bin and <stem>.json; returns both paths.
std::vector<std::filesystem::path> write_eigenvector(const std::filesystem::path& stem, const GridVector& u,
                                                     const EigenvectorRecord& rec);
GridVector read_eigenvector(const std::filesystem::path& stem, Json* header = nullptr);

/// Columns: <axis1>, <axis2>, re, im, abs2.
void write_slice_csv(const std::filesystem::path& path, const PhaseSpaceSlice& s);
std::vector<std::filesystem::path> write_slice_binary(const std::filesystem::path& stem, const PhaseSpaceSlice& s);

// Minimal SVG plots.

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool markers = true;
  bool line = true;
  std::string color;
};

struct LinePlot {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<PlotSeries> series;

  std::string svg() const;
  void write(const std::filesystem::path& path) const;
};

/// Heat map of a row-major (ny x nx) value array, index iy * nx + ix, coloured on a log10 scale
/// when log_scale is set.
struct HeatMap {
  std::string title, xlabel, ylabel;
  std::vector<double> xs, ys;
  std::vector<double> values;
  bool log_scale = true;
  double floor = 1e-16;

  std::string svg() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace magwell
