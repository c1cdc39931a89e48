#include "magwell/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace magwell {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw Error("csv: empty header");
}

void CsvWriter::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw Error("csv: row width does not match header");
  rows_.push_back(std::move(row));
}

std::string CsvWriter::str() const {
  std::string out;
  auto line = [&](const auto& cells, auto&& fmt) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += fmt(cells[i]);
    }
    out += "\r\n";
  };
  line(header_, [](const std::string& s) { return csv_escape(s); });
  for (const auto& r : rows_)
    line(r, [](const Cell& c) {
      if (auto d = std::get_if<double>(&c)) return format_double(*d);
      if (auto l = std::get_if<long>(&c)) return std::to_string(*l);
      return csv_escape(std::get<std::string>(c));
    });
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

void CsvWriter::write(const fs::path& path) const { write_text(path, str()); }

int CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  int c = column(name);
  if (c < 0) throw Error("csv: no column '" + name + "'");
  if (row >= rows.size()) throw Error("csv: row out of range");
  const std::string& s = rows[row][c];
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw Error("csv: not a number: '" + s + "'");
  return v;
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error("csv: unterminated quoted field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw Error("csv: no header");
  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) throw Error("csv: ragged row " + std::to_string(r));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_text(path)); }

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_matrix_market(const fs::path& path, const SparseMatrix& m) {
  std::string out = "%%MatrixMarket matrix coordinate complex general\n";
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " + std::to_string(m.nonZeros()) + "\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out += std::to_string(it.row() + 1) + " " + std::to_string(it.col() + 1) + " " +
             format_double(it.value().real()) + " " + format_double(it.value().imag()) + "\n";
    }
  write_text(path, out);
}

SparseMatrix read_matrix_market(const fs::path& path) {
  std::istringstream in(read_text(path));
  in.imbue(std::locale::classic());
  std::string line;
  std::getline(in, line);
  if (line.rfind("%%MatrixMarket matrix coordinate complex", 0) != 0)
    throw Error("matrix market: unsupported banner in " + path.string());
  while (in.peek() == '%') std::getline(in, line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz)) throw Error("matrix market: bad size line");
  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(nnz);
  for (long k = 0; k < nnz; ++k) {
    long r, c;
    double re, im;
    if (!(in >> r >> c >> re >> im)) throw Error("matrix market: truncated entries");
    trip.emplace_back(r - 1, c - 1, cd(re, im));
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

void write_complex64(const fs::path& bin, const std::vector<cd>& values) {
  std::string buf(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    float parts[2] = {static_cast<float>(values[i].real()), static_cast<float>(values[i].imag())};
    for (int p = 0; p < 2; ++p) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(parts[p]);
      for (int b = 0; b < 4; ++b) buf[i * 8 + p * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
  write_text(bin, buf);
}

std::vector<cd> read_complex64(const fs::path& bin) {
  std::string buf = read_text(bin);
  if (buf.size() % 8) throw Error("complex64: size of " + bin.string() + " is not a multiple of 8");
  std::vector<cd> out(buf.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    float parts[2];
    for (int p = 0; p < 2; ++p) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i * 8 + p * 4 + b])) << (8 * b);
      parts[p] = std::bit_cast<float>(bits);
    }
    out[i] = cd(parts[0], parts[1]);
  }
  return out;
}

std::vector<fs::path> write_eigenvector(const fs::path& stem, const GridVector& u, const EigenvectorRecord& rec) {
  fs::path bin = stem, js = stem;
  bin += ".bin";
  js += ".json";
  write_complex64(bin, std::vector<cd>(u.data(), u.data() + u.size()));
  Json h;
  h["format"] = "magwell-eigenvector";
  h["dtype"] = "complex64";
  h["byte_order"] = "little";
  h["length"] = u.size();
  h["layout"] = "row-major interior nodes, index = i2 * n + i1";
  h["grid"] = {{"L", rec.grid.L}, {"N", rec.grid.N}, {"n", rec.grid.n()}, {"spacing", rec.grid.delta()}};
  h["h"] = rec.h;
  h["field"] = rec.field;
  h["index"] = rec.index;
  h["eigenvalue"] = rec.eigenvalue;
  h["residual"] = rec.residual;
  h["data"] = bin.filename().string();
  write_json(js, h);
  return {bin, js};
}

GridVector read_eigenvector(const fs::path& stem, Json* header) {
  fs::path bin = stem, js = stem;
  bin += ".bin";
  js += ".json";
  Json h = read_json(js);
  if (h.value("dtype", "") != "complex64") throw Error("eigenvector: unsupported dtype");
  auto v = read_complex64(bin);
  if (static_cast<long>(v.size()) != h.at("length").get<long>()) throw Error("eigenvector: length mismatch");
  if (header) *header = h;
  return Eigen::Map<GridVector>(v.data(), static_cast<long>(v.size()));
}

void write_slice_csv(const fs::path& path, const PhaseSpaceSlice& s) {
  CsvWriter w({axis_name(s.axis1), axis_name(s.axis2), "re", "im", "abs2"});
  for (std::size_t i2 = 0; i2 < s.grid2.size(); ++i2)
    for (std::size_t i1 = 0; i1 < s.grid1.size(); ++i1) {
      cd v = s.at(i1, i2);
      w.add_row({s.grid1[i1], s.grid2[i2], v.real(), v.imag(), std::norm(v)});
    }
  w.write(path);
}

std::vector<fs::path> write_slice_binary(const fs::path& stem, const PhaseSpaceSlice& s) {
  fs::path bin = stem, js = stem;
  bin += ".bin";
  js += ".json";
  write_complex64(bin, s.values);
  Json h;
  h["format"] = "magwell-phase-slice";
  h["dtype"] = "complex64";
  h["byte_order"] = "little";
  h["axis1"] = axis_name(s.axis1);
  h["axis2"] = axis_name(s.axis2);
  h["shape"] = {s.grid2.size(), s.grid1.size()};
  h["layout"] = "index = i2 * len(grid1) + i1";
  h["grid1"] = s.grid1;
  h["grid2"] = s.grid2;
  h["fixed"] = {{"x1", s.fixed[0]}, {"x2", s.fixed[1]}, {"xi1", s.fixed[2]}, {"xi2", s.fixed[3]}};
  h["h"] = s.h;
  h["data"] = bin.filename().string();
  write_json(js, h);
  return {bin, js};
}

// SVG

namespace {

constexpr double kW = 640, kH = 440, kLeft = 78, kRight = 24, kTop = 40, kBottom = 58;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(prec) << v;
  return os.str();
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double t(double v) const {
    double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (int e = static_cast<int>(std::floor(lo)); e <= static_cast<int>(std::ceil(hi)); ++e)
        if (e >= lo - 1e-9 && e <= hi + 1e-9) out.push_back(std::pow(10.0, e));
      if (out.size() < 2) {
        for (double m : {1.0, 2.0, 5.0})
          for (int e = static_cast<int>(std::floor(lo)); e <= static_cast<int>(std::ceil(hi)); ++e) {
            double v = m * std::pow(10.0, e);
            if (std::log10(v) >= lo - 1e-9 && std::log10(v) <= hi + 1e-9) out.push_back(v);
          }
        std::sort(out.begin(), out.end());
      }
      return out;
    }
    double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / 5)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (span / (m * step) <= 7) {
        step *= m;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
      out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return out;
  }
};

Axis make_axis(const std::vector<double>& vals, bool log) {
  Axis a;
  a.log = log;
  double lo = INFINITY, hi = -INFINITY;
  for (double v : vals) {
    if (!std::isfinite(v) || (log && v <= 0)) continue;
    double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= log ? 0.5 : std::max(0.5, std::abs(lo) * 0.1);
    hi += log ? 0.5 : std::max(0.5, std::abs(hi) * 0.1);
  }
  double pad = 0.05 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

std::string frame(const std::string& title, const std::string& xlabel, const std::string& ylabel, const Axis& ax,
                  const Axis& ay) {
  std::ostringstream o;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
    << kW << " " << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ax.ticks()) {
    double x = kLeft + ax.t(v) * pw;
    o << "<line x1=\"" << num(x, 6) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(x, 6) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(x, 6) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << num(v)
      << "</text>\n";
  }
  for (double v : ay.ticks()) {
    double y = kTop + (1 - ay.t(v)) * ph;
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y, 6) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y, 6)
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4, 6) << "\" text-anchor=\"end\">" << num(v)
      << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 16 << "\" text-anchor=\"middle\">" << esc(xlabel)
    << "</text>\n"
    << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << esc(ylabel) << "</text>\n";
  return o.str();
}

}  // namespace

std::string LinePlot::svg() const {
  std::vector<double> allx, ally;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw Error("plot: series '" + s.label + "' has mismatched lengths");
    allx.insert(allx.end(), s.x.begin(), s.x.end());
    ally.insert(ally.end(), s.y.begin(), s.y.end());
  }
  Axis ax = make_axis(allx, logx), ay = make_axis(ally, logy);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  std::ostringstream o;
  o << frame(title, xlabel, ylabel, ax, ay);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string color = s.color.empty() ? kPalette[k % 6] : s.color;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
      pts.emplace_back(kLeft + ax.t(s.x[i]) * pw, kTop + (1 - ay.t(s.y[i])) * ph);
    }
    if (s.line && pts.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : pts) o << num(x, 6) << "," << num(y, 6) << " ";
      o << "\"/>\n";
    }
    if (s.markers)
      for (auto [x, y] : pts)
        o << "<circle cx=\"" << num(x, 6) << "\" cy=\"" << num(y, 6) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    double ly = kTop + 16 + 16 * k;
    o << "<line x1=\"" << kLeft + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + 30 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << kLeft + 36 << "\" y=\"" << ly << "\">" << esc(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void LinePlot::write(const fs::path& path) const { write_text(path, svg()); }

std::string HeatMap::svg() const {
  const std::size_t nx = xs.size(), ny = ys.size();
  if (nx < 2 || ny < 2 || values.size() != nx * ny) throw Error("heatmap: shape mismatch");
  Axis ax{xs.front(), xs.back(), false}, ay{ys.front(), ys.back(), false};
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  double vmax = -INFINITY, vmin = INFINITY;
  auto tr = [&](double v) { return log_scale ? std::log10(std::max(v, floor)) : v; };
  for (double v : values) {
    vmax = std::max(vmax, tr(v));
    vmin = std::min(vmin, tr(v));
  }
  if (!(vmax > vmin)) vmin = vmax - 1;
  std::ostringstream o;
  o << frame(title, xlabel, ylabel, ax, ay);
  // at most 96 cells per axis
  const std::size_t sx = (nx + 95) / 96, sy = (ny + 95) / 96;
  const double cw = pw / nx * sx, chh = ph / ny * sy;
  for (std::size_t iy = 0; iy < ny; iy += sy)
    for (std::size_t ix = 0; ix < nx; ix += sx) {
      double t = (tr(values[iy * nx + ix]) - vmin) / (vmax - vmin);
      int r = static_cast<int>(255 * std::clamp(1.5 * t - 0.2, 0.0, 1.0));
      int g = static_cast<int>(255 * std::clamp(1.5 * t - 0.7, 0.0, 1.0) * 0.9 + 20 * t);
      int b = static_cast<int>(255 * std::clamp(0.6 - std::abs(t - 0.35), 0.0, 1.0) + 40 * (1 - t));
      double x = kLeft + (static_cast<double>(ix) / nx) * pw;
      double y = kTop + ph - (static_cast<double>(iy + sy) / ny) * ph;
      o << "<rect x=\"" << num(x, 6) << "\" y=\"" << num(y, 6) << "\" width=\"" << num(cw + 0.3, 5)
        << "\" height=\"" << num(chh + 0.3, 5) << "\" fill=\"rgb(" << std::clamp(r, 0, 255) << ","
        << std::clamp(g, 0, 255) << "," << std::clamp(b, 0, 255) << ")\"/>\n";
    }
  o << "<text x=\"" << kW - kRight << "\" y=\"" << kTop - 6 << "\" text-anchor=\"end\">"
    << (log_scale ? "log10 range " : "range ") << num(vmin, 3) << " .. " << num(vmax, 3) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

void HeatMap::write(const fs::path& path) const { write_text(path, svg()); }

}  // namespace magwell
