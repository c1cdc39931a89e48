#include "magwell/fbi.hpp"
#include "magwell/io.hpp"
#include "magwell/operator.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace magwell;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(NAN), "nan");
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    double v = d(rng) * std::pow(10.0, i % 40 - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Csv, Escape) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv_escape(""), "");
}

TEST(Csv, WriterFormat) {
  CsvWriter w({"h", "n", "label"});
  w.add_row({0.1, 3L, std::string("x,y")});
  EXPECT_EQ(w.str(), "h,n,label\r\n0.10000000000000001,3,\"x,y\"\r\n");
  EXPECT_THROW(w.add_row({1.0}), Error);
}

TEST(Csv, ParseRoundTripProperty) {
  std::mt19937_64 rng(2);
  const std::string alphabet = "ab,\"\r\n x1.";
  std::uniform_int_distribution<int> pick(0, static_cast<int>(alphabet.size()) - 1), len(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> header{"c0", "c1", "c2"};
    CsvWriter w(header);
    std::vector<std::vector<std::string>> rows;
    for (int r = 0; r < 4; ++r) {
      std::vector<std::string> row;
      std::vector<CsvWriter::Cell> cells;
      for (int c = 0; c < 3; ++c) {
        std::string s;
        int n = len(rng);
        for (int i = 0; i < n; ++i) s += alphabet[pick(rng)];
        row.push_back(s);
        cells.push_back(s);
      }
      rows.push_back(row);
      w.add_row(cells);
    }
    CsvTable t = parse_csv(w.str());
    ASSERT_EQ(t.header, header);
    ASSERT_EQ(t.rows, rows) << w.str();
  }
}

TEST(Csv, TableAccess) {
  CsvTable t = parse_csv("h,lambda\r\n0.5,1.25\r\n0.25,nan\r\n");
  EXPECT_EQ(t.column("lambda"), 1);
  EXPECT_EQ(t.column("missing"), -1);
  EXPECT_EQ(t.number(0, "lambda"), 1.25);
  EXPECT_TRUE(std::isnan(t.number(1, "lambda")));
  EXPECT_THROW(t.number(0, "missing"), Error);
  EXPECT_THROW(parse_csv("a,b\r\n\"open,1\r\n"), Error);
}

TEST(Json, StableKeyOrder) {
  auto dir = magwell::testing::scratch_dir("json");
  Json j;
  j["zeta"] = 1;
  j["alpha"] = 0.1;
  j["mid"] = {{"b", 2}, {"a", 1}};
  write_json(dir / "a.json", j);
  std::string text = slurp(dir / "a.json");
  EXPECT_LT(text.find("zeta"), text.find("alpha"));
  EXPECT_LT(text.find("\"b\""), text.find("\"a\""));
  Json back = read_json(dir / "a.json");
  EXPECT_EQ(back.dump(), j.dump());
  write_json(dir / "b.json", back);
  EXPECT_EQ(slurp(dir / "b.json"), text);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(read_json(dir / "bad.json"), Error);
  EXPECT_THROW(read_json(dir / "absent.json"), Error);
}

TEST(MatrixMarket, RoundTrip) {
  auto dir = magwell::testing::scratch_dir("mtx");
  auto op = assemble_magnetic_laplacian(MagneticField::make("gaussian_well"), Grid2D(2.0, 20), 0.2, 1.0);
  write_matrix_market(dir / "m.mtx", op.matrix);
  std::string text = slurp(dir / "m.mtx");
  EXPECT_EQ(text.rfind("%%MatrixMarket matrix coordinate complex general", 0), 0u);
  SparseMatrix back = read_matrix_market(dir / "m.mtx");
  ASSERT_EQ(back.rows(), op.matrix.rows());
  EXPECT_EQ(back.nonZeros(), op.matrix.nonZeros());
  EXPECT_EQ(SparseMatrix(back - op.matrix).norm(), 0.0);
}

TEST(Complex64, RoundTripAndLayout) {
  auto dir = magwell::testing::scratch_dir("c64");
  std::vector<cd> v{{1.0, 2.0}, {-0.5, 1e-3}, {3.25, -7.0}};
  write_complex64(dir / "v.bin", v);
  EXPECT_EQ(fs::file_size(dir / "v.bin"), 24u);
  std::string bytes = slurp(dir / "v.bin");
  // float32 1.0 little-endian
  EXPECT_EQ(bytes.substr(0, 4), std::string("\x00\x00\x80\x3f", 4));
  auto back = read_complex64(dir / "v.bin");
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LT(std::abs(back[i] - v[i]), 1e-7 * std::abs(v[i]));
}

TEST(Eigenvector, HeaderAndData) {
  auto dir = magwell::testing::scratch_dir("eigvec");
  Grid2D g(2.0, 20);
  GridVector u = magwell::testing::gaussian(g, 0.2);
  u.normalize();
  EigenvectorRecord rec{g, 0.2, 1, 0.25, 1e-10, "gaussian_well"};
  auto files = write_eigenvector(dir / "h0.2_l1", u, rec);
  ASSERT_EQ(files.size(), 2u);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f));
  Json head;
  GridVector back = read_eigenvector(dir / "h0.2_l1", &head);
  EXPECT_LT((back - u).norm(), 1e-6);
  EXPECT_EQ(head["dtype"], "complex64");
  EXPECT_EQ(head["byte_order"], "little");
  EXPECT_EQ(head["length"], g.size());
  EXPECT_EQ(head["grid"]["N"], 20);
  EXPECT_EQ(head["index"], 1);
  EXPECT_EQ(head["field"], "gaussian_well");
}

TEST(Slice, CsvAndBinary) {
  auto dir = magwell::testing::scratch_dir("slice");
  PhaseSpaceSlice s;
  s.axis1 = PhaseAxis::X1;
  s.axis2 = PhaseAxis::Xi1;
  s.grid1 = {-1, 0, 1};
  s.grid2 = {-0.5, 0.5};
  s.h = 0.1;
  for (int i = 0; i < 6; ++i) s.values.push_back(cd(i, -i));
  write_slice_csv(dir / "s.csv", s);
  CsvTable t = read_csv(dir / "s.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"x1", "xi1", "re", "im", "abs2"}));
  ASSERT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(t.number(4, "x1"), 0.0);
  EXPECT_EQ(t.number(4, "xi1"), 0.5);
  EXPECT_EQ(t.number(4, "abs2"), 32.0);
  auto files = write_slice_binary(dir / "s", s);
  ASSERT_EQ(files.size(), 2u);
  Json head = read_json(dir / "s.json");
  EXPECT_EQ(head["shape"], Json::array({2, 3}));
  EXPECT_EQ(read_complex64(dir / "s.bin").size(), 6u);
}

TEST(Svg, Plots) {
  LinePlot p;
  p.title = "a < b & c";
  p.xlabel = "h";
  p.ylabel = "lambda";
  p.logx = p.logy = true;
  p.series.push_back({"data", {0.1, 0.05, 0.025}, {1, 0.5, 0.25}, true, true, ""});
  std::string svg = p.svg();
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
  EXPECT_NE(svg.find("polyline"), std::string::npos);

  HeatMap m;
  m.xs = {0, 1, 2};
  m.ys = {0, 1};
  m.values = {1, 1e-3, 1e-6, 1e-9, 0, 1};
  std::string hs = m.svg();
  EXPECT_NE(hs.find("<rect"), std::string::npos);
  m.values.pop_back();
  EXPECT_THROW(m.svg(), Error);
}
