#include "saddle3/io/matrix_market.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "saddle3/errors.hpp"

namespace saddle3::io {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank_or_comment(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '%';
}

}  // namespace

SparseMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  std::istringstream head(line);
  std::string banner, object, format, field, symmetry;
  head >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || symmetry.empty())
    throw ParseError("malformed header", lineno);
  field = lower(field);
  symmetry = lower(symmetry);
  if (lower(format) != "coordinate") throw UnsupportedField("format '" + format + "' is not supported");
  if (field == "complex" || field == "pattern")
    throw UnsupportedField("field '" + field + "' is not supported");
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError("unknown field '" + field + "'", lineno);
  if (symmetry != "general" && symmetry != "symmetric")
    throw UnsupportedField("symmetry '" + symmetry + "' is not supported");
  const bool symmetric = symmetry == "symmetric";

  do {
    if (!std::getline(in, line)) throw ParseError("missing size line", lineno + 1);
    ++lineno;
  } while (blank_or_comment(line));
  long long rows = -1, cols = -1, nnz = -1;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> rows >> cols >> nnz) || (ss >> extra) || rows < 0 || cols < 0 || nnz < 0)
      throw ParseError("malformed size line", lineno);
  }
  if (symmetric && rows != cols) throw ParseError("symmetric matrix must be square", lineno);

  std::vector<linalg::Triplet> t;
  t.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  long long seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    if (seen == nnz) throw ParseError("more entries than declared", lineno);
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double v = 0.0;
    std::string extra;
    if (!(ss >> i >> j >> v) || (ss >> extra)) throw ParseError("malformed entry", lineno);
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("index out of range", lineno);
    if (!std::isfinite(v)) throw ParseError("non-finite value", lineno);
    if (symmetric && j > i) throw ParseError("symmetric file has an entry above the diagonal", lineno);
    auto r = static_cast<std::size_t>(i - 1), c = static_cast<std::size_t>(j - 1);
    t.push_back({r, c, v});
    if (symmetric && r != c) t.push_back({c, r, v});
    ++seen;
  }
  if (seen != nnz) throw ParseError("fewer entries than declared", lineno);
  return SparseMatrix::from_triplets(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), t);
}

SparseMatrix read_matrix_market(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return parse_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(e.detail() + " in " + path.string(), e.line());
  }
}

void write_matrix_market(const SparseMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto cols = m.row_cols(i);
    auto vals = m.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
      out << i + 1 << ' ' << cols[k] + 1 << ' ' << buf << '\n';
    }
  }
}

void write_matrix_market(const SparseMatrix& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_matrix_market(m, out);
  if (!out) throw IoError("write failed for " + path.string());
}

void save_system(const BlockSystem& sys, const fs::path& dir, const nlohmann::json& meta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_matrix_market(sys.A, dir / "A.mtx");
  write_matrix_market(sys.B, dir / "B.mtx");
  write_matrix_market(sys.C, dir / "C.mtx");
  write_matrix_market(sys.D, dir / "D.mtx");
  nlohmann::json j;
  j["schema"] = 1;
  j["n"] = sys.n();
  j["m"] = sys.m();
  j["l"] = sys.l();
  j["f"] = sys.f;
  j["g"] = sys.g;
  j["h"] = sys.h;
  j["meta"] = meta;
  std::ofstream out(dir / "system.json");
  if (!out) throw IoError("cannot write " + (dir / "system.json").string());
  out << j.dump(2) << '\n';
}

nlohmann::json load_system_meta(const fs::path& dir) {
  std::ifstream in(dir / "system.json");
  if (!in) throw IoError("cannot open " + (dir / "system.json").string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError((dir / "system.json").string() + ": " + e.what(), 0);
  }
}

BlockSystem load_system(const fs::path& dir) {
  nlohmann::json j = load_system_meta(dir);
  SparseMatrix a = read_matrix_market(dir / "A.mtx");
  SparseMatrix b = read_matrix_market(dir / "B.mtx");
  SparseMatrix c = read_matrix_market(dir / "C.mtx");
  SparseMatrix d = read_matrix_market(dir / "D.mtx");
  if (j.value("n", a.rows()) != a.rows() || j.value("m", b.rows()) != b.rows() ||
      j.value("l", c.rows()) != c.rows())
    throw DimensionMismatch("system.json dimensions disagree with the .mtx files in " + dir.string());
  if (j.contains("f") && j.contains("g") && j.contains("h"))
    return BlockSystem::create(std::move(a), std::move(b), std::move(c), std::move(d),
                               j["f"].get<Vector>(), j["g"].get<Vector>(), j["h"].get<Vector>());
  return BlockSystem::with_unit_solution(std::move(a), std::move(b), std::move(c), std::move(d));
}

}  // namespace saddle3::io
