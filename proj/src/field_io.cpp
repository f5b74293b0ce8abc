#include "jeq/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

namespace jeq {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  fail(errc::parse_error, path + ": " + what + " (line " + std::to_string(line) + ")");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

long parse_int(const std::string& tok, const std::string& path, std::size_t line) {
  if (tok.empty()) parse_fail(path, line, "empty field where an integer was expected");
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size())
    parse_fail(path, line, "malformed integer '" + tok + "'");
  return v;
}

double parse_double(const std::string& tok, const std::string& path,
                    std::size_t line) {
  if (tok.empty()) parse_fail(path, line, "empty field where a number was expected");
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    parse_fail(path, line, "malformed number '" + tok + "'");
  return v;
}

std::string header_line(int n, const std::vector<int>& shape, FieldKind kind) {
  std::string s = "# jeq-field v1, n=" + std::to_string(n) + ", shape=";
  for (std::size_t a = 0; a < shape.size(); ++a) {
    if (a) s += ',';
    s += std::to_string(shape[a]);
  }
  s += ", kind=";
  s += kind == FieldKind::scalar ? "scalar" : "hermitian";
  s += '\n';
  return s;
}

FieldHeader parse_header(const std::string& line, const std::string& path) {
  FieldHeader h;
  std::vector<std::string> tok = split_commas(line);
  if (tok.size() < 4 || tok[0] != "# jeq-field v1")
    parse_fail(path, 1, "expected header '# jeq-field v1, n=..., shape=..., kind=...'");
  if (tok[1].rfind("n=", 0) != 0)
    parse_fail(path, 1, "expected 'n=<dim>' after the version tag");
  h.n = int(parse_int(tok[1].substr(2), path, 1));
  if (h.n < 1 || h.n > 8) parse_fail(path, 1, "n out of range [1, 8]");
  if (tok[2].rfind("shape=", 0) != 0)
    parse_fail(path, 1, "expected 'shape=<s1,...>' after n");
  h.shape.push_back(int(parse_int(tok[2].substr(6), path, 1)));
  std::size_t t = 3;
  while (t < tok.size() - 1) h.shape.push_back(int(parse_int(tok[t++], path, 1)));
  const std::string& kind = tok.back();
  if (kind == "kind=scalar")
    h.kind = FieldKind::scalar;
  else if (kind == "kind=hermitian")
    h.kind = FieldKind::hermitian;
  else
    parse_fail(path, 1, "expected 'kind=scalar' or 'kind=hermitian', got '" + kind + "'");
  if (int(h.shape.size()) != 2 * h.n)
    parse_fail(path, 1, "shape lists " + std::to_string(h.shape.size()) +
                            " extents, expected " + std::to_string(2 * h.n));
  return h;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot open '" + path + "' for writing");
  out.write(body.data(), std::streamsize(body.size()));
  out.flush();
  if (!out) fail(errc::io_error, "write to '" + path + "' failed");
}

class FieldReader {
 public:
  FieldReader(const std::string& path, const Grid& grid, FieldKind kind)
      : path_(path), grid_(grid), in_(path) {
    if (!in_) fail(errc::io_error, "cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in_, line)) parse_fail(path_, 1, "empty file");
    lineno_ = 1;
    FieldHeader h = parse_header(line, path_);
    if (h.kind != kind)
      parse_fail(path_, 1, std::string("field kind is '") +
                               (h.kind == FieldKind::scalar ? "scalar" : "hermitian") +
                               "', expected '" +
                               (kind == FieldKind::scalar ? "scalar" : "hermitian") + "'");
    if (h.n != grid.n() || h.shape != grid.shape())
      parse_fail(path_, 1, "header dimensions do not match the expected grid " +
                               grid.describe());
  }

  // Reads row p, validates its multi-index, returns the value tokens.
  std::vector<std::string> row(std::size_t p, std::size_t nvalues) {
    std::string line;
    if (!std::getline(in_, line))
      parse_fail(path_, lineno_ + 1,
                 "unexpected end of file: expected " + std::to_string(grid_.size()) +
                     " data rows, found " + std::to_string(p));
    ++lineno_;
    std::vector<std::string> tok = split_commas(line);
    const std::size_t nidx = std::size_t(grid_.axes());
    if (tok.size() != nidx + nvalues)
      parse_fail(path_, lineno_, "row has " + std::to_string(tok.size()) +
                                     " fields, expected " + std::to_string(nidx + nvalues));
    int expect[16];
    grid_.unravel(p, expect);
    for (std::size_t a = 0; a < nidx; ++a)
      if (parse_int(tok[a], path_, lineno_) != expect[a])
        parse_fail(path_, lineno_,
                   "row multi-index does not match the row-major order (expected " +
                       grid_.index_string(p) + ")");
    tok.erase(tok.begin(), tok.begin() + std::ptrdiff_t(nidx));
    return tok;
  }

  void finish() {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!trim(line).empty())
        parse_fail(path_, lineno_, "trailing content after the last data row");
    }
  }

  const std::string& path() const { return path_; }
  std::size_t lineno() const { return lineno_; }

 private:
  std::string path_;
  const Grid& grid_;
  std::ifstream in_;
  std::size_t lineno_ = 0;
};

void append_indices(std::string& s, const Grid& G, const int* multi) {
  for (int a = 0; a < G.axes(); ++a) {
    if (a) s += ',';
    s += std::to_string(multi[a]);
  }
}

}  // namespace

FieldHeader read_field_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  return parse_header(line, path);
}

void write_field(const std::string& path, const ScalarField& f) {
  const Grid& G = f.grid();
  std::string body = header_line(G.n(), G.shape(), FieldKind::scalar);
  body.reserve(body.size() + G.size() * (std::size_t(G.axes()) * 4 + 28));
  int multi[16];
  for (std::size_t p = 0; p < G.size(); ++p) {
    G.unravel(p, multi);
    append_indices(body, G, multi);
    body += ',';
    body += fmt17(f[p]);
    body += '\n';
  }
  write_text(path, body);
}

void write_field(const std::string& path, const HermitianField& f) {
  const Grid& G = f.grid();
  const int n = G.n();
  std::string body = header_line(n, G.shape(), FieldKind::hermitian);
  body.reserve(body.size() +
               G.size() * (std::size_t(G.axes()) * 4 + std::size_t(2 * n * n) * 28));
  int multi[16];
  for (std::size_t p = 0; p < G.size(); ++p) {
    G.unravel(p, multi);
    append_indices(body, G, multi);
    const cxd* m = f.at(p);
    for (int k = 0; k < n * n; ++k) {
      body += ',';
      body += fmt17(m[k].real());
      body += ',';
      body += fmt17(m[k].imag());
    }
    body += '\n';
  }
  write_text(path, body);
}

ScalarField read_scalar_field(const std::string& path, const Grid& grid) {
  FieldReader r(path, grid, FieldKind::scalar);
  ScalarField f(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::vector<std::string> tok = r.row(p, 1);
    f[p] = parse_double(tok[0], r.path(), r.lineno());
  }
  r.finish();
  return f;
}

HermitianField read_hermitian_field(const std::string& path, const Grid& grid) {
  FieldReader r(path, grid, FieldKind::hermitian);
  const int n = grid.n();
  HermitianField f(grid);
  std::vector<cxd> block(std::size_t(n) * std::size_t(n));
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::vector<std::string> tok = r.row(p, std::size_t(2 * n * n));
    double scale = 1.0;
    for (int k = 0; k < n * n; ++k) {
      block[std::size_t(k)] =
          cxd(parse_double(tok[std::size_t(2 * k)], r.path(), r.lineno()),
              parse_double(tok[std::size_t(2 * k + 1)], r.path(), r.lineno()));
      scale = std::max(scale, std::abs(block[std::size_t(k)]));
    }
    cxd* dst = f.at(p);
    for (int i = 0; i < n; ++i) {
      const cxd d = block[std::size_t(i) * n + i];
      if (std::abs(d.imag()) > 1e-12 * scale)
        parse_fail(r.path(), r.lineno(), "diagonal entry (" + std::to_string(i) +
                                             "," + std::to_string(i) +
                                             ") has a non-real value");
      dst[std::size_t(i) * n + i] = cxd(d.real(), 0.0);
      for (int j = i + 1; j < n; ++j) {
        const cxd a = block[std::size_t(i) * n + j];
        const cxd b = block[std::size_t(j) * n + i];
        if (std::abs(a - std::conj(b)) > 1e-12 * scale)
          parse_fail(r.path(), r.lineno(),
                     "entries (" + std::to_string(i) + "," + std::to_string(j) +
                         ") and (" + std::to_string(j) + "," + std::to_string(i) +
                         ") are not conjugate mirrors");
        const cxd v = 0.5 * (a + std::conj(b));
        dst[std::size_t(i) * n + j] = v;
        dst[std::size_t(j) * n + i] = std::conj(v);
      }
    }
  }
  r.finish();
  return f;
}

}  // namespace jeq
