#include "jeq/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <utility>

#include "jeq/field_io.hpp"
#include "jeq/parallel.hpp"
#include "jeq/stencil.hpp"

namespace jeq {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string key, value;
  int line = 0;
};

[[noreturn]] void fail_line(int line, const std::string& what) {
  fail(errc::config_error, "config line " + std::to_string(line) + ": " + what);
}

double parse_double(const RawEntry& e) {
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
  if (ec != std::errc() || ptr != last)
    fail_line(e.line, "key '" + e.key + "': expected a number, got '" + e.value + "'");
  return v;
}

// Returns false when the value is not a full numeric literal (no error).
bool try_parse_double(const std::string& s, double& v) {
  const char* first = s.data();
  const char* last = first + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
  return ec == std::errc() && ptr == last;
}

long parse_int(const RawEntry& e) {
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  long v = 0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    fail_line(e.line, "key '" + e.key + "': expected an integer, got '" + e.value + "'");
  return v;
}

std::uint64_t parse_u64(const RawEntry& e) {
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    fail_line(e.line,
              "key '" + e.key + "': expected an unsigned integer, got '" + e.value + "'");
  return v;
}

bool parse_bool(const RawEntry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  fail_line(e.line, "key '" + e.key + "': expected true/false, got '" + e.value + "'");
}

std::vector<int> parse_int_list(const RawEntry& e) {
  std::vector<int> out;
  std::size_t pos = 0;
  const std::string& s = e.value;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string item = trim(s.substr(pos, comma == std::string::npos
                                              ? std::string::npos
                                              : comma - pos));
    if (item.empty())
      fail_line(e.line, "key '" + e.key + "': empty entry in list '" + s + "'");
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      fail_line(e.line, "key '" + e.key + "': bad integer '" + item + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Strips a "csv:" prefix; returns true and the path when present.
bool csv_path(const std::string& value, std::string& path) {
  if (value.rfind("csv:", 0) != 0) return false;
  path = trim(value.substr(4));
  return true;
}

void check_csv(const RawEntry& e, const std::string& path, FieldKind kind,
               int n, const std::vector<int>& shape) {
  if (path.empty()) fail_line(e.line, "key '" + e.key + "': empty csv path");
  if (!std::filesystem::exists(path))
    fail_line(e.line, "key '" + e.key + "': file '" + path + "' does not exist");
  FieldHeader h = read_field_header(path);
  if (h.kind != kind)
    fail_line(e.line, "key '" + e.key + "': '" + path + "' holds a " +
                          (h.kind == FieldKind::scalar ? "scalar" : "hermitian") +
                          " field, expected " +
                          (kind == FieldKind::scalar ? "scalar" : "hermitian"));
  if (h.n != n)
    fail_line(e.line, "key '" + e.key + "': dimension mismatch, file '" + path +
                          "' has n = " + std::to_string(h.n) + " but config has n = " +
                          std::to_string(n));
  if (h.shape != shape) {
    std::string got, want;
    for (std::size_t i = 0; i < h.shape.size(); ++i)
      got += (i ? "," : "") + std::to_string(h.shape[i]);
    for (std::size_t i = 0; i < shape.size(); ++i)
      want += (i ? "," : "") + std::to_string(shape[i]);
    fail_line(e.line, "key '" + e.key + "': shape mismatch, file '" + path + "' has " +
                          got + " but config has " + want);
  }
}

ScalarSpec parse_scalar_spec(const RawEntry& e, int n, const std::vector<int>& shape) {
  ScalarSpec spec;
  if (csv_path(e.value, spec.path)) {
    spec.kind = ScalarSpec::Kind::csv;
    check_csv(e, spec.path, FieldKind::scalar, n, shape);
    return spec;
  }
  if (try_parse_double(e.value, spec.value)) {
    spec.kind = ScalarSpec::Kind::constant;
    return spec;
  }
  spec.kind = ScalarSpec::Kind::expression;
  spec.text = e.value;
  try {
    spec.expr = Expression::parse(spec.text, n);
  } catch (const error& err) {
    fail_line(e.line, "key '" + e.key + "': " + err.what());
  }
  return spec;
}

ChiSpec parse_chi_spec(const RawEntry& e, int n, const std::vector<int>& shape) {
  ChiSpec spec;
  if (csv_path(e.value, spec.path)) {
    check_csv(e, spec.path, FieldKind::hermitian, n, shape);
    return spec;
  }
  std::string rest = trim(e.value);
  // Optional leading scale.
  if (!rest.empty() && rest.rfind("ddbar", 0) != 0) {
    const char* first = rest.data();
    const char* last = first + rest.size();
    auto [ptr, ec] = std::from_chars(first, last, spec.scale, std::chars_format::general);
    if (ec != std::errc() || ptr == first)
      fail_line(e.line, "key 'chi': expected <scale>, ddbar(<expr>), "
                        "<scale> + ddbar(<expr>), or csv:<path>; got '" +
                            e.value + "'");
    rest = trim(rest.substr(std::size_t(ptr - first)));
    if (rest.empty()) return spec;  // pure scalar multiple
    if (rest[0] != '+')
      fail_line(e.line, "key 'chi': expected '+ ddbar(...)' after the scale, got '" +
                            rest + "'");
    rest = trim(rest.substr(1));
  }
  if (rest.rfind("ddbar", 0) != 0)
    fail_line(e.line, "key 'chi': expected ddbar(<expr>), got '" + rest + "'");
  rest = trim(rest.substr(5));
  if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
    fail_line(e.line, "key 'chi': ddbar needs a parenthesized potential");
  std::string inner = rest.substr(1, rest.size() - 2);
  spec.has_potential = true;
  spec.potential_text = inner;
  try {
    spec.potential = Expression::parse(inner, n);
  } catch (const error& err) {
    fail_line(e.line, std::string("key 'chi': ") + err.what());
  }
  return spec;
}

const char* const kKnownKeys[] = {
    "n",           "shape",        "topology",
    "metric",      "chi",          "psi",
    "usub",        "phi",          "output",
    "seed",        "a_grad",       "a_hess",
    "solved_tol",  "manufactured", "coarse",
    "fine",        "max_newton_iters", "newton_tol",
    "armijo_factor", "min_step",   "krylov_tol",
    "krylov_max_iters", "continuity_steps", "positivity_floor",
    "require_subsolution", "subsolution_slack",
};

bool known_key(const std::string& k) {
  for (const char* s : kKnownKeys)
    if (k == s) return true;
  return false;
}

}  // namespace

ProblemConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open config file '" + path + "'");

  std::vector<RawEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail_line(lineno, "expected 'key = value', got '" + t + "'");
    RawEntry e;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty()) fail_line(lineno, "missing key before '='");
    if (!known_key(e.key)) fail_line(lineno, "unknown key '" + e.key + "'");
    for (const RawEntry& prev : entries)
      if (prev.key == e.key)
        fail_line(lineno, "duplicate key '" + e.key + "' (first at line " +
                              std::to_string(prev.line) + ")");
    if (e.value.empty()) fail_line(lineno, "key '" + e.key + "': empty value");
    entries.push_back(std::move(e));
  }

  auto find = [&](const char* key) -> const RawEntry* {
    for (const RawEntry& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  };

  ProblemConfig cfg;

  // Structural keys first; everything later may depend on them.
  const RawEntry* en = find("n");
  if (!en) fail(errc::config_error, "missing required key 'n'");
  long nval = parse_int(*en);
  if (nval < 2 || nval > 8)
    fail_line(en->line, "key 'n': must be between 2 and 8, got " + std::to_string(nval));
  cfg.n = int(nval);

  const RawEntry* eshape = find("shape");
  if (!eshape) fail(errc::config_error, "missing required key 'shape'");
  cfg.shape = parse_int_list(*eshape);
  if (int(cfg.shape.size()) != 2 * cfg.n)
    fail_line(eshape->line, "key 'shape': need " + std::to_string(2 * cfg.n) +
                                " axis extents for n = " + std::to_string(cfg.n) +
                                ", got " + std::to_string(cfg.shape.size()));
  for (int s : cfg.shape)
    if (s < 4)
      fail_line(eshape->line, "key 'shape': axis extent " + std::to_string(s) +
                                  " is below the stencil minimum of 4");

  const RawEntry* etopo = find("topology");
  if (!etopo) fail(errc::config_error, "missing required key 'topology'");
  if (etopo->value == "periodic")
    cfg.topology = Topology::periodic;
  else if (etopo->value == "box")
    cfg.topology = Topology::box;
  else
    fail_line(etopo->line,
              "key 'topology': expected periodic or box, got '" + etopo->value + "'");

  const RawEntry* echi = find("chi");
  if (!echi) fail(errc::config_error, "missing required key 'chi'");

  for (const RawEntry& e : entries) {
    if (e.key == "n" || e.key == "shape" || e.key == "topology") continue;
    if (e.key == "chi") {
      cfg.chi = parse_chi_spec(e, cfg.n, cfg.shape);
    } else if (e.key == "metric") {
      if (e.value == "flat") {
        cfg.metric.flat = true;
      } else if (csv_path(e.value, cfg.metric.path)) {
        cfg.metric.flat = false;
        check_csv(e, cfg.metric.path, FieldKind::hermitian, cfg.n, cfg.shape);
      } else {
        fail_line(e.line, "key 'metric': expected flat or csv:<path>, got '" +
                              e.value + "'");
      }
    } else if (e.key == "psi") {
      cfg.psi = parse_scalar_spec(e, cfg.n, cfg.shape);
      if (cfg.psi.kind == ScalarSpec::Kind::constant && cfg.psi.value <= 0)
        fail_line(e.line, "key 'psi': must be positive");
    } else if (e.key == "usub") {
      cfg.usub = parse_scalar_spec(e, cfg.n, cfg.shape);
    } else if (e.key == "phi") {
      cfg.phi = parse_scalar_spec(e, cfg.n, cfg.shape);
    } else if (e.key == "output") {
      cfg.output = e.value;
    } else if (e.key == "seed") {
      cfg.seed = parse_u64(e);
    } else if (e.key == "a_grad") {
      cfg.a_grad = parse_double(e);
    } else if (e.key == "a_hess") {
      cfg.a_hess = parse_double(e);
    } else if (e.key == "solved_tol") {
      cfg.solved_tol = parse_double(e);
      if (cfg.solved_tol <= 0) fail_line(e.line, "key 'solved_tol': must be positive");
    } else if (e.key == "manufactured") {
      cfg.manufactured = e.value;
      try {
        (void)Expression::parse(cfg.manufactured, cfg.n);
      } catch (const error& err) {
        fail_line(e.line, std::string("key 'manufactured': ") + err.what());
      }
    } else if (e.key == "coarse") {
      long v = parse_int(e);
      if (v < 5) fail_line(e.line, "key 'coarse': need at least 5 points per axis");
      cfg.coarse = int(v);
    } else if (e.key == "fine") {
      long v = parse_int(e);
      if (v < 5) fail_line(e.line, "key 'fine': need at least 5 points per axis");
      cfg.fine = int(v);
    } else if (e.key == "max_newton_iters") {
      cfg.solve.max_newton_iters = int(parse_int(e));
    } else if (e.key == "newton_tol") {
      cfg.solve.newton_tol = parse_double(e);
    } else if (e.key == "armijo_factor") {
      cfg.solve.armijo_factor = parse_double(e);
    } else if (e.key == "min_step") {
      cfg.solve.min_step = parse_double(e);
    } else if (e.key == "krylov_tol") {
      cfg.solve.krylov_tol = parse_double(e);
    } else if (e.key == "krylov_max_iters") {
      cfg.solve.krylov_max_iters = int(parse_int(e));
    } else if (e.key == "continuity_steps") {
      cfg.solve.continuity_steps = int(parse_int(e));
    } else if (e.key == "positivity_floor") {
      cfg.solve.positivity_floor = parse_double(e);
    } else if (e.key == "require_subsolution") {
      cfg.solve.require_subsolution = parse_bool(e);
    } else if (e.key == "subsolution_slack") {
      cfg.solve.subsolution_slack = parse_double(e);
    }
  }

  if (cfg.phi.present() && cfg.topology != Topology::box) {
    const RawEntry* e = find("phi");
    fail_line(e->line, "key 'phi': boundary values apply to box grids only");
  }
  if (cfg.fine <= cfg.coarse) {
    const RawEntry* e = find("fine");
    int ln = e ? e->line : (find("coarse") ? find("coarse")->line : 0);
    fail_line(ln, "convergence resolutions need fine > coarse (got " +
                      std::to_string(cfg.coarse) + " and " + std::to_string(cfg.fine) +
                      ")");
  }
  try {
    cfg.solve.validate();
  } catch (const error& err) {
    fail(errc::config_error, std::string("solver settings: ") + err.what());
  }
  return cfg;
}

ScalarField eval_on_grid(const Expression& f, const Grid& grid) {
  if (f.vars() != 0 && f.vars() != grid.n())
    fail(errc::config_error, "expression uses n = " + std::to_string(f.vars()) +
                                 " but the grid has n = " + std::to_string(grid.n()));
  ScalarField out(grid);
  const int axes = grid.axes();
  parallel_for(grid.size(), [&](std::size_t p) {
    int multi[16];
    double xy[16];
    grid.unravel(p, multi);
    grid.coordinates(multi, xy);
    out[p] = f.eval(std::span<const double>(xy, std::size_t(axes)));
  });
  return out;
}

HermitianField build_metric(const ProblemConfig& cfg, const Grid& grid) {
  if (cfg.metric.flat)
    return HermitianField(grid, HermitianMatrix::identity(grid.n()));
  return read_hermitian_field(cfg.metric.path, grid);
}

HermitianField build_chi(const ProblemConfig& cfg, const Grid& grid) {
  if (!cfg.chi.path.empty()) return read_hermitian_field(cfg.chi.path, grid);
  HermitianField base(grid, cfg.chi.scale * HermitianMatrix::identity(grid.n()));
  if (!cfg.chi.has_potential) return base;
  ScalarField pot = eval_on_grid(cfg.chi.potential, grid);
  return gfrak_field(base, pot).field;  // chi = scale*omega + ddbar(potential)
}

ScalarField build_scalar(const ScalarSpec& spec, const Grid& grid, const char* name,
                         double fallback) {
  switch (spec.kind) {
    case ScalarSpec::Kind::absent: return ScalarField(grid, fallback);
    case ScalarSpec::Kind::constant: return ScalarField(grid, spec.value);
    case ScalarSpec::Kind::expression: {
      try {
        return eval_on_grid(spec.expr, grid);
      } catch (const error& err) {
        fail(errc::config_error, std::string(name) + ": " + err.what());
      }
    }
    case ScalarSpec::Kind::csv: return read_scalar_field(spec.path, grid);
  }
  fail(errc::config_error, std::string(name) + ": unreachable spec kind");
}

}  // namespace jeq
