#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bep/arcs.hpp"
#include "bep/bep_solver.hpp"
#include "bep/core.hpp"
#include "bep/grid.hpp"
#include "bep/poly_solver.hpp"

namespace bep::io {

using json = nlohmann::json;

/// Input error tied to one field of a problem file.
class SpecError : public InvalidArgument {
 public:
  SpecError(std::string field, const std::string& msg)
      : InvalidArgument(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Method { dual_ascent, poly, both };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::dual_ascent: return "dual_ascent";
    case Method::poly: return "poly";
    case Method::both: return "both";
  }
  return "dual_ascent";
}

struct Sample {
  double theta = 0.0;
  cplx value;
};

/// Boundary data: explicit samples, a named builtin, or a constant.
struct DataSource {
  enum class Kind { samples, builtin, constant };
  Kind kind = Kind::constant;
  std::vector<Sample> samples;
  std::string builtin;
  json params = json::object();
  double constant = 1.0;
};

struct ProblemSpec {
  std::size_t grid_n = 4096;
  std::vector<Arc> arcs_I;
  DataSource f;
  DataSource M;
  Method method = Method::dual_ascent;
  SolverOptions options;
  PolyOptions poly_options;
  int poly_degree = 32;
  std::vector<int> degrees{4, 8, 16, 32};

  Grid grid() const { return Grid(grid_n); }
  ArcSet arcs() const { return ArcSet(arcs_I); }
};

// Builtin boundary functions.

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"const2", "conj_z", "half_z", "pole"};
  return names;
}

inline cplx pole_location(const json& params) {
  cplx a{2.0, 0.0};
  if (params.contains("a")) {
    const json& v = params.at("a");
    if (v.is_number()) {
      a = v.get<double>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      a = {v[0].get<double>(), v[1].get<double>()};
    } else {
      throw SpecError("f.params.a", "expected a number or a [re, im] pair");
    }
  }
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw SpecError("f.params.a", "must be finite");
  if (std::abs(std::abs(a) - 1.0) < 1e-9) throw SpecError("f.params.a", "pole must not lie on the unit circle");
  return a;
}

inline GridFunction sample_builtin(const std::string& name, const json& params, const Grid& grid) {
  if (name == "half_z") return GridFunction::sample(grid, [](double t) { return 0.5 * std::polar(1.0, t); });
  if (name == "const2") return GridFunction::constant(grid, 2.0);
  if (name == "conj_z") return GridFunction::sample(grid, [](double t) { return std::polar(1.0, -t); });
  if (name == "pole") {
    const cplx a = pole_location(params);
    return GridFunction::sample(grid, [a](double t) { return 1.0 / (std::polar(1.0, t) - a); });
  }
  std::string valid;
  for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw SpecError("f.builtin", "unknown builtin '" + name + "' (valid: " + valid + ")");
}

/// Value at z of the analytic extension of a builtin, when it has one.
inline std::optional<cplx> builtin_extension(const std::string& name, const json& params, cplx z) {
  if (name == "half_z") return 0.5 * z;
  if (name == "const2") return cplx(2.0);
  if (name == "pole") {
    const cplx a = pole_location(params);
    if (std::abs(a) > 1.0) return 1.0 / (z - a);
  }
  return std::nullopt;
}

// Field readers.

namespace detail {

inline double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw SpecError(field, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw SpecError(field, "must be finite");
  return v;
}

inline std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw SpecError(field, "expected a non-negative integer");
  return j.get<std::size_t>();
}

inline std::vector<Sample> read_samples(const json& j, const std::string& field, bool real_only) {
  if (!j.is_array() || j.empty()) throw SpecError(field, "expected a non-empty array of samples");
  std::vector<Sample> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = field + "[" + std::to_string(i) + "]";
    const json& row = j[i];
    const std::size_t want = real_only ? 2 : 3;
    if (!row.is_array() || (row.size() != want && !(real_only && row.size() == 3))) {
      throw SpecError(at, real_only ? "expected [theta, value]" : "expected [theta, re, im]");
    }
    double theta = number(row[0], at);
    if (theta < 0.0 || theta >= kTwoPi) throw SpecError(at, "angle must lie in [0, 2pi)");
    double re = number(row[1], at);
    double im = row.size() == 3 ? number(row[2], at) : 0.0;
    out.push_back({theta, {re, im}});
  }
  return out;
}

/// Rows "theta,re[,im]" from a CSV file; a non-numeric first line is a header.
inline std::vector<Sample> read_sample_csv(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw SpecError(field, "cannot open " + path.string());
  std::vector<Sample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (lineno == 1) continue;
      throw SpecError(field, path.string() + " line " + std::to_string(lineno) + " is not numeric");
    }
    if (vals.size() < 2 || vals.size() > 3) {
      throw SpecError(field, path.string() + " line " + std::to_string(lineno) + " needs 2 or 3 columns");
    }
    out.push_back({vals[0], {vals[1], vals.size() == 3 ? vals[2] : 0.0}});
  }
  if (out.empty()) throw SpecError(field, path.string() + " has no samples");
  return out;
}

inline void apply_option(SolverOptions& so, PolyOptions& po, ProblemSpec& spec, const std::string& key,
                         const json& v) {
  const std::string field = "solver." + key;
  if (key == "max_iters") so.max_iters = count(v, field);
  else if (key == "tol_gap") so.tol_gap = number(v, field);
  else if (key == "tol_saturation") so.tol_saturation = number(v, field);
  else if (key == "armijo_c") so.armijo_c = number(v, field);
  else if (key == "backtrack_factor") so.backtrack_factor = number(v, field);
  else if (key == "lambda_floor") so.lambda_floor = number(v, field);
  else if (key == "initial_step") so.initial_step = number(v, field);
  else if (key == "cg_tol") so.cg_tol = number(v, field);
  else if (key == "interior_cells") so.interior_cells = count(v, field);
  else if (key == "rule") {
    if (v == "armijo") so.rule = AscentRule::armijo;
    else if (v == "fixed_point") so.rule = AscentRule::fixed_point;
    else throw SpecError(field, "expected \"armijo\" or \"fixed_point\"");
  } else if (key == "poly_degree") spec.poly_degree = static_cast<int>(count(v, field));
  else if (key == "degrees") {
    if (!v.is_array() || v.empty()) throw SpecError(field, "expected a non-empty array of degrees");
    spec.degrees.clear();
    for (const auto& d : v) spec.degrees.push_back(static_cast<int>(count(d, field)));
  } else if (key == "max_exchange") po.max_exchange = count(v, field);
  else if (key == "violation_tol") po.violation_tol = number(v, field);
  else if (key == "barrier_gap") po.barrier_gap = number(v, field);
  else throw SpecError(field, "unknown solver option");
}

inline DataSource read_source(const json& j, const std::string& field, bool is_bound,
                              const std::filesystem::path& base) {
  if (!j.is_object()) throw SpecError(field, "expected an object");
  DataSource src;
  if (j.contains("samples")) {
    src.kind = DataSource::Kind::samples;
    src.samples = read_samples(j.at("samples"), field + ".samples", is_bound);
  } else if (j.contains("csv")) {
    if (!j.at("csv").is_string()) throw SpecError(field + ".csv", "expected a file path");
    src.kind = DataSource::Kind::samples;
    src.samples = read_sample_csv(base / j.at("csv").get<std::string>(), field + ".csv");
  } else if (!is_bound && j.contains("builtin")) {
    if (!j.at("builtin").is_string()) throw SpecError(field + ".builtin", "expected a name");
    src.kind = DataSource::Kind::builtin;
    src.builtin = j.at("builtin").get<std::string>();
    if (j.contains("params")) {
      if (!j.at("params").is_object()) throw SpecError(field + ".params", "expected an object");
      src.params = j.at("params");
    }
    if (std::find(builtin_names().begin(), builtin_names().end(), src.builtin) == builtin_names().end()) {
      (void)sample_builtin(src.builtin, src.params, Grid(8));
    }
    if (src.builtin == "pole") (void)pole_location(src.params);
  } else if (is_bound && j.contains("constant")) {
    src.kind = DataSource::Kind::constant;
    src.constant = number(j.at("constant"), field + ".constant");
    if (!(src.constant > 0.0)) throw SpecError(field + ".constant", "bound must be positive");
  } else {
    throw SpecError(field, is_bound ? "expected \"constant\", \"samples\" or \"csv\""
                                    : "expected \"builtin\", \"samples\" or \"csv\"");
  }
  return src;
}

}  // namespace detail

/// Parses a problem file. Relative CSV paths resolve against `base`.
inline ProblemSpec parse_spec(const json& j, const std::filesystem::path& base = ".") {
  if (!j.is_object()) throw SpecError("spec", "top level must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "grid_n" && key != "arcs_I" && key != "f" && key != "M" && key != "solver") {
      throw SpecError(key, "unknown field");
    }
  }
  ProblemSpec spec;
  if (j.contains("grid_n")) {
    spec.grid_n = detail::count(j.at("grid_n"), "grid_n");
    try {
      (void)Grid(spec.grid_n);
    } catch (const InvalidArgument& e) {
      throw SpecError("grid_n", e.what());
    }
  }
  spec.options.grid_n = spec.grid_n;

  if (!j.contains("arcs_I")) throw SpecError("arcs_I", "missing required field");
  const json& arcs = j.at("arcs_I");
  if (!arcs.is_array() || arcs.empty()) throw SpecError("arcs_I", "expected a non-empty array of [a, b] pairs");
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const std::string at = "arcs_I[" + std::to_string(i) + "]";
    if (!arcs[i].is_array() || arcs[i].size() != 2) throw SpecError(at, "expected [a, b]");
    double a = detail::number(arcs[i][0], at);
    double b = detail::number(arcs[i][1], at);
    if (b <= a) b += kTwoPi;
    spec.arcs_I.push_back({a, b});
  }
  try {
    (void)spec.arcs().snapped(spec.grid()).complement();
  } catch (const InvalidArgument& e) {
    throw SpecError("arcs_I", e.what());
  }

  if (!j.contains("f")) throw SpecError("f", "missing required field");
  spec.f = detail::read_source(j.at("f"), "f", false, base);
  if (j.contains("M")) {
    spec.M = detail::read_source(j.at("M"), "M", true, base);
  } else {
    spec.M.kind = DataSource::Kind::constant;
    spec.M.constant = 1.0;
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (!s.is_object()) throw SpecError("solver", "expected an object");
    for (const auto& [key, v] : s.items()) {
      if (key == "method") {
        if (v == "dual_ascent") spec.method = Method::dual_ascent;
        else if (v == "poly") spec.method = Method::poly;
        else if (v == "both") spec.method = Method::both;
        else throw SpecError("solver.method", "expected \"dual_ascent\", \"poly\" or \"both\"");
      } else if (key == "options") {
        if (!v.is_object()) throw SpecError("solver.options", "expected an object");
        for (const auto& [k2, v2] : v.items()) detail::apply_option(spec.options, spec.poly_options, spec, k2, v2);
      } else {
        detail::apply_option(spec.options, spec.poly_options, spec, key, v);
      }
    }
  }
  try {
    spec.options.validate();
  } catch (const InvalidArgument& e) {
    throw SpecError("solver", e.what());
  }
  try {
    spec.poly_options.validate();
  } catch (const InvalidArgument& e) {
    throw SpecError("solver", e.what());
  }
  return spec;
}

inline json read_json_file(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw SpecError(field, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(field, std::string("malformed JSON: ") + e.what());
  }
}

inline ProblemSpec load_spec(const std::filesystem::path& path) {
  return parse_spec(read_json_file(path, "spec"), path.parent_path().empty() ? "." : path.parent_path());
}

/// Grid values on the snapped set E from scattered samples, by linear interpolation
/// along each arc. Grid points off E are zero. Samples must lie on E (within half a
/// cell of the unsnapped set) and cover every arc up to one grid step.
inline GridFunction samples_on_set(std::vector<Sample> samples, const ArcSet& E, const Grid& grid,
                                   const std::string& field, std::vector<std::string>* warnings = nullptr) {
  const ArcSet Es = E.snapped(grid);
  const double h = grid.step();
  const auto& arcs = Es.arcs();
  const auto gas = Es.grid_arcs(grid);
  std::vector<std::vector<std::pair<double, cplx>>> per_arc(arcs.size());
  for (const auto& s : samples) {
    bool placed = false;
    for (std::size_t i = 0; i < arcs.size() && !placed; ++i) {
      double off = wrap_angle(s.theta - arcs[i].a);
      if (off > kTwoPi - 0.5 * h) off -= kTwoPi;
      if (off >= -0.5 * h && off <= arcs[i].length() + 0.5 * h) {
        per_arc[i].push_back({off, s.value});
        placed = true;
      }
    }
    if (!placed) {
      std::ostringstream os;
      os.precision(17);
      os << "sample angle " << s.theta << " lies outside the arc set " << Es.to_string();
      throw SpecError(field, os.str());
    }
  }
  CVector v(grid.size());
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    auto& pts = per_arc[i];
    if (pts.empty()) throw SpecError(field, "no samples on arc " + std::to_string(i));
    if (!std::is_sorted(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return x.first < y.first; })) {
      std::stable_sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      if (warnings) warnings->push_back(field + ": samples were not sorted by angle");
    }
    for (std::size_t m = 1; m < pts.size(); ++m) {
      if (pts[m].first == pts[m - 1].first) throw SpecError(field, "duplicate sample angle");
    }
    if (pts.front().first > h || pts.back().first < arcs[i].length() - h) {
      throw SpecError(field, "samples do not cover arc " + std::to_string(i) + " to within one grid step");
    }
    for (std::size_t c = 0; c <= gas[i].cells; ++c) {
      const double off = h * static_cast<double>(c);
      cplx val;
      if (off <= pts.front().first) {
        val = pts.front().second;
      } else if (off >= pts.back().first) {
        val = pts.back().second;
      } else {
        auto hi = std::lower_bound(pts.begin(), pts.end(), off, [](const auto& p, double x) { return p.first < x; });
        auto lo = hi - 1;
        const double t = (off - lo->first) / (hi->first - lo->first);
        val = (1.0 - t) * lo->second + t * hi->second;
      }
      v[(gas[i].first + c) % grid.size()] = val;
    }
  }
  return {grid, std::move(v)};
}

/// Complex number written as "a+bi", "a-bi", "a", "bi" (spaces ignored).
inline cplx parse_complex(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  auto fail = [&] { return InvalidArgument("cannot parse complex number '" + s + "'"); };
  if (s.empty()) throw fail();
  auto to_double = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != t.size() || !std::isfinite(v)) throw fail();
    return v;
  };
  if (s.back() != 'i' && s.back() != 'j') return to_double(s);
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) return {0.0, to_double(s)};
  return {to_double(s.substr(0, split)), to_double(s.substr(split))};
}

/// The solver problem described by a spec.
inline BepProblem build_problem(const ProblemSpec& spec) {
  const Grid grid = spec.grid();
  const ArcSet I = spec.arcs().snapped(grid);
  const ArcSet J = I.complement();
  std::vector<std::string> warnings;
  GridFunction f(grid);
  if (spec.f.kind == DataSource::Kind::builtin) {
    f = sample_builtin(spec.f.builtin, spec.f.params, grid);
  } else {
    f = samples_on_set(spec.f.samples, I, grid, "f", &warnings);
  }
  GridFunction M(grid);
  if (spec.M.kind == DataSource::Kind::constant) {
    M = GridFunction::constant(grid, spec.M.constant);
  } else {
    M = samples_on_set(spec.M.samples, J, grid, "M", &warnings);
    if (!M.is_real(0.0)) throw SpecError("M", "bound samples must be real");
    for (std::size_t k = 0; k < M.size(); ++k) {
      if (M[k].real() < 0.0) throw SpecError("M", "bound samples must be non-negative");
    }
  }
  BepProblem p = BepProblem::create(I, std::move(f), std::move(M), spec.options);
  p.warnings.insert(p.warnings.begin(), warnings.begin(), warnings.end());
  return p;
}

}  // namespace bep::io
