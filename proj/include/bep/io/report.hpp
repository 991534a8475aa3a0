#pragma once

#include <cfenv>
#include <cfloat>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bep/bep_solver.hpp"
#include "bep/carleman.hpp"
#include "bep/fourier.hpp"
#include "bep/io/spec.hpp"
#include "bep/parallel.hpp"
#include "bep/poly_solver.hpp"

namespace bep::io {

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json options_json(const ProblemSpec& spec) {
  const SolverOptions& o = spec.options;
  const PolyOptions& p = spec.poly_options;
  return {{"max_iters", o.max_iters},
          {"tol_gap", o.tol_gap},
          {"tol_saturation", o.tol_saturation},
          {"armijo_c", o.armijo_c},
          {"backtrack_factor", o.backtrack_factor},
          {"lambda_floor", o.lambda_floor},
          {"initial_step", o.initial_step},
          {"cg_tol", o.cg_tol},
          {"interior_cells", o.interior_cells},
          {"rule", o.rule == AscentRule::armijo ? "armijo" : "fixed_point"},
          {"poly_degree", spec.poly_degree},
          {"degrees", spec.degrees},
          {"max_exchange", p.max_exchange},
          {"violation_tol", p.violation_tol},
          {"barrier_gap", p.barrier_gap}};
}

inline json fp_environment() {
  std::string rounding = "unknown";
  switch (std::fegetround()) {
    case FE_TONEAREST: rounding = "to_nearest"; break;
    case FE_UPWARD: rounding = "upward"; break;
    case FE_DOWNWARD: rounding = "downward"; break;
    case FE_TOWARDZERO: rounding = "toward_zero"; break;
  }
  return {{"rounding", rounding},
          {"flt_eval_method", FLT_EVAL_METHOD},
          {"dbl_mant_dig", DBL_MANT_DIG},
          {"compiler", __VERSION__}};
}

inline json provenance(const ProblemSpec& spec, const std::string& solver) {
  json arcs = json::array();
  const ArcSet snapped = spec.arcs().snapped(spec.grid());
  for (const auto& a : snapped.arcs()) arcs.push_back({a.a, a.b});
  return {{"grid_n", spec.grid_n},
          {"solver", solver},
          {"options", options_json(spec)},
          {"snapped_arcs", arcs},
          {"threads", thread_count()},
          {"fp_env", fp_environment()}};
}

inline json boundary_samples(const GridFunction& g) {
  json rows = json::array();
  for (std::size_t k = 0; k < g.size(); ++k) rows.push_back({g.grid().theta(k), g[k].real(), g[k].imag()});
  return rows;
}

inline json poly_json(const PolySolution& s) {
  json coeffs = json::array();
  for (Eigen::Index k = 0; k < s.coeffs.size(); ++k) coeffs.push_back(to_json(s.coeffs(k)));
  json active = json::array();
  for (std::size_t i = 0; i < s.active_points.size(); ++i) active.push_back({s.active_points[i], s.multipliers[i]});
  return {{"degree", s.coeffs.size() - 1},
          {"coeffs", coeffs},
          {"active_points", active},
          {"primal", s.primal},
          {"stationarity_residual", s.stationarity_residual},
          {"multiplier_sum", s.multiplier_sum},
          {"max_modulus", s.max_modulus},
          {"certificate_valid", s.certificate_valid},
          {"exchange_iterations", s.exchange_iterations}};
}

struct RunOutput {
  json report;
  bool converged = false;
};

namespace detail {

/// Polynomial solution of degree n for a problem with arbitrary bound M: solved for
/// f / w_M with |p| <= 1, then multiplied back by the boundary values of w_M. Since
/// |w_M| = 1 on I the primal value is unchanged.
struct PolyRun {
  PolySolution solution;
  GridFunction trace{Grid(8)};
};

inline PolyRun run_poly(const BepProblem& p, int degree, const PolyOptions& opt) {
  const NormalizedProblem np = normalize_problem(p);
  PolyRun out;
  out.solution = solve_fbep(PolyProblem::create(np.problem.I, np.problem.f, degree), opt);
  const Eigen::VectorXcd& c = out.solution.coeffs;
  out.trace = GridFunction::sample(p.grid(), [&c](double t) { return poly_eval(c, t); });
  if (!p.unit_bound()) out.trace = out.trace * np.w_trace;
  return out;
}

inline json bep_scalars(const BepProblem& p, const BepSolution& s) {
  return {{"primal", s.primal},
          {"dual", s.dual},
          {"gap", s.gap},
          {"saturation_residual", s.saturation_residual},
          {"critical_residual", s.critical_residual},
          {"iterations", s.iterations},
          {"cg_iterations", s.cg_iterations},
          {"converged", s.converged},
          {"extendable", s.extendable},
          {"f_norm2", p.f_norm2()}};
}

inline json lambda_samples(const BepProblem& p, const BepSolution& s) {
  json rows = json::array();
  for (std::size_t k = 0; k < p.grid().size(); ++k) {
    if (p.wJ[k] > 0.0) rows.push_back({p.grid().theta(k), s.lambda[k].real()});
  }
  return rows;
}

}  // namespace detail

/// Solves the problem with the configured method and builds the report. Solver
/// non-convergence is reported, not thrown; input errors throw.
inline RunOutput run_solve(const ProblemSpec& spec) {
  const BepProblem p = build_problem(spec);
  RunOutput out;
  json& r = out.report;
  r["provenance"] = provenance(spec, to_string(spec.method));
  r["warnings"] = p.warnings;

  if (spec.method == Method::poly) {
    try {
      auto pr = detail::run_poly(p, spec.poly_degree, spec.poly_options);
      const PolySolution& s = pr.solution;
      r["g0"] = boundary_samples(pr.trace);
      r["lambda"] = json::array();
      r["poly"] = poly_json(s);
      r["scalars"] = {{"primal", s.primal},
                      {"dual", nullptr},
                      {"gap", nullptr},
                      {"saturation_residual", nullptr},
                      {"critical_residual", s.stationarity_residual},
                      {"iterations", s.exchange_iterations},
                      {"converged", s.certificate_valid},
                      {"f_norm2", p.f_norm2()}};
      r["status"] = s.certificate_valid ? "converged" : "certificate invalid";
      out.converged = s.certificate_valid;
    } catch (const ConvergenceError& e) {
      r["g0"] = json::array();
      r["lambda"] = json::array();
      r["scalars"] = {{"converged", false}};
      r["status"] = std::string("poly: ") + e.what();
      out.converged = false;
    }
    return out;
  }

  const BepSolution s = solve_bep(p);
  r["g0"] = boundary_samples(s.g0_trace);
  r["lambda"] = detail::lambda_samples(p, s);
  r["scalars"] = detail::bep_scalars(p, s);
  r["status"] = s.status;
  out.converged = s.converged;

  if (spec.method == Method::both) {
    try {
      auto pr = detail::run_poly(p, spec.poly_degree, spec.poly_options);
      r["poly"] = poly_json(pr.solution);
      const GridFunction diff = pr.trace - s.g0_trace;
      r["cross_validation"] = {{"poly_degree", spec.poly_degree},
                               {"l2_diff_circle", norm_l2(diff)},
                               {"l2_diff_J", norm_l2(diff, p.wJ)},
                               {"primal_diff", pr.solution.primal - s.primal}};
      out.converged = out.converged && pr.solution.certificate_valid;
    } catch (const ConvergenceError& e) {
      r["cross_validation"] = {{"poly_degree", spec.poly_degree}, {"error", e.what()}};
      out.converged = false;
    }
  }
  return out;
}

/// Dual-ascent solution plus polynomial solutions at every degree, with distances to
/// the dual-ascent solution.
inline RunOutput run_poly_study(const ProblemSpec& spec, const std::vector<int>& degrees) {
  if (degrees.empty()) throw SpecError("degrees", "need at least one degree");
  const BepProblem p = build_problem(spec);
  RunOutput out;
  json& r = out.report;
  r["provenance"] = provenance(spec, "poly_study");
  r["provenance"]["degrees"] = degrees;
  r["warnings"] = p.warnings;
  const BepSolution s = solve_bep(p);
  r["g0"] = boundary_samples(s.g0_trace);
  r["lambda"] = detail::lambda_samples(p, s);
  r["scalars"] = detail::bep_scalars(p, s);
  r["status"] = s.status;
  out.converged = s.converged;

  auto rows = parallel_map(degrees.size(), [&](std::size_t i) -> json {
    try {
      auto pr = detail::run_poly(p, degrees[i], spec.poly_options);
      const GridFunction diff = pr.trace - s.g0_trace;
      return {{"degree", degrees[i]},
              {"l2_circle", norm_l2(diff)},
              {"l2_J", norm_l2(diff, p.wJ)},
              {"primal", pr.solution.primal},
              {"stationarity_residual", pr.solution.stationarity_residual},
              {"certificate_valid", pr.solution.certificate_valid}};
    } catch (const ConvergenceError& e) {
      return {{"degree", degrees[i]}, {"error", e.what()}, {"certificate_valid", false}};
    }
  });
  r["convergence"] = rows;
  for (const auto& row : rows) out.converged = out.converged && row.at("certificate_valid").get<bool>();
  return out;
}

/// Carleman recovery sequence f_n(z) from the data on I.
inline json run_recover(const ProblemSpec& spec, cplx z, int n_max, double strength, RecoveryQuadrature quad) {
  const Grid grid = spec.grid();
  const BepProblem p = build_problem(spec);
  const QuenchingFunction phi(p.I, strength);
  const CVector seq = recover_sequence(p.f, phi, z, n_max, quad);
  json values = json::array();
  for (std::size_t i = 0; i < seq.size(); ++i) values.push_back({i + 1, seq[i].real(), seq[i].imag()});
  json ref = nullptr;
  if (spec.f.kind == DataSource::Kind::builtin) {
    if (auto v = builtin_extension(spec.f.builtin, spec.f.params, z)) ref = to_json(*v);
  }
  json r;
  r["provenance"] = provenance(spec, "recover");
  r["recovery"] = {{"z", to_json(z)},
                   {"n_max", n_max},
                   {"strength", strength},
                   {"quadrature", quad == RecoveryQuadrature::graded ? "graded" : "grid"},
                   {"phi_at_z", to_json(phi(z))},
                   {"reference", ref},
                   {"values", values}};
  return r;
}

inline const std::vector<std::string>& export_kinds() {
  static const std::vector<std::string> kinds{"boundary_modulus", "convergence", "lambda", "recovery"};
  return kinds;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Plot data from a report as CSV with a header row, ordered by the first column.
inline std::string export_csv(const json& report, const std::string& kind) {
  auto need = [&](const char* key) -> const json& {
    if (!report.contains(key) || !report.at(key).is_array()) {
      throw InvalidArgument(std::string("report has no '") + key + "' block for kind " + kind);
    }
    return report.at(key);
  };
  std::vector<std::pair<double, double>> rows;
  std::string header;
  if (kind == "boundary_modulus") {
    header = "theta,value";
    for (const auto& s : need("g0")) rows.push_back({s[0].get<double>(), std::hypot(s[1].get<double>(), s[2].get<double>())});
  } else if (kind == "lambda") {
    header = "theta,value";
    for (const auto& s : need("lambda")) rows.push_back({s[0].get<double>(), s[1].get<double>()});
  } else if (kind == "convergence") {
    header = "n,error";
    for (const auto& s : need("convergence")) {
      double e = s.contains("l2_circle") ? s.at("l2_circle").get<double>() : std::numeric_limits<double>::quiet_NaN();
      rows.push_back({s.at("degree").get<double>(), e});
    }
  } else if (kind == "recovery") {
    header = "n,error";
    if (!report.contains("recovery")) throw InvalidArgument("report has no 'recovery' block for kind recovery");
    const json& rec = report.at("recovery");
    const json& vals = rec.at("values");
    if (vals.empty()) throw InvalidArgument("recovery block has no values");
    // Error against the analytic value when known, else against the last term.
    cplx ref;
    if (!rec.at("reference").is_null()) {
      ref = {rec.at("reference")[0].get<double>(), rec.at("reference")[1].get<double>()};
    } else {
      ref = {vals.back()[1].get<double>(), vals.back()[2].get<double>()};
    }
    for (const auto& v : vals) {
      rows.push_back({v[0].get<double>(), std::abs(cplx(v[1].get<double>(), v[2].get<double>()) - ref)});
    }
  } else {
    std::string valid;
    for (const auto& k : export_kinds()) valid += (valid.empty() ? "" : ", ") + k;
    throw InvalidArgument("unknown kind '" + kind + "' (valid: " + valid + ")");
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out = header + "\n";
  const bool integral = header[0] == 'n';
  for (const auto& [x, y] : rows) {
    out += (integral ? std::to_string(static_cast<long long>(x)) : format_double(x)) + "," + format_double(y) + "\n";
  }
  return out;
}

}  // namespace bep::io
