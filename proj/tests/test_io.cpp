#include <gtest/gtest.h>

#include <sstream>

#include "bep/io/halfplane.hpp"
#include "bep/io/report.hpp"
#include "bep/io/spec.hpp"
#include "support.hpp"

namespace bep::io {
namespace {

json base_spec() {
  return json::parse(R"({"grid_n": 1024, "arcs_I": [[0.0, 3.141592653589793]],
                         "f": {"builtin": "half_z"}, "M": {"constant": 1.0}})");
}

std::string error_field(const json& j) {
  try {
    parse_spec(j);
  } catch (const SpecError& e) {
    return e.field();
  }
  return "";
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(ParseSpec, Defaults) {
  json j = base_spec();
  j.erase("M");
  ProblemSpec s = parse_spec(j);
  EXPECT_EQ(s.grid_n, 1024u);
  EXPECT_EQ(s.options.grid_n, 1024u);
  EXPECT_EQ(s.method, Method::dual_ascent);
  EXPECT_EQ(s.M.kind, DataSource::Kind::constant);
  EXPECT_EQ(s.M.constant, 1.0);
  EXPECT_EQ(s.degrees, (std::vector<int>{4, 8, 16, 32}));
}

TEST(ParseSpec, ErrorsNameTheField) {
  json j = base_spec();
  j.erase("arcs_I");
  EXPECT_EQ(error_field(j), "arcs_I");
  j = base_spec();
  j["colour"] = 1;
  EXPECT_EQ(error_field(j), "colour");
  j = base_spec();
  j["solver"] = {{"method", "newton"}};
  EXPECT_EQ(error_field(j), "solver.method");
  j = base_spec();
  j["solver"] = {{"max_iterz", 10}};
  EXPECT_NE(error_field(j), "");
  j = base_spec();
  j["grid_n"] = 1000;
  EXPECT_EQ(error_field(j), "grid_n");
  j = base_spec();
  j["arcs_I"] = {{0.0, 7.0}};
  EXPECT_EQ(error_field(j), "arcs_I");
  j = base_spec();
  j["M"] = {{"constant", -1.0}};
  EXPECT_EQ(error_field(j), "M.constant");
  j = base_spec();
  j["f"] = {{"builtin", "sinc"}};
  EXPECT_EQ(error_field(j), "f.builtin");
}

TEST(ParseSpec, SolverOptionsInlineOrNested) {
  json j = base_spec();
  j["solver"] = {{"method", "both"}, {"max_iters", 77}, {"options", {{"tol_gap", 1e-9}, {"rule", "fixed_point"}}}};
  ProblemSpec s = parse_spec(j);
  EXPECT_EQ(s.method, Method::both);
  EXPECT_EQ(s.options.max_iters, 77u);
  EXPECT_EQ(s.options.tol_gap, 1e-9);
  EXPECT_EQ(s.options.rule, AscentRule::fixed_point);
}

TEST(ParseSpec, WrappedArcEnd) {
  json j = base_spec();
  j["arcs_I"] = {{5.0, 1.0}};
  ProblemSpec s = parse_spec(j);
  EXPECT_NEAR(s.arcs_I[0].b, 1.0 + kTwoPi, 1e-15);
}

TEST(Builtins, ValuesAndExtensions) {
  Grid g(64);
  EXPECT_EQ(sample_builtin("const2", {}, g)[5], cplx(2.0));
  EXPECT_LT(std::abs(sample_builtin("half_z", {}, g)[16] - cplx(0.0, 0.5)), 1e-15);
  EXPECT_LT(std::abs(sample_builtin("conj_z", {}, g)[16] - cplx(0.0, -1.0)), 1e-15);
  EXPECT_LT(std::abs(sample_builtin("pole", {}, g)[0] + 1.0), 1e-15);
  EXPECT_LT(std::abs(*builtin_extension("pole", {{"a", {0.0, 3.0}}}, 0.0) - 1.0 / cplx(0.0, -3.0)), 1e-15);
  EXPECT_FALSE(builtin_extension("conj_z", {}, 0.0).has_value());
  EXPECT_FALSE(builtin_extension("pole", {{"a", 0.5}}, 0.0).has_value());
  EXPECT_THROW(pole_location({{"a", 1.0}}), SpecError);
}

TEST(SamplesOnSet, InterpolatesAndValidates) {
  Grid g(64);
  ArcSet I({{0.0, kPi}});
  std::vector<Sample> s;
  for (int k = 0; k <= 16; ++k) s.push_back({kPi * k / 16.0, cplx(k, -k)});
  GridFunction f = samples_on_set(s, I, g, "f");
  EXPECT_LT(std::abs(f[2] - cplx(1.0, -1.0)), 1e-12);
  EXPECT_LT(std::abs(f[3] - cplx(1.5, -1.5)), 1e-12);
  EXPECT_EQ(f[40], cplx{});

  std::vector<std::string> warnings;
  std::vector<Sample> rev(s.rbegin(), s.rend());
  GridFunction fr = samples_on_set(rev, I, g, "f", &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_EQ(fr[k], f[k]);

  auto dup = s;
  dup.push_back(s[3]);
  EXPECT_THROW(samples_on_set(dup, I, g, "f"), SpecError);
  auto outside = s;
  outside.push_back({4.0, 1.0});
  EXPECT_THROW(samples_on_set(outside, I, g, "f"), SpecError);
  std::vector<Sample> partial(s.begin(), s.begin() + 8);
  EXPECT_THROW(samples_on_set(partial, I, g, "f"), SpecError);
}

TEST(ParseComplex, Forms) {
  EXPECT_EQ(parse_complex("0.1+0.2i"), cplx(0.1, 0.2));
  EXPECT_EQ(parse_complex("-0.5-1e-3i"), cplx(-0.5, -1e-3));
  EXPECT_EQ(parse_complex("0.3"), cplx(0.3, 0.0));
  EXPECT_EQ(parse_complex("0.4i"), cplx(0.0, 0.4));
  EXPECT_EQ(parse_complex(" 1 - i "), cplx(1.0, -1.0));
  EXPECT_EQ(parse_complex("2e-1+1e+0i"), cplx(0.2, 1.0));
  EXPECT_THROW(parse_complex("abc"), InvalidArgument);
  EXPECT_THROW(parse_complex(""), InvalidArgument);
}

TEST(HalfPlane, MapsAndRoundTrip) {
  EXPECT_LT(std::abs(halfplane_to_disk(cplx(0.0, 0.0)) + 1.0), 1e-15);
  EXPECT_LT(std::abs(halfplane_to_disk(cplx(1e12, 0.0)) - 1.0), 1e-11);
  EXPECT_NEAR(omega_to_angle(0.0), kPi, 1e-15);
  for (double w : {-50.0, -1.0, 0.0, 0.3, 7.0}) {
    EXPECT_NEAR(angle_to_omega(omega_to_angle(w)), w, 1e-10 * std::max(1.0, std::abs(w)));
    EXPECT_LT(std::abs(halfplane_to_disk(cplx(0.0, w)) - std::polar(1.0, omega_to_angle(w))), 1e-12);
  }
  for (cplx z : {cplx(0.2, 0.3), cplx(-0.7, 0.1)}) EXPECT_LT(std::abs(halfplane_to_disk(disk_to_halfplane(z)) - z), 1e-10);
}

std::vector<FrequencySample> transfer_samples(std::size_t count) {
  std::vector<FrequencySample> out;
  for (std::size_t k = 0; k < count; ++k) {
    double w = -5.0 + 10.0 * static_cast<double>(k) / static_cast<double>(count - 1);
    out.push_back({w, 1.0 / (cplx(0.0, w) + 2.0)});
  }
  return out;
}

TEST(HalfPlane, IngestsTransferFunction) {
  Grid g(4096);
  IngestResult r = ingest_halfplane(transfer_samples(201), -4.0, 4.0, g);
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_EQ(r.I.arcs().size(), 1u);
  EXPECT_NEAR(r.I.arcs()[0].a, omega_to_angle(4.0), g.step());
  EXPECT_NEAR(r.I.arcs()[0].b, omega_to_angle(-4.0), g.step());
  // Disk data (1 + i w) G(i w) with G = 1/(s + 2) is F(z) = (1 + w)/(w + 2) at w = (1+z)/(1-z).
  const RVector wI = r.I.weights(g);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (wI[k] == 0.0) continue;
    cplx w = disk_to_halfplane(g.point(k) * (1.0 - 1e-15));
    worst = std::max(worst, std::abs(r.f[k] - (1.0 + w) / (w + 2.0)));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(HalfPlane, UnsortedInputWarnsAndMatches) {
  Grid g(1024);
  auto s = transfer_samples(101);
  IngestResult a = ingest_halfplane(s, -4.0, 4.0, g);
  std::reverse(s.begin(), s.end());
  IngestResult b = ingest_halfplane(s, -4.0, 4.0, g);
  ASSERT_EQ(b.warnings.size(), 1u);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(a.f[k], b.f[k]);
}

TEST(HalfPlane, RejectsBadInput) {
  Grid g(1024);
  EXPECT_THROW(ingest_halfplane(transfer_samples(7), -1.0, 1.0, g), InvalidArgument);
  EXPECT_THROW(ingest_halfplane(transfer_samples(20), -6.0, 1.0, g), InvalidArgument);
  EXPECT_THROW(ingest_halfplane(transfer_samples(20), 1.0, -1.0, g), InvalidArgument);
  auto s = transfer_samples(20);
  s[4].omega = s[3].omega;
  EXPECT_THROW(ingest_halfplane(s, -1.0, 1.0, g), InvalidArgument);
  s = transfer_samples(20);
  s[2].value = cplx(std::nan(""), 0.0);
  EXPECT_THROW(ingest_halfplane(s, -1.0, 1.0, g), InvalidArgument);
}

TEST(HalfPlane, CsvReader) {
  std::istringstream in("omega,re,im\n-1,0.5,0.1\n0,1,0\n\n1,0.5,-0.1\n");
  auto rows = read_frequency_csv(in, "data.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].value, cplx(0.5, -0.1));
  std::istringstream bad("0,1\n");
  EXPECT_THROW(read_frequency_csv(bad, "bad.csv"), InvalidArgument);
}

TEST(HalfPlane, SpecFromIngestParses) {
  Grid g(1024);
  json spec = ingest_to_spec(ingest_halfplane(transfer_samples(101), -4.0, 4.0, g), 0.5);
  ProblemSpec s = parse_spec(spec);
  BepProblem p = build_problem(s);
  EXPECT_EQ(p.M[0].real(), 0.5);
  EXPECT_GT(p.f_norm2(), 0.0);
}

TEST(Report, SolveReportAndExports) {
  json j = base_spec();
  RunOutput run = run_solve(parse_spec(j));
  EXPECT_TRUE(run.converged);
  const json& r = run.report;
  for (const char* key : {"provenance", "g0", "lambda", "scalars", "status", "warnings"}) EXPECT_TRUE(r.contains(key)) << key;
  EXPECT_EQ(r.at("provenance").at("grid_n"), 1024);
  EXPECT_TRUE(r.at("provenance").contains("fp_env"));
  EXPECT_EQ(line_count(export_csv(r, "boundary_modulus")), 1025u);
  EXPECT_EQ(line_count(export_csv(r, "lambda")), 514u);
  EXPECT_EQ(export_csv(r, "lambda").substr(0, 12), "theta,value\n");
  EXPECT_THROW(export_csv(r, "convergence"), InvalidArgument);
  try {
    export_csv(r, "phase");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("boundary_modulus"), std::string::npos);
  }
}

TEST(Report, PolyMethodHasNullDualScalars) {
  json j = base_spec();
  j["f"] = {{"builtin", "const2"}};
  j["solver"] = {{"method", "poly"}, {"poly_degree", 4}};
  RunOutput run = run_solve(parse_spec(j));
  EXPECT_TRUE(run.converged);
  EXPECT_TRUE(run.report.at("scalars").at("gap").is_null());
  EXPECT_TRUE(run.report.at("lambda").empty());
  EXPECT_NEAR(run.report.at("scalars").at("primal").get<double>(), 0.269236485536, 1e-6);
}

TEST(Report, RecoveryExport) {
  json j = base_spec();
  j["f"] = {{"builtin", "pole"}};
  json r = run_recover(parse_spec(j), 0.0, 30, 1.0, RecoveryQuadrature::graded);
  EXPECT_EQ(r.at("recovery").at("values").size(), 30u);
  std::string csv = export_csv(r, "recovery");
  EXPECT_EQ(line_count(csv), 31u);
  EXPECT_EQ(csv.substr(0, 8), "n,error\n");
}

}  // namespace
}  // namespace bep::io
