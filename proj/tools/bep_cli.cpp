// Command-line front end: solve, poly, recover, export, ingest-hp.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bep/bep.hpp"
#include "bep/io/halfplane.hpp"
#include "bep/io/report.hpp"
#include "bep/io/spec.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bep::InvalidArgument("output: cannot write " + path);
  out << text;
}

std::string render(const bep::io::json& j) { return j.dump(1) + "\n"; }

void print_warnings(const bep::io::json& report) {
  if (!report.contains("warnings")) return;
  for (const auto& w : report.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
}

template <typename T>
std::vector<T> split_list(const std::string& text, const std::string& field) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::istringstream is(cell);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw bep::io::SpecError(field, "cannot parse '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw bep::io::SpecError(field, "empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded extremal problems in the Hardy space of the disk"};
  app.require_subcommand(1);

  std::string spec_path, out_path, report_path, kind, degrees_text, z_text = "0+0i", quad = "graded";
  std::string csv_path, band_text;
  int nmax = 200;
  double strength = 1.0, bound = 1.0;
  std::size_t grid_n = 4096;

  auto* solve = app.add_subcommand("solve", "Solve a problem file and write the report");
  solve->add_option("spec", spec_path, "problem file (JSON)")->required();
  solve->add_option("-o,--output", out_path, "report path (default: stdout)");

  auto* poly = app.add_subcommand("poly", "Polynomial solutions at several degrees against the dual-ascent solution");
  poly->add_option("spec", spec_path, "problem file (JSON)")->required();
  poly->add_option("--degrees", degrees_text, "comma-separated degrees")->default_str("4,8,16,32");
  poly->add_option("-o,--output", out_path, "report path (default: stdout)");

  auto* recover = app.add_subcommand("recover", "Carleman recovery sequence at an interior point");
  recover->add_option("spec", spec_path, "problem file (JSON)")->required();
  recover->add_option("--z", z_text, "interior point, e.g. 0.1+0.2i")->capture_default_str();
  recover->add_option("--nmax", nmax, "number of terms")->capture_default_str();
  recover->add_option("--strength", strength, "quenching strength s")->capture_default_str();
  recover->add_option("--quadrature", quad, "graded or grid")->capture_default_str();
  recover->add_option("-o,--output", out_path, "report path (default: stdout)");

  auto* exp = app.add_subcommand("export", "Plot data from a report as CSV");
  exp->add_option("report", report_path, "report file (JSON)")->required();
  exp->add_option("--kind", kind, "boundary_modulus, lambda, convergence or recovery")->required();
  exp->add_option("-o,--output", out_path, "CSV path (default: stdout)");

  auto* ingest = app.add_subcommand("ingest-hp", "Problem file from half-plane frequency samples");
  ingest->add_option("data", csv_path, "CSV rows omega,re,im")->required();
  ingest->add_option("--band", band_text, "sampled band w1,w2")->required();
  ingest->add_option("--grid-n", grid_n, "grid size")->capture_default_str();
  ingest->add_option("--bound", bound, "constant bound M on the complement")->capture_default_str();
  ingest->add_option("-o,--output", out_path, "problem file path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) {
      auto run = bep::io::run_solve(bep::io::load_spec(spec_path));
      print_warnings(run.report);
      write_text(out_path, render(run.report));
      return run.converged ? kOk : kNotConverged;
    }
    if (*poly) {
      const auto spec = bep::io::load_spec(spec_path);
      std::vector<int> degrees = degrees_text.empty() ? spec.degrees : split_list<int>(degrees_text, "degrees");
      for (int d : degrees) {
        if (d < 0) throw bep::io::SpecError("degrees", "degrees must be non-negative");
      }
      auto run = bep::io::run_poly_study(spec, degrees);
      print_warnings(run.report);
      write_text(out_path, render(run.report));
      return run.converged ? kOk : kNotConverged;
    }
    if (*recover) {
      bep::RecoveryQuadrature q;
      if (quad == "graded") q = bep::RecoveryQuadrature::graded;
      else if (quad == "grid") q = bep::RecoveryQuadrature::grid;
      else throw bep::io::SpecError("quadrature", "expected graded or grid");
      bep::cplx z;
      try {
        z = bep::io::parse_complex(z_text);
      } catch (const bep::InvalidArgument& e) {
        throw bep::io::SpecError("z", e.what());
      }
      write_text(out_path, render(bep::io::run_recover(bep::io::load_spec(spec_path), z, nmax, strength, q)));
      return kOk;
    }
    if (*exp) {
      write_text(out_path, bep::io::export_csv(bep::io::read_json_file(report_path, "report"), kind));
      return kOk;
    }
    if (*ingest) {
      auto band = split_list<double>(band_text, "band");
      if (band.size() != 2) throw bep::io::SpecError("band", "expected w1,w2");
      std::ifstream in(csv_path);
      if (!in) throw bep::io::SpecError("data", "cannot open " + csv_path);
      auto samples = bep::io::read_frequency_csv(in, csv_path);
      auto result = bep::io::ingest_halfplane(std::move(samples), band[0], band[1], bep::Grid(grid_n));
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      write_text(out_path, render(bep::io::ingest_to_spec(result, bound)));
      return kOk;
    }
  } catch (const bep::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const bep::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
