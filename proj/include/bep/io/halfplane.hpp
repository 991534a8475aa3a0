#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bep/arcs.hpp"
#include "bep/core.hpp"
#include "bep/grid.hpp"
#include "bep/io/spec.hpp"

namespace bep::io {

/// Moebius map w -> (w - 1)/(w + 1) from the right half-plane onto the disk.
inline cplx halfplane_to_disk(cplx w) {
  if (std::abs(w + 1.0) == 0.0) throw InvalidArgument("halfplane_to_disk: w = -1 has no image");
  return (w - 1.0) / (w + 1.0);
}

inline cplx disk_to_halfplane(cplx z) {
  if (std::abs(1.0 - z) == 0.0) throw InvalidArgument("disk_to_halfplane: z = 1 is the image of infinity");
  return (1.0 + z) / (1.0 - z);
}

/// Angle of the image of the boundary point i omega: pi - 2 atan(omega), in (0, 2pi).
inline double omega_to_angle(double omega) { return kPi - 2.0 * std::atan(omega); }

inline double angle_to_omega(double theta) { return std::tan(0.5 * (kPi - theta)); }

struct FrequencySample {
  double omega = 0.0;
  cplx value;
};

/// Rows "omega,re,im"; a non-numeric first line is a header.
inline std::vector<FrequencySample> read_frequency_csv(std::istream& in, const std::string& name) {
  std::vector<FrequencySample> out;
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
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric && lineno == 1) continue;
    if (!numeric || vals.size() != 3) {
      throw InvalidArgument(name + " line " + std::to_string(lineno) + ": expected omega,re,im");
    }
    out.push_back({vals[0], {vals[1], vals[2]}});
  }
  return out;
}

struct IngestResult {
  ArcSet I;  // snapped image of the band
  GridFunction f{Grid(8)};
  std::vector<std::string> warnings;
};

/// Disk data on the image of the band [w1, w2] from half-plane samples G(i omega).
/// Each sample maps to theta = pi - 2 atan(omega) with value (1 + i omega) G(i omega),
/// the inverse of the H2 isometry g -> g((w-1)/(w+1)) / (1 + w); values are then
/// interpolated linearly in theta onto the grid points of the snapped arc.
inline IngestResult ingest_halfplane(std::vector<FrequencySample> samples, double w1, double w2, const Grid& grid) {
  if (samples.size() < 8) {
    throw InvalidArgument("ingest_halfplane: need at least 8 samples, got " + std::to_string(samples.size()));
  }
  if (!std::isfinite(w1) || !std::isfinite(w2) || !(w1 < w2)) {
    throw InvalidArgument("ingest_halfplane: band must satisfy w1 < w2, both finite");
  }
  IngestResult out;
  for (const auto& s : samples) {
    if (!std::isfinite(s.omega) || !std::isfinite(s.value.real()) || !std::isfinite(s.value.imag())) {
      throw InvalidArgument("ingest_halfplane: samples must be finite");
    }
  }
  auto by_omega = [](const FrequencySample& a, const FrequencySample& b) { return a.omega < b.omega; };
  if (!std::is_sorted(samples.begin(), samples.end(), by_omega)) {
    std::stable_sort(samples.begin(), samples.end(), by_omega);
    out.warnings.push_back("frequency samples were not monotone in omega; sorted");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].omega == samples[i - 1].omega) throw InvalidArgument("ingest_halfplane: omegas must be distinct");
  }
  if (w1 < samples.front().omega || w2 > samples.back().omega) {
    throw InvalidArgument("ingest_halfplane: band lies outside the sampled frequencies");
  }

  // Angles decrease with omega; store in increasing angle order.
  std::vector<Sample> disk;
  disk.reserve(samples.size());
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    disk.push_back({omega_to_angle(it->omega), cplx(1.0, it->omega) * it->value});
  }
  out.I = ArcSet({{omega_to_angle(w2), omega_to_angle(w1)}}).snapped(grid);
  const RVector w = out.I.weights(grid);
  CVector v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (w[k] == 0.0) continue;
    const double t = grid.theta(k);
    auto hi = std::lower_bound(disk.begin(), disk.end(), t, [](const Sample& s, double x) { return s.theta < x; });
    if (hi == disk.begin()) {
      v[k] = disk.front().value;
    } else if (hi == disk.end()) {
      v[k] = disk.back().value;
    } else {
      auto lo = hi - 1;
      const double u = (t - lo->theta) / (hi->theta - lo->theta);
      v[k] = (1.0 - u) * lo->value + u * hi->value;
    }
  }
  out.f = GridFunction(grid, std::move(v));
  return out;
}

/// Problem file for the ingested data with a constant bound on J.
inline json ingest_to_spec(const IngestResult& r, double bound) {
  json spec;
  const Grid& grid = r.f.grid();
  spec["grid_n"] = grid.size();
  json arcs = json::array();
  for (const auto& a : r.I.arcs()) arcs.push_back({a.a, a.b});
  spec["arcs_I"] = arcs;
  const RVector w = r.I.weights(grid);
  json rows = json::array();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (w[k] > 0.0) rows.push_back({grid.theta(k), r.f[k].real(), r.f[k].imag()});
  }
  spec["f"] = {{"samples", rows}};
  spec["M"] = {{"constant", bound}};
  spec["solver"] = {{"method", "dual_ascent"}};
  return spec;
}

}  // namespace bep::io
