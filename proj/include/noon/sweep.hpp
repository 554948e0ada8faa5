#pragma once

// (G1, T1) fidelity landscapes of the k=0 swap |e,a,0,0> -> |g,a,1,0>
// under STA, APP and RO driving.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "noon/dynamics.hpp"
#include "noon/error.hpp"
#include "noon/protocol.hpp"

namespace noon {

struct SweepGrid {
  double G1_min = two_pi * 0.060;
  double G1_max = two_pi * 0.160;
  double T1_min = 0.5;
  double T1_max = 4.0;
  int G1_count = 26;
  int T1_count = 26;
  SwapParams swap{};  // beta, t0, halfwidth; G1/T1 overwritten per point
  bool run_sta = true;
  bool run_app = true;
  bool run_ro = true;

  void validate() const {
    if (!(G1_max >= G1_min) || !(T1_max >= T1_min) || !(G1_min > 0.0) || !(T1_min > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "sweep ranges must be positive and ordered");
    }
    if (G1_count < 2 || T1_count < 2) throw Error(ErrorCode::invalid_argument, "sweep grid counts must be >= 2");
  }
  double G1_at(int i) const { return G1_min + (G1_max - G1_min) * i / (G1_count - 1); }
  double T1_at(int j) const { return T1_min + (T1_max - T1_min) * j / (T1_count - 1); }
};

struct SweepRecord {
  double G1 = 0.0;
  double T1 = 0.0;
  double f_sta = std::numeric_limits<double>::quiet_NaN();
  double f_app = std::numeric_limits<double>::quiet_NaN();
  double f_ro = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
  double wall_seconds = 0.0;
};

inline double swap_fidelity(double G1, double T1, const SwapParams& base, Mode mode, double tol) {
  SwapParams p = base;
  p.G1 = G1;
  p.T1 = T1;
  StagePreset preset = preset_swap(p);
  preset.spec.mode = mode;
  return std::clamp(run_preset(preset, tol).fidelity, 0.0, 1.0);
}

inline SweepRecord sweep_point(const SweepGrid& grid, double G1, double T1, double tol) {
  SweepRecord r;
  r.G1 = G1;
  r.T1 = T1;
  const auto t0 = std::chrono::steady_clock::now();
  auto one = [&](bool enabled, Mode m, double& out) {
    if (!enabled) return;
    try {
      out = swap_fidelity(G1, T1, grid.swap, m, tol);
    } catch (const Error& e) {
      out = std::numeric_limits<double>::quiet_NaN();
      r.status = std::string(to_string(m)) + ":" + std::string(to_string(e.code()));
    }
  };
  one(grid.run_sta, Mode::sta, r.f_sta);
  one(grid.run_app, Mode::app, r.f_app);
  one(grid.run_ro, Mode::ro, r.f_ro);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Rows sorted by (G1, T1).  jobs <= 0 uses hardware concurrency.
inline std::vector<SweepRecord> run_sweep(const SweepGrid& grid, double tol, int jobs = 0) {
  grid.validate();
  const std::size_t total = static_cast<std::size_t>(grid.G1_count) * static_cast<std::size_t>(grid.T1_count);
  std::vector<SweepRecord> out(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const int i = static_cast<int>(k / static_cast<std::size_t>(grid.T1_count));
      const int j = static_cast<int>(k % static_cast<std::size_t>(grid.T1_count));
      out[k] = sweep_point(grid, grid.G1_at(i), grid.T1_at(j), tol);
    }
  };
  unsigned n = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(total));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::sort(out.begin(), out.end(), [](const SweepRecord& a, const SweepRecord& b) {
    return a.G1 != b.G1 ? a.G1 < b.G1 : a.T1 < b.T1;
  });
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows) {
  os << "G1_radns,T1_ns,f_sta,f_app,f_ro,status\n";
  for (const auto& r : rows) {
    os << format_number(r.G1) << ',' << format_number(r.T1) << ',' << format_number(r.f_sta) << ','
       << format_number(r.f_app) << ',' << format_number(r.f_ro) << ',' << r.status << '\n';
  }
}

// Envelope area of g'(t) over the truncated window of a swap stage.
inline double swap_area(double G1, double T1, const SwapParams& p) { return ae_area(G1, T1, p.halfwidth * T1); }

struct ContourPoint {
  double G1;
  double T1;
};

// For each grid T1, the G1 whose envelope area equals `area` (default pi);
// points outside the G1 range are dropped.
inline std::vector<ContourPoint> ro_area_contour(const SweepGrid& grid, double area = std::numbers::pi) {
  std::vector<ContourPoint> out;
  for (int j = 0; j < grid.T1_count; ++j) {
    const double T1 = grid.T1_at(j);
    const double G1 = area / swap_area(1.0, T1, grid.swap);
    if (G1 >= grid.G1_min && G1 <= grid.G1_max) out.push_back({G1, T1});
  }
  return out;
}

// Which area convention the simulated RO maxima follow: the mean of
// area / pi at the best RO point of each T1 row.
struct AreaConventionReport {
  double mean_area_over_pi = 0.0;
  int rows_used = 0;
  std::string matches;  // "pi", "pi/2" or "neither"
};

inline AreaConventionReport ro_area_convention(const SweepGrid& grid, const std::vector<SweepRecord>& rows) {
  AreaConventionReport rep;
  double acc = 0.0;
  for (int j = 0; j < grid.T1_count; ++j) {
    const double T1 = grid.T1_at(j);
    const SweepRecord* best = nullptr;
    for (const auto& r : rows) {
      if (std::abs(r.T1 - T1) > 1e-12 || std::isnan(r.f_ro)) continue;
      if (best == nullptr || r.f_ro > best->f_ro) best = &r;
    }
    if (best == nullptr) continue;
    // rows whose maximum sits on the grid edge do not locate a maximum
    if (best->G1 <= grid.G1_min + 1e-12 || best->G1 >= grid.G1_max - 1e-12) continue;
    acc += swap_area(best->G1, best->T1, grid.swap) / std::numbers::pi;
    ++rep.rows_used;
  }
  if (rep.rows_used > 0) rep.mean_area_over_pi = acc / rep.rows_used;
  if (rep.rows_used == 0) {
    rep.matches = "neither";
  } else if (std::abs(rep.mean_area_over_pi - 1.0) < 0.1) {
    rep.matches = "pi";
  } else if (std::abs(rep.mean_area_over_pi - 0.5) < 0.05) {
    rep.matches = "pi/2";
  } else {
    rep.matches = "neither";
  }
  return rep;
}

}  // namespace noon
