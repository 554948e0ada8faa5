#pragma once

// i d(psi)/dt = H(t) psi  (hbar = 1, t in ns, H in rad/ns).

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "noon/error.hpp"
#include "noon/hamiltonian.hpp"
#include "noon/quantum_core.hpp"

namespace noon {

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;

  std::size_t size() const noexcept { return times.size(); }
  double population(std::size_t sample, std::size_t index) const {
    return std::norm(states[sample](static_cast<Eigen::Index>(index)));
  }
};

struct EvolveOptions {
  double tol = 1e-10;
  // Dense-output spacing for the trajectory; <= 0 disables recording.
  double sample_dt = 0.0;
  double max_norm_drift = 1e-6;
  std::size_t max_steps = 2'000'000;
};

struct EvolutionResult {
  StateVector final_state;
  std::optional<Trajectory> trajectory;
  double norm_drift = 0.0;
  std::size_t step_count = 0;
  std::size_t rejected_steps = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau with Shampine's dense-output coefficients.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

}  // namespace detail

inline EvolutionResult evolve(const StageHamiltonian& h, const StateVector& psi0, const EvolveOptions& opt) {
  using T = detail::Dopri5;
  if (!(psi0.basis() == h.basis())) throw Error(ErrorCode::basis_mismatch, "evolve: state/Hamiltonian basis mismatch");
  if (!(opt.tol >= 1e-12 && opt.tol <= 1e-4)) {
    throw Error(ErrorCode::invalid_argument, "evolve: tol must lie in [1e-12, 1e-4]");
  }
  if (std::abs(psi0.norm() - 1.0) > opt.max_norm_drift) {
    throw Error(ErrorCode::invalid_argument, "evolve: psi0 not normalized");
  }

  const double t0 = h.window().start;
  const double t1 = h.window().end;
  const auto n = static_cast<Eigen::Index>(psi0.dim());

  EvolutionResult res{psi0, std::nullopt, 0.0, 0, 0};
  const bool record = opt.sample_dt > 0.0;
  if (record) res.trajectory.emplace();
  auto sample_count = [&](double span) {
    return static_cast<std::size_t>(std::floor(span / opt.sample_dt + 1e-9));
  };
  std::size_t next_sample = 0;
  const std::size_t last_sample = record ? sample_count(t1 - t0) : 0;

  Vector y = psi0.amplitudes();
  if (record) {
    res.trajectory->times.push_back(t0);
    res.trajectory->states.push_back(y);
    next_sample = 1;
  }
  if (t1 <= t0 || h.is_zero()) {
    if (record) {
      for (; next_sample <= last_sample; ++next_sample) {
        res.trajectory->times.push_back(t0 + opt.sample_dt * static_cast<double>(next_sample));
        res.trajectory->states.push_back(y);
      }
      if (res.trajectory->times.back() < t1) {
        res.trajectory->times.push_back(t1);
        res.trajectory->states.push_back(y);
      }
    }
    return res;
  }

  const cplx minus_i{0.0, -1.0};
  auto rhs = [&](double t, const Vector& v, Vector& out) {
    h.apply(t, v, out);
    out *= minus_i;
  };

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
  rhs(t0, y, k1);
  double t = t0;
  double step = std::min(0.01, 0.01 * (t1 - t0));
  const double rtol = opt.tol, atol = opt.tol;
  std::size_t steps = 0;

  while (t < t1) {
    if (steps + res.rejected_steps > opt.max_steps) {
      throw Error(ErrorCode::integration_failure, "evolve: step budget exhausted");
    }
    if (t + step > t1) step = t1 - t;
    if (step < 1e-14 * std::max(1.0, std::abs(t))) {
      throw Error(ErrorCode::integration_failure, "evolve: step size underflow at t=" + std::to_string(t));
    }
    tmp = y + step * T::a21 * k1;
    rhs(t + T::c2 * step, tmp, k2);
    tmp = y + step * (T::a31 * k1 + T::a32 * k2);
    rhs(t + T::c3 * step, tmp, k3);
    tmp = y + step * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    rhs(t + T::c4 * step, tmp, k4);
    tmp = y + step * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    rhs(t + T::c5 * step, tmp, k5);
    tmp = y + step * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    rhs(t + step, tmp, k6);
    ynew = y + step * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    rhs(t + step, ynew, k7);
    err = step * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);

    double enorm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = atol + rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      enorm = std::max(enorm, std::abs(err(i)) / sc);
    }

    if (enorm <= 1.0) {
      const double tn = t + step;
      if (record) {
        // continuous extension on [t, tn]
        const Vector r1 = y;
        const Vector r2 = ynew - y;
        const Vector r3 = step * k1 - r2;
        const Vector r4 = r2 - step * k7 - r3;
        const Vector r5 = step * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
        for (; next_sample <= last_sample; ++next_sample) {
          const double ts = t0 + opt.sample_dt * static_cast<double>(next_sample);
          if (ts > tn) break;
          const double th = (ts - t) / step;
          const double th1 = 1.0 - th;
          res.trajectory->times.push_back(ts);
          res.trajectory->states.push_back(r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5))));
        }
      }
      y = ynew;
      k1 = k7;
      t = tn;
      ++steps;
      const double drift = std::abs(y.norm() - 1.0);
      res.norm_drift = std::max(res.norm_drift, drift);
      if (drift > opt.max_norm_drift) {
        throw Error(ErrorCode::integration_failure,
                    "evolve: norm drift " + std::to_string(drift) + " exceeds limit at t=" + std::to_string(t));
      }
      const double fac = enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
      step *= fac;
    } else {
      ++res.rejected_steps;
      step *= std::clamp(0.9 * std::pow(enorm, -0.2), 0.1, 0.9);
    }
  }
  if (record && res.trajectory->times.back() < t1 - 1e-12) {
    res.trajectory->times.push_back(t1);
    res.trajectory->states.push_back(y);
  }
  res.step_count = steps;
  res.final_state = StateVector(psi0.basis(), std::move(y));
  return res;
}

inline EvolutionResult evolve(const StageHamiltonian& h, const StateVector& psi0, double tol) {
  EvolveOptions opt;
  opt.tol = tol;
  return evolve(h, psi0, opt);
}

// Time-ordered product of exact exponentials of the midpoint Hamiltonian.
// Each step exponentiates the connected blocks of the combined sparsity
// pattern separately (exact for a block-diagonal H).
inline StateVector evolve_oracle(const StageHamiltonian& h, const StateVector& psi0, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "evolve_oracle: dt must be > 0");
  const double span = h.window().duration();
  Vector y = psi0.amplitudes();
  if (span <= 0.0) return psi0;
  const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
  const double step = span / static_cast<double>(steps);
  const auto n = static_cast<Eigen::Index>(psi0.dim());

  // union-find over the nonzero pattern of every term
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (const auto& term : h.terms()) {
    const Matrix& m = term.op.matrix();
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) {
        if (m(r, c) != cplx{}) parent[static_cast<std::size_t>(find(r))] = find(c);
      }
    }
  }
  std::vector<std::vector<Eigen::Index>> blocks;
  {
    std::vector<Eigen::Index> root_to_block(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = static_cast<std::size_t>(find(i));
      if (root_to_block[r] < 0) {
        root_to_block[r] = static_cast<Eigen::Index>(blocks.size());
        blocks.emplace_back();
      }
      blocks[static_cast<std::size_t>(root_to_block[r])].push_back(i);
    }
  }

  const cplx minus_i{0.0, -1.0};
  for (std::size_t s = 0; s < steps; ++s) {
    const double tm = h.window().start + (static_cast<double>(s) + 0.5) * step;
    const Matrix hm = h.at(tm);
    for (const auto& b : blocks) {
      const auto m = static_cast<Eigen::Index>(b.size());
      if (m == 1) {
        y(b[0]) *= std::exp(minus_i * hm(b[0], b[0]).real() * step);
        continue;
      }
      Matrix hb(m, m);
      Vector yb(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        yb(i) = y(b[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m; ++j) hb(i, j) = hm(b[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(hb);
      Vector phase(m);
      for (Eigen::Index i = 0; i < m; ++i) phase(i) = std::exp(minus_i * es.eigenvalues()(i) * step);
      yb = es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * yb);
      for (Eigen::Index i = 0; i < m; ++i) y(b[static_cast<std::size_t>(i)]) = yb(i);
    }
  }
  return {psi0.basis(), std::move(y)};
}

// 2x2 block of H(t) on (lo, hi) without forming the full matrix.
inline Eigen::Matrix2cd subspace_block(const StageHamiltonian& h, double t, std::size_t lo, std::size_t hi) {
  Eigen::Matrix2cd b = Eigen::Matrix2cd::Zero();
  const std::array<Eigen::Index, 2> idx{static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi)};
  for (const auto& term : h.terms()) {
    const double c = term.coefficient.value(t);
    if (c == 0.0) continue;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) b(i, j) += c * term.op.matrix()(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
  }
  return b;
}

// |<lambda_branch(t)|psi>|^2 for the instantaneous eigenvectors of the
// CD-free Hamiltonian restricted to the driven (lo, hi) subspace.  Branch
// identity is carried between calls by maximal overlap, not energy order.
class EigenbranchTracker {
 public:
  EigenbranchTracker(StageHamiltonian bare, std::size_t lo, std::size_t hi)
      : bare_(std::move(bare)), lo_(lo), hi_(hi) {}

  // Picks the branch with the largest overlap with psi at t.
  void select_by_state(const StateVector& psi, double t) {
    const auto vecs = eigenvectors(t);
    const Eigen::Vector2cd p = project(psi);
    const double o0 = std::norm(vecs.col(0).dot(p));
    const double o1 = std::norm(vecs.col(1).dot(p));
    prev_ = vecs.col(o0 >= o1 ? 0 : 1);
    selected_ = true;
  }

  // branch 0 = lower eigenvalue at t.
  void select_by_index(int branch, double t) {
    if (branch != 0 && branch != 1) throw Error(ErrorCode::invalid_argument, "branch must be 0 or 1");
    prev_ = eigenvectors(t).col(branch);
    selected_ = true;
  }

  double overlap(const StateVector& psi, double t) {
    if (!selected_) throw Error(ErrorCode::invalid_argument, "eigenbranch not selected");
    const auto vecs = eigenvectors(t);
    const double c0 = std::abs(vecs.col(0).dot(prev_));
    const double c1 = std::abs(vecs.col(1).dot(prev_));
    prev_ = vecs.col(c0 >= c1 ? 0 : 1);
    return std::norm(prev_.dot(project(psi)));
  }

 private:
  Eigen::Matrix2cd eigenvectors(double t) const {
    const Eigen::Matrix2cd b = subspace_block(bare_, t, lo_, hi_);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(b);
    const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (gap <= 1e-13 * scale) {
      throw Error(ErrorCode::degenerate_branch, "degenerate eigenvalues at t=" + std::to_string(t));
    }
    return es.eigenvectors();
  }

  Eigen::Vector2cd project(const StateVector& psi) const {
    return {psi.amplitudes()(static_cast<Eigen::Index>(lo_)), psi.amplitudes()(static_cast<Eigen::Index>(hi_))};
  }

  StageHamiltonian bare_;
  std::size_t lo_;
  std::size_t hi_;
  Eigen::Vector2cd prev_ = Eigen::Vector2cd::Zero();
  bool selected_ = false;
};

// Stateless variant: branch 0/1 by energy order at t.
inline double instantaneous_eigenstate_overlap(const StageHamiltonian& bare, const StateVector& psi, double t,
                                               int branch, std::size_t lo, std::size_t hi) {
  EigenbranchTracker tr(bare, lo, hi);
  tr.select_by_index(branch, t);
  return tr.overlap(psi, t);
}

// Instantaneous eigenvector (as a full state) of the bare Hamiltonian's
// (lo, hi) block, branch 0 = lower.
inline StateVector instantaneous_eigenstate(const StageHamiltonian& bare, double t, int branch, std::size_t lo,
                                            std::size_t hi) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(subspace_block(bare, t, lo, hi));
  Vector v = Vector::Zero(static_cast<Eigen::Index>(bare.dim()));
  v(static_cast<Eigen::Index>(lo)) = es.eigenvectors()(0, branch);
  v(static_cast<Eigen::Index>(hi)) = es.eigenvectors()(1, branch);
  return {bare.basis(), v / v.norm()};
}

// Time for the population of `index` to climb from eps to 1 - eps (and stay
// there).  NaN when the plateau is never reached.
inline double passage_duration(const Trajectory& traj, std::size_t index, double eps = 1e-3) {
  std::optional<double> start;
  std::optional<double> finish;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const double p = traj.population(s, index);
    if (!start && p > eps) start = traj.times[s];
    if (p >= 1.0 - eps) {
      if (!finish) finish = traj.times[s];
    } else {
      finish.reset();
    }
  }
  if (!start || !finish) return std::numeric_limits<double>::quiet_NaN();
  return *finish - *start;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// t_ns, one population column per basis state whose population ever exceeds
// `floor`, then the norm.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const BasisSpec& basis,
                                 double floor = 1e-6) {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    for (std::size_t s = 0; s < traj.size(); ++s) {
      if (traj.population(s, i) > floor) {
        cols.push_back(i);
        break;
      }
    }
  }
  os << "t_ns";
  for (std::size_t i : cols) {
    std::string l = basis.label_text(i);
    std::replace(l.begin(), l.end(), ',', '_');
    os << ",p_" << l;
  }
  os << ",norm\n";
  for (std::size_t s = 0; s < traj.size(); ++s) {
    os << format_number(traj.times[s]);
    for (std::size_t i : cols) os << ',' << format_number(traj.population(s, i));
    os << ',' << format_number(traj.states[s].norm()) << '\n';
  }
}

}  // namespace noon
