#pragma once

// Tunable-coupling qutrit: two coupled anharmonic modes c+, c- reduced to a
// V-type qutrit |g> = |0,0>, |e> = dressed +, |a> = dressed -.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "noon/error.hpp"
#include "noon/pulse.hpp"
#include "noon/quantum_core.hpp"

namespace noon {

struct TCQParams {
  double EC_plus = 0.0;
  double EC_minus = 0.0;
  double EJ_plus = 0.0;
  double EJ_minus = 0.0;
  double EI = 0.0;
  double g_plus = 0.0;
  double g_minus = 0.0;
};

struct BareModel {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double J = 0.0;
  std::vector<std::string> warnings;
};

inline BareModel bare_model(const TCQParams& p) {
  if (!(p.EC_plus > 0.0 && p.EC_minus > 0.0 && p.EJ_plus > 0.0 && p.EJ_minus > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "TCQ charge and Josephson energies must be positive");
  }
  if (p.EI < 0.0) throw Error(ErrorCode::invalid_argument, "TCQ interaction energy must be >= 0");
  BareModel m;
  m.omega_plus = std::sqrt(8.0 * p.EJ_plus * p.EC_plus) - p.EC_plus;
  m.omega_minus = std::sqrt(8.0 * p.EJ_minus * p.EC_minus) - p.EC_minus;
  m.delta_plus = -p.EC_plus;
  m.delta_minus = -p.EC_minus;
  m.J = p.EI * std::pow(p.EJ_plus * p.EJ_minus / (p.EC_plus * p.EC_minus), 0.25) / std::sqrt(2.0);
  if (p.EJ_plus / p.EC_plus < 20.0) m.warnings.emplace_back("EJ+/EC+ below 20: oscillator reduction is marginal");
  if (p.EJ_minus / p.EC_minus < 20.0) m.warnings.emplace_back("EJ-/EC- below 20: oscillator reduction is marginal");
  return m;
}

inline double tcq_zeta(const BareModel& m) {
  return m.omega_plus - m.omega_minus - (m.delta_plus - m.delta_minus) / 2.0;
}

// atan(2J/zeta)/2 + (pi if zeta > 0, pi/2 if zeta < 0)
inline double mixing_angle_lambda(const BareModel& m) {
  const double zeta = tcq_zeta(m);
  const double scale = std::max({std::abs(m.omega_plus), std::abs(m.omega_minus), 1e-300});
  if (std::abs(zeta) <= 1e-14 * scale) {
    throw Error(ErrorCode::degenerate_detuning, "zeta = 0: TCQ mixing angle undefined");
  }
  const double theta = zeta > 0.0 ? std::numbers::pi : std::numbers::pi / 2.0;
  return std::atan(2.0 * m.J / zeta) / 2.0 + theta;
}

struct DressedCouplings {
  double g_plus = 0.0;
  double g_minus = 0.0;
  double lambda_zero = 0.0;  // g+ cos(l) - g- sin(l) = 0, in (-pi/2, pi/2]
};

inline DressedCouplings dressed_couplings(double g_plus, double g_minus, double lambda) {
  DressedCouplings d;
  d.g_plus = g_plus * std::cos(lambda) - g_minus * std::sin(lambda);
  d.g_minus = g_minus * std::cos(lambda) + g_plus * std::sin(lambda);
  if (g_plus == 0.0) {
    d.lambda_zero = 0.0;
  } else if (g_minus == 0.0) {
    d.lambda_zero = std::numbers::pi / 2.0;
  } else {
    d.lambda_zero = std::atan(g_plus / g_minus);
  }
  return d;
}

struct EffectiveSpectrum {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double delta_c = 0.0;
  std::vector<std::string> warnings;
};

// Diagonalizes the 1- and 2-excitation sectors (exact: the model conserves
// c+^+c+ + c-^+c-).  Labels follow the largest-overlap assignment against
// products of the dressed single-excitation modes.
inline EffectiveSpectrum effective_spectrum(const BareModel& b) {
  EffectiveSpectrum out;
  // one excitation: basis {|1,0>, |0,1>}
  Eigen::Matrix2d h1;
  h1 << b.omega_plus, b.J, b.J, b.omega_minus;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es1(h1);
  const Eigen::Matrix2d v1 = es1.eigenvectors();
  // + mode: the column with the larger weight on |1,0>
  const int plus_col = std::abs(v1(0, 1)) >= std::abs(v1(0, 0)) ? 1 : 0;
  const int minus_col = 1 - plus_col;
  out.omega_plus = es1.eigenvalues()(plus_col);
  out.omega_minus = es1.eigenvalues()(minus_col);
  const double u1 = v1(0, plus_col), u2 = v1(1, plus_col);   // b+^+ = u1 c+^+ + u2 c-^+
  const double w1 = v1(0, minus_col), w2 = v1(1, minus_col);  // b-^+ = w1 c+^+ + w2 c-^+

  // two excitations: basis {|2,0>, |1,1>, |0,2>}
  const double r2 = std::sqrt(2.0);
  Eigen::Matrix3d h2;
  h2 << 2.0 * b.omega_plus + b.delta_plus, r2 * b.J, 0.0,  //
      r2 * b.J, b.omega_plus + b.omega_minus, r2 * b.J,     //
      0.0, r2 * b.J, 2.0 * b.omega_minus + b.delta_minus;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es2(h2);

  // harmonic references (b+^+)^2/sqrt2, b+^+ b-^+, (b-^+)^2/sqrt2
  std::array<Eigen::Vector3d, 3> ref;
  ref[0] = Eigen::Vector3d(u1 * u1, r2 * u1 * u2, u2 * u2);
  ref[1] = Eigen::Vector3d(r2 * u1 * w1, u1 * w2 + u2 * w1, r2 * u2 * w2);
  ref[2] = Eigen::Vector3d(w1 * w1, r2 * w1 * w2, w2 * w2);
  std::array<int, 3> perm{0, 1, 2}, best{0, 1, 2};
  double best_score = -1.0;
  do {
    double score = 1.0;
    for (int k = 0; k < 3; ++k) score *= std::abs(ref[static_cast<std::size_t>(k)].dot(es2.eigenvectors().col(perm[static_cast<std::size_t>(k)])));
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double e20 = es2.eigenvalues()(best[0]);
  const double e11 = es2.eigenvalues()(best[1]);
  const double e02 = es2.eigenvalues()(best[2]);
  out.delta_plus = e20 - 2.0 * out.omega_plus;
  out.delta_minus = e02 - 2.0 * out.omega_minus;
  out.delta_c = e11 - out.omega_plus - out.omega_minus;

  const double scale = std::max(1.0, es2.eigenvalues().cwiseAbs().maxCoeff());
  for (int k = 0; k + 1 < 3; ++k) {
    if (es2.eigenvalues()(k + 1) - es2.eigenvalues()(k) < 1e-9 * scale) {
      out.warnings.emplace_back("near-degenerate two-excitation sector: label assignment ill-conditioned");
      break;
    }
  }
  if (best_score < 0.5) out.warnings.emplace_back("two-excitation states weakly resemble dressed products");
  return out;
}

inline constexpr double gmon_cap = two_pi * 0.055;

struct GmonCoupling {
  PulseShape coupling;  // g12 in the dressed - modes
  double peak = 0.0;    // max |coupling| before capping
  bool saturated = false;
  std::string warning;
};

// S(theta) phi1- phi2- -> g12~ (c1~- d~-^+ + h.c.): each bare - mode carries
// cos(lambda) of the dressed - mode.  Values above `cap` are clipped.
inline GmonCoupling gmon_coupling(const PulseShape& S, double lambda1, double lambda2, double cap = gmon_cap) {
  GmonCoupling out;
  const double factor = std::cos(lambda1) * std::cos(lambda2);
  const Window w = S.window();
  if (S.is_zero() || factor == 0.0) {
    out.coupling = PulseShape::zero(w);
    return out;
  }
  const std::size_t n = 4001;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = w.start + w.duration() * static_cast<double>(i) / static_cast<double>(n - 1);
    out.peak = std::max(out.peak, std::abs(factor * S.value(t)));
  }
  if (out.peak <= cap) {
    out.coupling = S.scaled(factor);
    return out;
  }
  out.saturated = true;
  out.warning = "gmon coupling peak " + std::to_string(out.peak) + " rad/ns exceeds cap " + std::to_string(cap) +
                " rad/ns; clipped";
  out.coupling = PulseShape::derived(
      [S, factor, cap](double t) { return std::clamp(factor * S.value(t), -cap, cap); },
      [S, factor, cap](double t) {
        const double v = factor * S.value(t);
        return std::abs(v) >= cap ? 0.0 : factor * S.derivative(t);
      },
      nullptr, w);
  return out;
}

}  // namespace noon
