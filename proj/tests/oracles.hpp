#pragma once

// Reference computations kept apart from the library: closed-form pulses,
// finite differences, quadrature, a fixed-step RK4 for the driven 2x2 block,
// and a brute-force two-mode diagonalization.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Fn = std::function<double(double)>;
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

inline Fn sech_pulse(double amp, double t0) {
  return [=](double t) { return amp / std::cosh(pi * t / (2.0 * t0)); };
}
inline Fn tanh_pulse(double beta, double t0, double ts) {
  return [=](double t) { return 2.0 * beta * beta * t0 / pi * std::tanh(pi * t / (2.0 * ts)); };
}
inline Fn gauss_pulse(double amp, double c, double w) {
  return [=](double t) { return amp * std::exp(-(t - c) * (t - c) / (w * w)); };
}
inline Fn times(Fn f, double k) {
  return [=](double t) { return k * f(t); };
}

inline double d5(const Fn& f, double t, double h = 1e-3) {
  return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
}

inline double simpson(const Fn& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// d/dt of the continuous angle atan2(coupling, detuning), by differences of
// unwrapped samples.
inline double angle_rate(const Fn& coupling, const Fn& detuning, double t, double h = 1e-4) {
  auto ang = [&](double s) { return std::atan2(coupling(s), detuning(s)); };
  const double a0 = ang(t);
  auto near = [&](double s) {
    double a = ang(s);
    while (a - a0 > pi) a -= 2 * pi;
    while (a - a0 < -pi) a += 2 * pi;
    return a;
  };
  return (near(t - 2 * h) - 8 * near(t - h) + 8 * near(t + h) - near(t + 2 * h)) / (12 * h);
}

// (lo, hi) amplitudes under H = [[0, (W - i c)/2], [(W + i c)/2, D]].
struct TwoLevel {
  Fn coupling;
  Fn cd;  // may be empty
  Fn detuning;

  Eigen::Matrix2cd h(double t) const {
    const double w = coupling(t);
    const double c = cd ? cd(t) : 0.0;
    Eigen::Matrix2cd m;
    m << 0.0, cplx(w, -c) / 2.0, cplx(w, c) / 2.0, detuning(t);
    return m;
  }

  Eigen::Vector2cd rhs(double t, const Eigen::Vector2cd& y) const { return cplx(0, -1) * (h(t) * y); }

  Eigen::Vector2cd evolve(Eigen::Vector2cd y, double t0, double t1, double dt = 1e-4) const {
    const int n = static_cast<int>(std::ceil((t1 - t0) / dt));
    const double h = (t1 - t0) / n;
    double t = t0;
    for (int i = 0; i < n; ++i) {
      const auto k1 = rhs(t, y);
      const auto k2 = rhs(t + h / 2, y + h / 2 * k1);
      const auto k3 = rhs(t + h / 2, y + h / 2 * k2);
      const auto k4 = rhs(t + h, y + h * k3);
      y += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
    }
    return y;
  }
};

// Lower/upper eigenvector of the CD-free 2x2 block in closed form:
// (cos th, -sin th) and (sin th, cos th), 2 th = atan2(W, D).
inline Eigen::Vector2cd eigvec(double coupling, double detuning, int branch) {
  const double th = 0.5 * std::atan2(coupling, detuning);
  Eigen::Vector2cd v;
  if (branch == 0) {
    v << std::cos(th), -std::sin(th);
  } else {
    v << std::sin(th), std::cos(th);
  }
  return v;
}

// Two anharmonic modes with per-mode Fock cutoff n, basis |p, m>.
inline Eigen::MatrixXd two_mode_hamiltonian(double wp, double wm, double dp, double dm, double J, int n) {
  const int d = (n + 1) * (n + 1);
  Eigen::MatrixXd cp = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int k = 1; k <= n; ++k) cp(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n + 1, n + 1);
  auto kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
  };
  const Eigen::MatrixXd A = kron(cp, id), B = kron(id, cp);
  const Eigen::MatrixXd nA = A.transpose() * A, nB = B.transpose() * B;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd h = (wp * I + dp / 2 * (nA - I)) * nA + (wm * I + dm / 2 * (nB - I)) * nB;
  h += J * (A * B.transpose() + A.transpose() * B);
  return h;
}

inline std::vector<double> eigenvalues(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

}  // namespace oracle
