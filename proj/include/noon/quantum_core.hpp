#pragma once

// Dense linear algebra over the composite space
//   qutrit1 (x) qutrit2 (x) cavity a (x) cavity b.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "noon/error.hpp"

namespace noon {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ladder: g <-> e <-> f.  vtype: g <-> e and g <-> a.
enum class Topology { ladder, vtype };

enum class Subsystem : int { qutrit1 = 0, qutrit2 = 1, cavity_a = 2, cavity_b = 3 };

// Level indices shared by both topologies; the third level is f (ladder) or a (vtype).
struct Level {
  static constexpr int g = 0;
  static constexpr int e = 1;
  static constexpr int third = 2;
};

inline char level_char(Topology topo, int level) {
  constexpr char ladder[] = {'g', 'e', 'f'};
  constexpr char vtype[] = {'g', 'e', 'a'};
  return topo == Topology::ladder ? ladder[level] : vtype[level];
}

inline int level_from_char(Topology topo, char c) {
  switch (c) {
    case 'g': return Level::g;
    case 'e': return Level::e;
    case 'f':
      if (topo == Topology::ladder) return Level::third;
      break;
    case 'a':
      if (topo == Topology::vtype) return Level::third;
      break;
    default: break;
  }
  throw Error(ErrorCode::invalid_argument,
              std::string("level '") + c + "' does not exist in this topology");
}

// Excitation count of a qutrit level: ladder f holds two quanta, vtype a holds one.
inline int level_excitations(Topology topo, int level) {
  if (level == Level::third) return topo == Topology::ladder ? 2 : 1;
  return level;
}

struct BasisLabel {
  int q1 = 0;
  int q2 = 0;
  int na = 0;
  int nb = 0;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

class BasisSpec {
 public:
  static constexpr int qutrit_levels = 3;

  BasisSpec() = default;
  BasisSpec(int cutoff, Topology topology) : cutoff_(cutoff), topology_(topology) {
    if (cutoff < 0) throw Error(ErrorCode::invalid_argument, "cavity cutoff must be >= 0");
  }

  int cutoff() const noexcept { return cutoff_; }
  Topology topology() const noexcept { return topology_; }
  int fock_dim() const noexcept { return cutoff_ + 1; }
  std::size_t dim() const noexcept {
    return static_cast<std::size_t>(qutrit_levels * qutrit_levels * fock_dim() * fock_dim());
  }

  int subsystem_dim(Subsystem s) const noexcept {
    return (s == Subsystem::qutrit1 || s == Subsystem::qutrit2) ? qutrit_levels : fock_dim();
  }

  std::size_t index(const BasisLabel& l) const {
    if (l.q1 < 0 || l.q1 >= 3 || l.q2 < 0 || l.q2 >= 3 || l.na < 0 || l.na > cutoff_ ||
        l.nb < 0 || l.nb > cutoff_) {
      throw Error(ErrorCode::invalid_argument, "basis label outside the truncated space");
    }
    const std::size_t f = static_cast<std::size_t>(fock_dim());
    return ((static_cast<std::size_t>(l.q1) * 3 + static_cast<std::size_t>(l.q2)) * f +
            static_cast<std::size_t>(l.na)) * f + static_cast<std::size_t>(l.nb);
  }

  BasisLabel label(std::size_t idx) const {
    const std::size_t f = static_cast<std::size_t>(fock_dim());
    BasisLabel l;
    l.nb = static_cast<int>(idx % f);
    idx /= f;
    l.na = static_cast<int>(idx % f);
    idx /= f;
    l.q2 = static_cast<int>(idx % 3);
    l.q1 = static_cast<int>(idx / 3);
    return l;
  }

  int component(const BasisLabel& l, Subsystem s) const noexcept {
    switch (s) {
      case Subsystem::qutrit1: return l.q1;
      case Subsystem::qutrit2: return l.q2;
      case Subsystem::cavity_a: return l.na;
      case Subsystem::cavity_b: return l.nb;
    }
    return 0;
  }

  // "g,a,0,0" style text.
  std::string label_text(std::size_t idx) const {
    const BasisLabel l = label(idx);
    std::string s;
    s += level_char(topology_, l.q1);
    s += ',';
    s += level_char(topology_, l.q2);
    s += ',' + std::to_string(l.na) + ',' + std::to_string(l.nb);
    return s;
  }

  BasisLabel parse_label(std::string_view text) const {
    std::vector<std::string> parts(1);
    for (char c : text) {
      if (c == ' ' || c == '|' || c == '>') continue;
      if (c == ',') {
        parts.emplace_back();
      } else {
        parts.back() += c;
      }
    }
    if (parts.size() != 4 || parts[0].size() != 1 || parts[1].size() != 1) {
      throw Error(ErrorCode::invalid_argument,
                  "basis label must look like 'g,a,0,0': " + std::string(text));
    }
    BasisLabel l;
    l.q1 = level_from_char(topology_, parts[0][0]);
    l.q2 = level_from_char(topology_, parts[1][0]);
    try {
      l.na = std::stoi(parts[2]);
      l.nb = std::stoi(parts[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, "bad photon number in label " + std::string(text));
    }
    index(l);  // range check
    return l;
  }

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;

 private:
  int cutoff_ = 0;
  Topology topology_ = Topology::vtype;
};

inline BasisSpec build_basis(int cutoff, Topology topology) { return BasisSpec(cutoff, topology); }

class StateVector {
 public:
  StateVector(BasisSpec basis, Vector amplitudes) : basis_(basis), amp_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amp_.size()) != basis_.dim()) {
      throw Error(ErrorCode::dimension_mismatch, "amplitude vector does not match basis dimension");
    }
  }

  static StateVector basis_state(const BasisSpec& basis, const BasisLabel& l) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dim()));
    v(static_cast<Eigen::Index>(basis.index(l))) = 1.0;
    return {basis, std::move(v)};
  }

  static StateVector basis_state(const BasisSpec& basis, std::string_view text) {
    return basis_state(basis, basis.parse_label(text));
  }

  // Normalized superposition sum_k c_k |label_k>.
  static StateVector superposition(const BasisSpec& basis,
                                   const std::vector<std::pair<std::string, cplx>>& terms) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dim()));
    for (const auto& [text, c] : terms) {
      v(static_cast<Eigen::Index>(basis.index(basis.parse_label(text)))) += c;
    }
    const double n = v.norm();
    if (n == 0.0) throw Error(ErrorCode::invalid_argument, "superposition has zero norm");
    return {basis, v / n};
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  const Vector& amplitudes() const noexcept { return amp_; }
  std::size_t dim() const noexcept { return basis_.dim(); }
  double norm() const { return amp_.norm(); }

  double population(std::size_t idx) const { return std::norm(amp_(static_cast<Eigen::Index>(idx))); }
  double population(std::string_view text) const {
    return population(basis_.index(basis_.parse_label(text)));
  }

 private:
  BasisSpec basis_;
  Vector amp_;
};

class OperatorMatrix {
 public:
  OperatorMatrix(BasisSpec basis, Matrix entries, bool hermitian = false)
      : basis_(basis), m_(std::move(entries)), hermitian_(hermitian) {
    if (static_cast<std::size_t>(m_.rows()) != basis_.dim() || m_.rows() != m_.cols()) {
      throw Error(ErrorCode::dimension_mismatch, "operator does not match basis dimension");
    }
    if (hermitian_ && hermiticity_defect() >= 1e-12) {
      throw Error(ErrorCode::invalid_argument, "operator flagged hermitian is not");
    }
  }

  static OperatorMatrix identity(const BasisSpec& basis) {
    const auto n = static_cast<Eigen::Index>(basis.dim());
    return {basis, Matrix::Identity(n, n), true};
  }
  static OperatorMatrix zero(const BasisSpec& basis) {
    const auto n = static_cast<Eigen::Index>(basis.dim());
    return {basis, Matrix::Zero(n, n), true};
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  const Matrix& matrix() const noexcept { return m_; }
  bool hermitian() const noexcept { return hermitian_; }

  double hermiticity_defect() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

  OperatorMatrix adjoint() const { return {basis_, m_.adjoint(), hermitian_}; }

  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return {a.basis_, a.m_ * b.m_};
  }
  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return {a.basis_, a.m_ + b.m_, a.hermitian_ && b.hermitian_};
  }
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return {a.basis_, a.m_ - b.m_, a.hermitian_ && b.hermitian_};
  }
  friend OperatorMatrix operator*(cplx s, const OperatorMatrix& a) {
    const bool h = a.hermitian_ && s.imag() == 0.0;
    return {a.basis_, s * a.m_, h};
  }

  // Marks the operator as hermitian after checking it.
  OperatorMatrix as_hermitian() const { return {basis_, m_, true}; }

  StateVector apply(const StateVector& psi) const {
    if (!(psi.basis() == basis_)) throw Error(ErrorCode::basis_mismatch, "operator/state basis mismatch");
    return {basis_, m_ * psi.amplitudes()};
  }

 private:
  static void check_same(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (!(a.basis_ == b.basis_)) throw Error(ErrorCode::basis_mismatch, "operator basis mismatch");
  }

  BasisSpec basis_;
  Matrix m_;
  bool hermitian_ = false;
};

// Tensor embedding of a local operator; identity on the other three factors.
inline OperatorMatrix embed(const Matrix& local, Subsystem sub, const BasisSpec& basis) {
  const int d = basis.subsystem_dim(sub);
  if (local.rows() != d || local.cols() != d) {
    throw Error(ErrorCode::dimension_mismatch, "local operator dimension " +
                                                   std::to_string(local.rows()) +
                                                   " does not match subsystem dimension " +
                                                   std::to_string(d));
  }
  const auto n = static_cast<Eigen::Index>(basis.dim());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    const BasisLabel lc = basis.label(static_cast<std::size_t>(col));
    const int jc = basis.component(lc, sub);
    for (int ir = 0; ir < d; ++ir) {
      const cplx v = local(ir, jc);
      if (v == cplx{}) continue;
      BasisLabel lr = lc;
      switch (sub) {
        case Subsystem::qutrit1: lr.q1 = ir; break;
        case Subsystem::qutrit2: lr.q2 = ir; break;
        case Subsystem::cavity_a: lr.na = ir; break;
        case Subsystem::cavity_b: lr.nb = ir; break;
      }
      m(static_cast<Eigen::Index>(basis.index(lr)), col) = v;
    }
  }
  const bool herm = (local - local.adjoint()).cwiseAbs().maxCoeff() < 1e-14;
  return {basis, std::move(m), herm};
}

namespace local {

// |to><from| on a single qutrit.
inline Matrix transition(int to, int from) {
  Matrix m = Matrix::Zero(3, 3);
  m(to, from) = 1.0;
  return m;
}

inline Matrix projector(int level) { return transition(level, level); }

inline Matrix creation(int cutoff) {
  Matrix m = Matrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 0; n < cutoff; ++n) m(n + 1, n) = std::sqrt(static_cast<double>(n + 1));
  return m;
}

inline Matrix annihilation(int cutoff) { return creation(cutoff).adjoint(); }

inline Matrix number(int cutoff) {
  Matrix m = Matrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) m(n, n) = static_cast<double>(n);
  return m;
}

}  // namespace local

inline Subsystem qutrit(int which) {
  if (which != 1 && which != 2) throw Error(ErrorCode::invalid_argument, "qutrit index must be 1 or 2");
  return which == 1 ? Subsystem::qutrit1 : Subsystem::qutrit2;
}

inline Subsystem cavity_of(int which_qutrit) {
  return which_qutrit == 1 ? Subsystem::cavity_a : Subsystem::cavity_b;
}

inline double fidelity(const StateVector& psi, const StateVector& target) {
  if (!(psi.basis() == target.basis())) throw Error(ErrorCode::basis_mismatch, "fidelity: basis mismatch");
  return std::norm(target.amplitudes().dot(psi.amplitudes()));
}

struct PhaseFidelity {
  double fidelity = 0.0;
  double phase = 0.0;
};

// max over phi of |<target| exp(i phi Z) |psi>|^2 where Z projects onto
// `phase_subspace` (basis indices of the branch carrying the relative phase).
inline PhaseFidelity fidelity_up_to_phase(const StateVector& psi, const StateVector& target,
                                          const std::vector<std::size_t>& phase_subspace) {
  if (!(psi.basis() == target.basis())) {
    throw Error(ErrorCode::basis_mismatch, "fidelity_up_to_phase: basis mismatch");
  }
  std::vector<bool> in_sub(psi.dim(), false);
  for (std::size_t i : phase_subspace) {
    if (i >= psi.dim()) throw Error(ErrorCode::invalid_argument, "phase subspace index out of range");
    in_sub[i] = true;
  }
  cplx outside{}, inside{};
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const cplx term = std::conj(target.amplitudes()(k)) * psi.amplitudes()(k);
    (in_sub[i] ? inside : outside) += term;
  }
  const double a = std::abs(outside);
  const double b = std::abs(inside);
  double phi = 0.0;
  if (a > 0.0 && b > 0.0) {
    phi = std::remainder(std::arg(outside) - std::arg(inside), two_pi);
    if (std::abs(phi) < 1e-15) phi = 0.0;
  }
  return {(a + b) * (a + b), phi};
}

// Population in states where either cavity sits at the cutoff.
inline double top_fock_population(const StateVector& psi) {
  const BasisSpec& b = psi.basis();
  double p = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const BasisLabel l = b.label(i);
    if (l.na == b.cutoff() || l.nb == b.cutoff()) p += psi.population(i);
  }
  return p;
}

// Indices of basis states with the given qutrit levels (any photon numbers)
// or a specific label set.
inline std::vector<std::size_t> indices_of(const BasisSpec& basis,
                                           const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(basis.index(basis.parse_label(l)));
  return out;
}

}  // namespace noon
