#pragma once

// Time-dependent stage Hamiltonians H(t) = sum_k f_k(t) O_k on the composite
// space, expressed in the interaction picture (detunings carry the frequency
// information; bare level energies only enter through static_hamiltonian).

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noon/error.hpp"
#include "noon/pulse.hpp"
#include "noon/quantum_core.hpp"
#include "noon/sta.hpp"

namespace noon {

struct HamiltonianTerm {
  PulseShape coefficient;
  OperatorMatrix op;
};

class StageHamiltonian {
 public:
  StageHamiltonian(BasisSpec basis, Window window, std::string name = {})
      : basis_(basis), window_(window), name_(std::move(name)) {}

  void add_term(PulseShape coefficient, OperatorMatrix op) {
    if (!(op.basis() == basis_)) throw Error(ErrorCode::basis_mismatch, "term basis mismatch");
    if (!op.hermitian()) throw Error(ErrorCode::invalid_argument, "stage terms must be hermitian operators");
    Sparse s;
    const Matrix& m = op.matrix();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (m(r, c) != cplx{}) s.push_back({static_cast<int>(r), static_cast<int>(c), m(r, c)});
      }
    }
    sparse_.push_back(std::move(s));
    terms_.push_back({std::move(coefficient), std::move(op)});
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  const Window& window() const noexcept { return window_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<HamiltonianTerm>& terms() const noexcept { return terms_; }
  std::size_t dim() const noexcept { return basis_.dim(); }

  Matrix at(double t) const {
    const auto n = static_cast<Eigen::Index>(dim());
    Matrix h = Matrix::Zero(n, n);
    for (const auto& term : terms_) {
      const double c = term.coefficient.value(t);
      if (c != 0.0) h += c * term.op.matrix();
    }
    return h;
  }

  // out = H(t) psi, using the nonzero pattern of each term.
  void apply(double t, const Vector& psi, Vector& out) const {
    out.setZero(psi.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const double c = terms_[k].coefficient.value(t);
      if (c == 0.0) continue;
      for (const auto& e : sparse_[k]) out(e.row) += c * e.value * psi(e.col);
    }
  }

  bool is_zero() const {
    for (const auto& term : terms_) {
      if (!term.coefficient.is_zero()) return false;
    }
    return true;
  }

  // Evolution under the result undoes this stage: H'(s) = -H(start + end - s).
  StageHamiltonian reversed() const {
    StageHamiltonian r(basis_, window_, name_ + "^-1");
    for (const auto& term : terms_) {
      r.add_term(term.coefficient.with_window(window_).time_reversed().scaled(-1.0), term.op);
    }
    return r;
  }

  // Sum of two stages sharing a window (simultaneous driving).
  friend StageHamiltonian operator+(const StageHamiltonian& a, const StageHamiltonian& b) {
    if (!(a.basis_ == b.basis_)) throw Error(ErrorCode::basis_mismatch, "stage basis mismatch");
    if (!(a.window_ == b.window_)) throw Error(ErrorCode::invalid_argument, "simultaneous stages need equal windows");
    StageHamiltonian s(a.basis_, a.window_, a.name_ + "+" + b.name_);
    for (const auto& t : a.terms_) s.add_term(t.coefficient, t.op);
    for (const auto& t : b.terms_) s.add_term(t.coefficient, t.op);
    return s;
  }

 private:
  struct Entry {
    int row;
    int col;
    cplx value;
  };
  using Sparse = std::vector<Entry>;

  BasisSpec basis_;
  Window window_;
  std::string name_;
  std::vector<HamiltonianTerm> terms_;
  std::vector<Sparse> sparse_;
};

// A driven two-dimensional subspace: X = raise maps the lo state to the hi
// state (times `rung_factor` on a photon ladder); hi_projector carries the
// detuning.
struct TwoLevelTransition {
  OperatorMatrix raise;
  OperatorMatrix hi_projector;
  double rung_factor = 1.0;
  std::size_t lo_index = 0;
  std::size_t hi_index = 0;
  std::string name;

  OperatorMatrix x_operator() const { return (raise + raise.adjoint()).as_hermitian(); }
  OperatorMatrix y_operator() const {
    return (cplx{0.0, 1.0} * raise - cplx{0.0, 1.0} * raise.adjoint()).as_hermitian();
  }
};

inline bool level_pair_driven(Topology topo, int lo, int hi) {
  if (lo == hi) return false;
  const int a = std::min(lo, hi), b = std::max(lo, hi);
  if (topo == Topology::ladder) return (a == Level::g && b == Level::e) || (a == Level::e && b == Level::third);
  return (a == Level::g && b == Level::e) || (a == Level::g && b == Level::third);
}

// Single-qutrit transition |lo> -> |hi>, with the spectator labels used to
// pick the tracked 2x2 block.
inline TwoLevelTransition qutrit_transition(const BasisSpec& basis, int which, int lo, int hi,
                                            BasisLabel spectator = {}) {
  if (!level_pair_driven(basis.topology(), lo, hi)) {
    throw Error(ErrorCode::invalid_argument,
                std::string("level pair ") + level_char(basis.topology(), lo) + "," +
                    level_char(basis.topology(), hi) + " is not driven in this topology");
  }
  const Subsystem q = qutrit(which);
  BasisLabel l_lo = spectator, l_hi = spectator;
  (which == 1 ? l_lo.q1 : l_lo.q2) = lo;
  (which == 1 ? l_hi.q1 : l_hi.q2) = hi;
  return {embed(local::transition(hi, lo), q, basis),
          embed(local::projector(hi), q, basis),
          1.0,
          basis.index(l_lo),
          basis.index(l_hi),
          "q" + std::to_string(which) + ":" + level_char(basis.topology(), lo) + "->" +
              level_char(basis.topology(), hi)};
}

// Exchange between |x,y> (lo) and |y,x> (hi) of the two qutrits.
inline TwoLevelTransition exchange_transition(const BasisSpec& basis, int x, int y,
                                              BasisLabel cavities = {}) {
  if (x == y || x < 0 || x > 2 || y < 0 || y > 2) {
    throw Error(ErrorCode::invalid_argument, "exchange needs two distinct qutrit levels");
  }
  const OperatorMatrix raise = embed(local::transition(y, x), Subsystem::qutrit1, basis) *
                               embed(local::transition(x, y), Subsystem::qutrit2, basis);
  const OperatorMatrix proj = (embed(local::projector(y), Subsystem::qutrit1, basis) *
                               embed(local::projector(x), Subsystem::qutrit2, basis))
                                  .as_hermitian();
  BasisLabel lo = cavities, hi = cavities;
  lo.q1 = x;
  lo.q2 = y;
  hi.q1 = y;
  hi.q2 = x;
  const Topology t = basis.topology();
  return {raise, proj, 1.0, basis.index(lo), basis.index(hi),
          std::string("exchange ") + level_char(t, x) + level_char(t, y) + "<->" + level_char(t, y) +
              level_char(t, x)};
}

// Jaynes-Cummings rung: |upper, k> (hi) <-> |lower, k+1> (lo) of one qutrit
// and one cavity; the raise operator is |upper><lower| (x) a.
inline TwoLevelTransition swap_transition(const BasisSpec& basis, int which, Subsystem cavity, int upper,
                                          int lower, int rung, BasisLabel spectator = {}) {
  if (cavity != Subsystem::cavity_a && cavity != Subsystem::cavity_b) {
    throw Error(ErrorCode::invalid_argument, "swap target must be a cavity");
  }
  if (!level_pair_driven(basis.topology(), lower, upper)) {
    throw Error(ErrorCode::invalid_argument, "swap level pair is not coupled in this topology");
  }
  if (rung < 0 || basis.cutoff() <= rung) {
    throw Error(ErrorCode::cutoff_too_small, "cavity cutoff " + std::to_string(basis.cutoff()) +
                                                 " too small for rung " + std::to_string(rung));
  }
  const Subsystem q = qutrit(which);
  const OperatorMatrix raise = embed(local::transition(upper, lower), q, basis) *
                               embed(local::annihilation(basis.cutoff()), cavity, basis);
  BasisLabel hi = spectator, lo = spectator;
  (which == 1 ? hi.q1 : hi.q2) = upper;
  (which == 1 ? lo.q1 : lo.q2) = lower;
  (cavity == Subsystem::cavity_a ? hi.na : hi.nb) = rung;
  (cavity == Subsystem::cavity_a ? lo.na : lo.nb) = rung + 1;
  const Topology t = basis.topology();
  return {raise,
          embed(local::projector(upper), q, basis),
          std::sqrt(static_cast<double>(rung + 1)),
          basis.index(lo),
          basis.index(hi),
          "q" + std::to_string(which) + "-" + (cavity == Subsystem::cavity_a ? "a" : "b") + " swap " +
              level_char(t, upper) + "," + std::to_string(rung) + "->" + level_char(t, lower) + "," +
              std::to_string(rung + 1)};
}

// 1/2 [Omega X + cd Y] + Delta P_hi, with X, Y scaled by 1/rung_factor so
// that the pulses describe the effective 2x2 coupling.
inline StageHamiltonian two_level_stage(const BasisSpec& basis, const TwoLevelTransition& tr,
                                        const PulseShape& coupling, const PulseShape* cd,
                                        const PulseShape& detuning, const std::string& name) {
  StageHamiltonian h(basis, coupling.window(), name.empty() ? tr.name : name);
  const double half = 0.5 / tr.rung_factor;
  h.add_term(coupling.scaled(half), tr.x_operator());
  if (cd != nullptr) h.add_term(cd->scaled(half), tr.y_operator());
  h.add_term(detuning, tr.hi_projector);
  return h;
}

// Direct drive with the CD quadrature on one qutrit.
inline StageHamiltonian stage_qutrit_drive(const BasisSpec& basis, int target, std::pair<int, int> levels,
                                           const PulsePair& pair, const CDSchedule& cd) {
  const TwoLevelTransition tr = qutrit_transition(basis, target, levels.first, levels.second);
  return two_level_stage(basis, tr, pair.coupling, &cd.cd_amplitude, pair.detuning, tr.name);
}

// Exchange in the realizable frame: J_s (|x,y><y,x| + h.c.)/2 + Delta_s |y,x><y,x|.
inline StageHamiltonian stage_qutrit_qutrit(const BasisSpec& basis, const RealizableFrame& frame,
                                            std::pair<int, int> levels) {
  const TwoLevelTransition tr = exchange_transition(basis, levels.first, levels.second);
  return two_level_stage(basis, tr, frame.rotated_coupling(), nullptr, frame.rotated_detuning(), tr.name);
}

// Realizable-frame swap; `frame` must be built from the effective coupling
// g'(t) * sqrt(k+1) of the targeted rung.
inline StageHamiltonian stage_swap(const BasisSpec& basis, int target, Subsystem cavity,
                                   const RealizableFrame& frame, int photon_sector) {
  const int upper = basis.topology() == Topology::ladder ? Level::third : Level::e;
  const int lower = basis.topology() == Topology::ladder ? Level::e : Level::g;
  const TwoLevelTransition tr = swap_transition(basis, target, cavity, upper, lower, photon_sector);
  return two_level_stage(basis, tr, frame.rotated_coupling(), nullptr, frame.rotated_detuning(), tr.name);
}

// Always-on lab-frame Hamiltonian.  Couplings left empty are off.
struct SystemConfig {
  Topology topology = Topology::vtype;
  int cutoff = 1;
  std::array<std::array<double, 3>, 2> level_energy{};  // [qutrit][g,e,third], rad/ns
  double omega_a = 0.0;
  double omega_b = 0.0;
  std::array<std::optional<PulseShape>, 2> g;        // g <-> e with own cavity
  std::array<std::optional<PulseShape>, 2> g_prime;  // e <-> f (ladder) or g <-> a (vtype)
  std::optional<PulseShape> g12;                     // |g,e><e,g| (ladder) or |g,a><a,g| (vtype)
  std::optional<PulseShape> g12_prime;               // |e,f><f,e| (ladder) or |e,a><a,e| (vtype)
  Window window{0.0, 0.0};
};

inline OperatorMatrix excitation_number(const BasisSpec& basis) {
  const auto n = static_cast<Eigen::Index>(basis.dim());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const BasisLabel l = basis.label(static_cast<std::size_t>(i));
    m(i, i) = level_excitations(basis.topology(), l.q1) + level_excitations(basis.topology(), l.q2) + l.na +
              l.nb;
  }
  return {basis, std::move(m), true};
}

inline StageHamiltonian static_hamiltonian(const SystemConfig& cfg) {
  const BasisSpec basis(cfg.cutoff, cfg.topology);
  StageHamiltonian h(basis, cfg.window, "static");
  const auto n = static_cast<Eigen::Index>(basis.dim());
  Matrix diag = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const BasisLabel l = basis.label(static_cast<std::size_t>(i));
    diag(i, i) = cfg.level_energy[0][static_cast<std::size_t>(l.q1)] +
                 cfg.level_energy[1][static_cast<std::size_t>(l.q2)] + cfg.omega_a * l.na + cfg.omega_b * l.nb;
  }
  h.add_term(PulseShape::constant(1.0, cfg.window), OperatorMatrix(basis, std::move(diag), true));

  const bool ladder = cfg.topology == Topology::ladder;
  for (int q = 1; q <= 2; ++q) {
    const Subsystem cav = cavity_of(q);
    const auto& gq = cfg.g[static_cast<std::size_t>(q - 1)];
    if (gq) {
      // |g><e| a^+ + h.c.
      const OperatorMatrix op = embed(local::transition(Level::g, Level::e), qutrit(q), basis) *
                                embed(local::creation(cfg.cutoff), cav, basis);
      h.add_term(*gq, (op + op.adjoint()).as_hermitian());
    }
    const auto& gp = cfg.g_prime[static_cast<std::size_t>(q - 1)];
    if (gp) {
      const int lower = ladder ? Level::e : Level::g;
      const OperatorMatrix op = embed(local::transition(lower, Level::third), qutrit(q), basis) *
                                embed(local::creation(cfg.cutoff), cav, basis);
      h.add_term(*gp, (op + op.adjoint()).as_hermitian());
    }
  }
  if (cfg.g12) {
    const int x = ladder ? Level::e : Level::third;
    const TwoLevelTransition tr = exchange_transition(basis, x, Level::g);
    h.add_term(*cfg.g12, tr.x_operator());
  }
  if (cfg.g12_prime) {
    const TwoLevelTransition tr = exchange_transition(basis, Level::third, Level::e);
    h.add_term(*cfg.g12_prime, tr.x_operator());
  }
  return h;
}

}  // namespace noon
