#pragma once

// Stage sequencing for NOON generation.
//
// V-type sequence (levels g, e, a; g<->e carries photons):
//   excite  q1 g->a                              |g,g,0,0> -> |a,g,0,0>
//   Bell    |a,g> <-> |g,a>                        -> (|a,g> + |g,a>)/sqrt2
//   rounds  k = 0..N-2: q1 g->e, q2 g->e, swap q1-a and q2-b on rung k
//   final   q1 g->e, q2 g->e, q1 a->g, q2 a->g, swap both on rung N-1
// The final block clears the "a" markers before the last photon is emitted;
// the spectator branch sits at |g,0> of the emitting pair, which is dark.
//
// Ladder sequence (g, e, f):
//   excite q1 g->e, Bell |e,g> <-> |g,e>, rounds k = 0..N-2 of e->f drives and
//   f->e swaps, final e->g swaps on rung N-1.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noon/dynamics.hpp"
#include "noon/error.hpp"
#include "noon/hamiltonian.hpp"
#include "noon/pulse.hpp"
#include "noon/quantum_core.hpp"
#include "noon/sta.hpp"

namespace noon {

enum class Mode { sta, app, ro };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::sta: return "STA";
    case Mode::app: return "APP";
    case Mode::ro: return "RO";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "STA" || s == "sta") return Mode::sta;
  if (s == "APP" || s == "app") return Mode::app;
  if (s == "RO" || s == "ro") return Mode::ro;
  throw Error(ErrorCode::invalid_argument, "unknown mode '" + s + "'");
}

enum class StageKind { drive, exchange, swap };

// One driven two-level subspace.  Levels: drive lo->hi on `target`;
// exchange |lo,hi> <-> |hi,lo>; swap |hi,k> <-> |lo,k+1> on (target, cavity).
struct StageSpec {
  std::string name;
  StageKind kind = StageKind::drive;
  Mode mode = Mode::sta;
  int target = 1;
  int lo = Level::g;
  int hi = Level::e;
  Subsystem cavity = Subsystem::cavity_a;
  int rung = 0;
  PulsePair pulses{PulseShape(), PulseShape()};
  // Coupling already rescaled by 1/sqrt(k+1) on the physical line.
  bool rescale_rung = false;
  BasisLabel spectator{};
};

inline TwoLevelTransition stage_transition(const BasisSpec& basis, const StageSpec& s) {
  switch (s.kind) {
    case StageKind::drive: return qutrit_transition(basis, s.target, s.lo, s.hi, s.spectator);
    case StageKind::exchange: return exchange_transition(basis, s.lo, s.hi, s.spectator);
    case StageKind::swap: return swap_transition(basis, s.target, s.cavity, s.hi, s.lo, s.rung, s.spectator);
  }
  throw Error(ErrorCode::invalid_argument, "unknown stage kind");
}

// Pulses of the effective 2x2 problem.
inline PulsePair effective_pair(const StageSpec& s) {
  if (s.kind != StageKind::swap) return s.pulses;
  return {s.pulses.coupling.scaled(std::sqrt(static_cast<double>(s.rung + 1))), s.pulses.detuning};
}

// CD-free Hamiltonian; its instantaneous eigenvectors define the tracked branch.
inline StageHamiltonian build_bare(const BasisSpec& basis, const StageSpec& s) {
  const PulsePair p = effective_pair(s);
  return two_level_stage(basis, stage_transition(basis, s), p.coupling, nullptr, p.detuning, s.name);
}

// Coupling + detuning + CD quadrature in the original (unrotated) frame.
inline StageHamiltonian build_cd_corrected(const BasisSpec& basis, const StageSpec& s) {
  const PulsePair p = effective_pair(s);
  const CDSchedule cd = cd_amplitude(p);
  return two_level_stage(basis, stage_transition(basis, s), p.coupling, &cd.cd_amplitude, p.detuning, s.name);
}

inline RealizableFrame stage_frame(const StageSpec& s) {
  const PulsePair p = effective_pair(s);
  return realizable_frame(p.coupling, p.detuning, cd_amplitude(p));
}

inline StageHamiltonian build_stage(const BasisSpec& basis, const StageSpec& s) {
  const TwoLevelTransition tr = stage_transition(basis, s);
  const PulsePair p = effective_pair(s);
  switch (s.mode) {
    case Mode::sta:
      if (s.kind == StageKind::drive) return build_cd_corrected(basis, s);
      {
        const RealizableFrame f = stage_frame(s);
        return two_level_stage(basis, tr, f.rotated_coupling(), nullptr, f.rotated_detuning(), s.name);
      }
    case Mode::app: return two_level_stage(basis, tr, p.coupling, nullptr, p.detuning, s.name);
    case Mode::ro:
      return two_level_stage(basis, tr, p.coupling, nullptr, PulseShape::zero(p.window()), s.name);
  }
  throw Error(ErrorCode::invalid_argument, "unknown mode");
}

// APP drops the CD term (unrotated frame); RO keeps the envelope with zero detuning.
inline StageHamiltonian baseline_mode(const BasisSpec& basis, StageSpec s, Mode mode) {
  if (s.mode != Mode::sta) throw Error(ErrorCode::invalid_argument, "baseline_mode needs an STA stage");
  s.mode = mode;
  return build_stage(basis, s);
}

// ---- pulse parameter sets -------------------------------------------------

struct AeParams {
  double omega0 = two_pi * 0.060;
  double beta = two_pi * 0.080;
  double t0 = 1.0;
  double halfwidth = default_ae_halfwidth;  // window = +-halfwidth * t0
};

struct BellParams {
  double G0 = two_pi * 0.010;
  double Delta0 = two_pi * 0.030;
  double T0 = 5.0;
  double m = 1.25;
  double tau = 4.0;
  double start = -5.0;
  double end = 11.0;
};

// g'(t) = G1 sech(pi t / 2 T1), Delta(t) = (2 beta^2 t0 / pi) tanh(pi t / 2 T1)
struct SwapParams {
  double G1 = two_pi * 0.090;
  double beta = two_pi * 0.100;
  double T1 = 1.0;
  double t0 = 1.0;
  double halfwidth = default_ae_halfwidth;  // window = +-halfwidth * T1
};

inline PulsePair drive_pulses(const AeParams& p) { return ae_pair(p.omega0, p.beta, p.t0, p.halfwidth); }

inline PulsePair bell_pulses(const BellParams& p) {
  if (!(p.end > p.start)) throw Error(ErrorCode::invalid_argument, "Bell window end must exceed start");
  const Window w{p.start, p.end};
  return {PulseShape::gaussian(p.G0, p.tau, p.T0, w), PulseShape::gaussian(p.Delta0, -p.tau, p.m * p.T0, w)};
}

inline PulsePair swap_pulses(const SwapParams& p) {
  const Window w = symmetric_window(p.halfwidth * p.T1);
  return {PulseShape::ae_amplitude(p.G1, p.T1, w), PulseShape::ae_detuning(p.beta, p.t0, w, p.T1)};
}

inline StageSpec drive_spec(int target, int lo, int hi, const PulsePair& pulses, Mode mode, Topology topo) {
  StageSpec s;
  s.kind = StageKind::drive;
  s.mode = mode;
  s.target = target;
  s.lo = lo;
  s.hi = hi;
  s.pulses = pulses;
  s.name = "q" + std::to_string(target) + " " + level_char(topo, lo) + "->" + level_char(topo, hi);
  return s;
}

inline StageSpec exchange_spec(int x, int y, const PulsePair& pulses, Mode mode, Topology topo) {
  StageSpec s;
  s.kind = StageKind::exchange;
  s.mode = mode;
  s.lo = x;
  s.hi = y;
  s.pulses = pulses;
  s.name = std::string("exchange ") + level_char(topo, x) + level_char(topo, y) + "<->" + level_char(topo, y) +
           level_char(topo, x);
  return s;
}

inline StageSpec swap_spec(int target, int upper, int lower, int rung, const PulsePair& pulses, Mode mode,
                           Topology topo, bool rescale = false) {
  StageSpec s;
  s.kind = StageKind::swap;
  s.mode = mode;
  s.target = target;
  s.cavity = cavity_of(target);
  s.lo = lower;
  s.hi = upper;
  s.rung = rung;
  s.rescale_rung = rescale;
  s.pulses = pulses;
  s.name = "swap q" + std::to_string(target) + "-" + (target == 1 ? "a" : "b") + " " + level_char(topo, upper) +
           "," + std::to_string(rung) + "->" + level_char(topo, lower) + "," + std::to_string(rung + 1);
  return s;
}

// ---- single-stage presets (the three demonstration stages) ---------------

struct StagePreset {
  std::string name;
  Topology topology = Topology::vtype;
  int cutoff = 1;
  StageSpec spec;
  std::string initial;
  std::vector<std::pair<std::string, cplx>> target;
  std::vector<std::string> phase_labels;  // branch whose relative phase is free
};

inline StagePreset preset_excite(const AeParams& p = {}) {
  StagePreset s;
  s.name = "fig2a";
  s.spec = drive_spec(1, Level::g, Level::third, drive_pulses(p), Mode::sta, Topology::vtype);
  s.initial = "g,g,0,0";
  s.target = {{"a,g,0,0", 1.0}};
  return s;
}

inline StagePreset preset_bell(const BellParams& p = {}) {
  StagePreset s;
  s.name = "fig2b";
  s.spec = exchange_spec(Level::third, Level::g, bell_pulses(p), Mode::sta, Topology::vtype);
  s.initial = "a,g,0,0";
  s.target = {{"a,g,0,0", 1.0}, {"g,a,0,0", 1.0}};
  s.phase_labels = {"g,a,0,0"};
  return s;
}

inline StagePreset preset_swap(const SwapParams& p = {}, int rung = 0) {
  StagePreset s;
  s.name = "fig2c";
  s.cutoff = std::max(1, rung + 1);
  s.spec = swap_spec(1, Level::e, Level::g, rung, swap_pulses(p), Mode::sta, Topology::vtype);
  s.spec.spectator.q2 = Level::third;
  s.initial = "e,a," + std::to_string(rung) + ",0";
  s.target = {{"g,a," + std::to_string(rung + 1) + ",0", 1.0}};
  return s;
}

inline StagePreset stage_preset(const std::string& name) {
  if (name == "fig2a") return preset_excite();
  if (name == "fig2b") return preset_bell();
  if (name == "fig2c") return preset_swap();
  throw Error(ErrorCode::invalid_argument, "unknown stage preset '" + name + "'");
}

struct StageRun {
  EvolutionResult evolution;
  double fidelity = 0.0;
  double phase = 0.0;
};

inline StageRun run_preset(const StagePreset& p, double tol, double sample_dt = 0.0) {
  const BasisSpec basis(p.cutoff, p.topology);
  const StageHamiltonian h = build_stage(basis, p.spec);
  EvolveOptions opt;
  opt.tol = tol;
  opt.sample_dt = sample_dt;
  StageRun r{evolve(h, StateVector::basis_state(basis, p.initial), opt), 0.0, 0.0};
  const StateVector target = StateVector::superposition(basis, p.target);
  const PhaseFidelity f = fidelity_up_to_phase(r.evolution.final_state, target, indices_of(basis, p.phase_labels));
  r.fidelity = f.fidelity;
  r.phase = f.phase;
  return r;
}

// ---- full protocol -------------------------------------------------------

// Drive window for protocol stages, in units of t0 (sech tail residue ~1e-6).
inline constexpr double protocol_drive_halfwidth = 5.0;

struct ProtocolParams {
  AeParams drive{two_pi * 0.060, two_pi * 0.080, 1.0, protocol_drive_halfwidth};
  BellParams bell{};
  SwapParams swap{};
  Mode mode = Mode::sta;
  int cutoff = -1;  // < 0: N + 1
  bool simultaneous_arms = false;
  bool rescale_rungs = false;
  double leakage_limit = 1e-8;  // top-Fock population guard
};

struct ProtocolStage {
  std::string name;
  std::vector<StageSpec> parts;  // driven simultaneously, shared window

  Window window() const { return parts.front().pulses.window(); }
  std::vector<std::string> active_couplings() const {
    std::vector<std::string> out;
    for (const auto& p : parts) out.push_back(p.name);
    return out;
  }
};

struct ProtocolPlan {
  Topology topology = Topology::vtype;
  int target_N = 0;
  int cutoff = 1;
  double leakage_limit = 1e-8;
  std::vector<ProtocolStage> stages;

  double duration() const {
    double d = 0.0;
    for (const auto& s : stages) d += s.window().duration();
    return d;
  }
};

namespace detail {

inline void push_group(ProtocolPlan& plan, std::vector<StageSpec> parts, bool simultaneous) {
  if (simultaneous && parts.size() > 1) {
    std::string name;
    for (const auto& p : parts) name += (name.empty() ? "" : " + ") + p.name;
    plan.stages.push_back({name, std::move(parts)});
    return;
  }
  for (auto& p : parts) {
    std::string name = p.name;
    plan.stages.push_back({std::move(name), {std::move(p)}});
  }
}

}  // namespace detail

inline ProtocolPlan plan_noon(Topology topology, int N, const ProtocolParams& params = {}) {
  if (N < 0) throw Error(ErrorCode::invalid_argument, "N must be >= 0");
  ProtocolPlan plan;
  plan.topology = topology;
  plan.target_N = N;
  plan.cutoff = params.cutoff < 0 ? N + 1 : params.cutoff;
  plan.leakage_limit = params.leakage_limit;
  if (plan.cutoff < N) {
    throw Error(ErrorCode::cutoff_too_small,
                "cavity cutoff " + std::to_string(plan.cutoff) + " below target N=" + std::to_string(N));
  }
  if (N == 0) return plan;

  const Mode m = params.mode;
  const bool sim = params.simultaneous_arms;
  const PulsePair drive = drive_pulses(params.drive);
  const PulsePair swap = swap_pulses(params.swap);
  auto swap_pair = [&](int rung) {
    if (!params.rescale_rungs) return swap;
    return PulsePair{swap.coupling.scaled(1.0 / std::sqrt(static_cast<double>(rung + 1))), swap.detuning};
  };
  using L = Level;

  if (topology == Topology::vtype) {
    detail::push_group(plan, {drive_spec(1, L::g, L::third, drive, m, topology)}, false);
    {
      StageSpec bell = exchange_spec(L::third, L::g, bell_pulses(params.bell), m, topology);
      plan.stages.push_back({"Bell " + bell.name, {bell}});
    }
    for (int k = 0; k < N - 1; ++k) {
      detail::push_group(plan,
                         {drive_spec(1, L::g, L::e, drive, m, topology), drive_spec(2, L::g, L::e, drive, m, topology)},
                         sim);
      detail::push_group(plan,
                         {swap_spec(1, L::e, L::g, k, swap_pair(k), m, topology, params.rescale_rungs),
                          swap_spec(2, L::e, L::g, k, swap_pair(k), m, topology, params.rescale_rungs)},
                         sim);
    }
    const int k = N - 1;
    detail::push_group(plan,
                       {drive_spec(1, L::g, L::e, drive, m, topology), drive_spec(2, L::g, L::e, drive, m, topology)},
                       sim);
    detail::push_group(
        plan,
        {drive_spec(1, L::third, L::g, drive, m, topology), drive_spec(2, L::third, L::g, drive, m, topology)}, sim);
    detail::push_group(plan,
                       {swap_spec(1, L::e, L::g, k, swap_pair(k), m, topology, params.rescale_rungs),
                        swap_spec(2, L::e, L::g, k, swap_pair(k), m, topology, params.rescale_rungs)},
                       sim);
  } else {
    detail::push_group(plan, {drive_spec(1, L::g, L::e, drive, m, topology)}, false);
    {
      StageSpec bell = exchange_spec(L::e, L::g, bell_pulses(params.bell), m, topology);
      plan.stages.push_back({"Bell " + bell.name, {bell}});
    }
    for (int k = 0; k < N - 1; ++k) {
      // both qutrits e->f at once
      detail::push_group(
          plan, {drive_spec(1, L::e, L::third, drive, m, topology), drive_spec(2, L::e, L::third, drive, m, topology)},
          true);
      detail::push_group(plan,
                         {swap_spec(1, L::third, L::e, k, swap_pair(k), m, topology, params.rescale_rungs),
                          swap_spec(2, L::third, L::e, k, swap_pair(k), m, topology, params.rescale_rungs)},
                         sim);
    }
    const int k = N - 1;
    detail::push_group(plan,
                       {swap_spec(1, L::e, L::g, k, swap_pair(k), m, topology, params.rescale_rungs),
                        swap_spec(2, L::e, L::g, k, swap_pair(k), m, topology, params.rescale_rungs)},
                       sim);
  }
  for (const auto& st : plan.stages) {
    for (const auto& p : st.parts) {
      if (!(p.pulses.window() == st.window())) {
        throw Error(ErrorCode::invalid_argument, "simultaneous stage parts need a common window: " + st.name);
      }
    }
  }
  return plan;
}

inline void set_mode(ProtocolPlan& plan, Mode m) {
  for (auto& st : plan.stages) {
    for (auto& p : st.parts) p.mode = m;
  }
}

inline StageHamiltonian build_protocol_stage(const BasisSpec& basis, const ProtocolStage& st) {
  StageHamiltonian h = build_stage(basis, st.parts.front());
  for (std::size_t i = 1; i < st.parts.size(); ++i) h = h + build_stage(basis, st.parts[i]);
  return h;
}

// Ideal image of the state under the intended transitions, branch by branch.
struct IdealBranch {
  BasisLabel label;
  cplx amplitude;
};

namespace detail {

inline int& level_ref(BasisLabel& l, int which) { return which == 1 ? l.q1 : l.q2; }
inline int& photons_ref(BasisLabel& l, Subsystem cav) { return cav == Subsystem::cavity_a ? l.na : l.nb; }

inline std::vector<IdealBranch> advance(const std::vector<IdealBranch>& in, const StageSpec& s) {
  std::vector<IdealBranch> out;
  for (IdealBranch b : in) {
    switch (s.kind) {
      case StageKind::drive: {
        int& q = level_ref(b.label, s.target);
        if (q == s.lo) {
          q = s.hi;
        } else if (q == s.hi) {
          q = s.lo;
        }
        out.push_back(b);
        break;
      }
      case StageKind::exchange: {
        if (b.label.q1 == s.lo && b.label.q2 == s.hi) {
          IdealBranch other = b;
          std::swap(other.label.q1, other.label.q2);
          b.amplitude /= std::sqrt(2.0);
          other.amplitude /= std::sqrt(2.0);
          out.push_back(b);
          out.push_back(other);
        } else {
          out.push_back(b);
        }
        break;
      }
      case StageKind::swap: {
        int& q = level_ref(b.label, s.target);
        int& n = photons_ref(b.label, s.cavity);
        if (q == s.hi && n == s.rung) {
          q = s.lo;
          n = s.rung + 1;
        } else if (q == s.lo && n == s.rung + 1) {
          q = s.hi;
          n = s.rung;
        }
        out.push_back(b);
        break;
      }
    }
  }
  return out;
}

inline StateVector ideal_state(const BasisSpec& basis, const std::vector<IdealBranch>& branches) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dim()));
  for (const auto& b : branches) v(static_cast<Eigen::Index>(basis.index(b.label))) += b.amplitude;
  return {basis, v / v.norm()};
}

inline std::vector<std::size_t> phase_branch(const BasisSpec& basis, const std::vector<IdealBranch>& branches) {
  if (branches.size() < 2) return {};
  return {basis.index(branches[1].label)};
}

}  // namespace detail

inline StateVector noon_target(const BasisSpec& basis, int N) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dim()));
  v(static_cast<Eigen::Index>(basis.index({Level::g, Level::g, N, 0}))) += 1.0;
  v(static_cast<Eigen::Index>(basis.index({Level::g, Level::g, 0, N}))) += 1.0;
  return {basis, v / v.norm()};
}

struct StageRecord {
  std::string name;
  std::string mode;
  double t_start = 0.0;
  double t_end = 0.0;
  double fidelity = 0.0;  // to the ideal post-stage state, up to the branch phase
  double phase = 0.0;
  double leakage = 0.0;   // population outside the ideal branches
  double top_fock = 0.0;
  double norm_drift = 0.0;
  std::size_t steps = 0;
};

struct ProtocolResult {
  StateVector final_state;
  std::vector<StageRecord> stages;
  double fidelity = 0.0;
  double phase = 0.0;
  double duration = 0.0;
  std::optional<Trajectory> trajectory;  // global time axis
};

struct RunOptions {
  double tol = 1e-10;
  double sample_dt = 0.0;
  std::optional<StateVector> initial;  // default |g,g,0,0>
  std::size_t first_stage = 0;
};

inline ProtocolResult run_protocol(const ProtocolPlan& plan, const RunOptions& opt) {
  const BasisSpec basis(plan.cutoff, plan.topology);
  StateVector psi = opt.initial ? *opt.initial : StateVector::basis_state(basis, "g,g,0,0");
  if (!(psi.basis() == basis)) throw Error(ErrorCode::basis_mismatch, "initial state basis differs from plan");

  // ideal branches: replay the skipped stages on |g,g,0,0>
  std::vector<IdealBranch> ideal{{BasisLabel{}, 1.0}};
  for (std::size_t i = 0; i < std::min(opt.first_stage, plan.stages.size()); ++i) {
    for (const auto& p : plan.stages[i].parts) ideal = detail::advance(ideal, p);
  }

  ProtocolResult res{psi, {}, 0.0, 0.0, 0.0, std::nullopt};
  if (opt.sample_dt > 0.0) res.trajectory.emplace();
  double clock = 0.0;
  for (std::size_t i = opt.first_stage; i < plan.stages.size(); ++i) {
    const ProtocolStage& st = plan.stages[i];
    const StageHamiltonian h = build_protocol_stage(basis, st);
    EvolveOptions eo;
    eo.tol = opt.tol;
    eo.sample_dt = opt.sample_dt;
    EvolutionResult ev = evolve(h, psi, eo);
    psi = ev.final_state;
    for (const auto& p : st.parts) ideal = detail::advance(ideal, p);

    StageRecord rec;
    rec.name = st.name;
    rec.mode = to_string(st.parts.front().mode);
    rec.t_start = clock;
    rec.t_end = clock + h.window().duration();
    const PhaseFidelity f =
        fidelity_up_to_phase(psi, detail::ideal_state(basis, ideal), detail::phase_branch(basis, ideal));
    rec.fidelity = std::min(1.0, f.fidelity);
    rec.phase = f.phase;
    double inside = 0.0;
    for (const auto& b : ideal) inside += psi.population(basis.index(b.label));
    rec.leakage = std::max(0.0, 1.0 - inside);
    rec.top_fock = top_fock_population(psi);
    rec.norm_drift = ev.norm_drift;
    rec.steps = ev.step_count;
    if (res.trajectory && ev.trajectory) {
      const double shift = clock - h.window().start;
      const std::size_t skip = res.trajectory->size() == 0 ? 0 : 1;
      for (std::size_t s = skip; s < ev.trajectory->size(); ++s) {
        res.trajectory->times.push_back(ev.trajectory->times[s] + shift);
        res.trajectory->states.push_back(ev.trajectory->states[s]);
      }
    }
    clock = rec.t_end;
    res.stages.push_back(rec);
    if (rec.top_fock > plan.leakage_limit) {
      throw Error(ErrorCode::leakage_guard, "top Fock population " + format_number(rec.top_fock) + " after stage '" +
                                                st.name + "' exceeds " + format_number(plan.leakage_limit));
    }
  }
  res.final_state = psi;
  res.duration = clock;
  const StateVector target = noon_target(basis, plan.target_N);
  const PhaseFidelity f =
      plan.target_N == 0
          ? PhaseFidelity{fidelity(psi, target), 0.0}
          : fidelity_up_to_phase(psi, target, {basis.index({Level::g, Level::g, 0, plan.target_N})});
  res.fidelity = std::min(1.0, f.fidelity);
  res.phase = f.phase;
  return res;
}

inline ProtocolResult run_protocol(const ProtocolPlan& plan, double tol) {
  RunOptions o;
  o.tol = tol;
  return run_protocol(plan, o);
}

}  // namespace noon
