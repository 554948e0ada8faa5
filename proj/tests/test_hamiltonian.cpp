#include <gtest/gtest.h>

#include <random>

#include "noon/dynamics.hpp"
#include "noon/hamiltonian.hpp"
#include "noon/protocol.hpp"

using namespace noon;

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<double> sample_times(const Window& w, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(w.start, w.end);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& t : out) t = u(rng);
  return out;
}

}  // namespace

TEST(Stage, ZeroPulsesGiveZeroOperator) {
  const BasisSpec b(1, Topology::vtype);
  const Window w{-2, 2};
  const auto tr = qutrit_transition(b, 1, Level::g, Level::third);
  const PulseShape z = PulseShape::zero(w);
  const auto h = two_level_stage(b, tr, z, &z, z, "");
  EXPECT_TRUE(h.is_zero());
  for (double t : {-1.0, 0.0, 1.5}) EXPECT_EQ(max_abs(h.at(t)), 0.0);

  const auto frame = realizable_frame(z, z, {z});
  EXPECT_EQ(max_abs(stage_qutrit_qutrit(b, frame, {Level::third, Level::g}).at(0.3)), 0.0);
  EXPECT_EQ(max_abs(stage_swap(b, 1, Subsystem::cavity_a, frame, 0).at(0.3)), 0.0);
}

TEST(Stage, DriveMatrixElements) {
  const BasisSpec b(1, Topology::vtype);
  const PulsePair p = ae_pair(two_pi * 0.06, two_pi * 0.08, 1.0);
  const CDSchedule cd = cd_amplitude(p);
  const auto h = stage_qutrit_drive(b, 1, {Level::g, Level::third}, p, cd);
  const auto lo = b.index(b.parse_label("g,e,1,0")), hi = b.index(b.parse_label("a,e,1,0"));
  for (double t : {-1.3, 0.2, 2.4}) {
    const Matrix m = h.at(t);
    EXPECT_NEAR(std::abs(m(hi, lo) - cplx(p.coupling.value(t), cd.cd_amplitude.value(t)) / 2.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(m(hi, hi) - p.detuning.value(t)), 0.0, 1e-15);
    EXPECT_EQ(m(lo, lo), cplx{});
  }
}

TEST(Stage, HermitianAtRandomTimes) {
  std::vector<std::pair<std::string, StageHamiltonian>> stages;
  for (const StagePreset& p : {preset_excite(), preset_bell(), preset_swap(SwapParams{}, 1)}) {
    stages.emplace_back(p.name, build_stage(BasisSpec(p.cutoff, p.topology), p.spec));
  }
  const auto plan = plan_noon(Topology::ladder, 2);
  const BasisSpec lb(plan.cutoff, Topology::ladder);
  for (const auto& st : plan.stages) stages.emplace_back(st.name, build_protocol_stage(lb, st));
  for (const auto& [name, h] : stages) {
    for (double t : sample_times(h.window(), 50, 3)) {
      const Matrix m = h.at(t);
      EXPECT_LT(max_abs(m - m.adjoint()), 1e-12) << name;
    }
  }
}

TEST(Stage, ExchangeElementSymmetric) {
  const BasisSpec b(1, Topology::vtype);
  const auto h = build_stage(b, preset_bell().spec);
  const auto x = b.index(b.parse_label("a,g,0,0")), y = b.index(b.parse_label("g,a,0,0"));
  for (double t : {-3.0, 3.0, 9.0}) {
    const Matrix m = h.at(t);
    EXPECT_EQ(m(x, y), std::conj(m(y, x)));
    EXPECT_EQ(m(x, y).imag(), 0.0);
    EXPECT_GT(m(x, y).real(), 0.0);
  }
}

TEST(Stage, SwapRungEnhancement) {
  const BasisSpec b(3, Topology::vtype);
  for (int k = 0; k < 3; ++k) {
    const auto tr = swap_transition(b, 2, Subsystem::cavity_b, Level::e, Level::g, k);
    EXPECT_DOUBLE_EQ(tr.rung_factor, std::sqrt(k + 1.0));
    EXPECT_NEAR(tr.raise.matrix()(tr.hi_index, tr.lo_index).real(), std::sqrt(k + 1.0), 1e-15);
    EXPECT_EQ(b.label_text(tr.hi_index), "g,e,0," + std::to_string(k));
    EXPECT_EQ(b.label_text(tr.lo_index), "g,g,0," + std::to_string(k + 1));
  }
  // a physical coupling g' drives rung k with g' sqrt(k+1)
  const auto g1 = PulseShape::constant(0.4, {0, 1});
  for (int k = 0; k < 3; ++k) {
    StageSpec s = swap_spec(1, Level::e, Level::g, k, PulsePair(g1, PulseShape::constant(0.1, {0, 1})), Mode::app,
                            Topology::vtype);
    const auto h = build_stage(b, s);
    const auto tr = stage_transition(b, s);
    EXPECT_NEAR(h.at(0.5)(tr.hi_index, tr.lo_index).real(), 0.2 * std::sqrt(k + 1.0), 1e-15);
  }
}

TEST(Stage, SwapCutoffTooSmall) {
  const BasisSpec b(1, Topology::vtype);
  try {
    swap_transition(b, 1, Subsystem::cavity_a, Level::e, Level::g, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cutoff_too_small);
  }
}

TEST(Stage, UndrivenLevelPairs) {
  const BasisSpec v(1, Topology::vtype), l(1, Topology::ladder);
  EXPECT_THROW(qutrit_transition(v, 1, Level::e, Level::third), Error);
  EXPECT_THROW(qutrit_transition(l, 1, Level::g, Level::third), Error);
  EXPECT_NO_THROW(qutrit_transition(l, 2, Level::e, Level::third));
  EXPECT_THROW(exchange_transition(v, Level::g, Level::g), Error);
  EXPECT_THROW(swap_transition(v, 1, Subsystem::cavity_a, Level::third, Level::e, 0), Error);
}

TEST(Stage, SumRequiresSharedWindow) {
  const BasisSpec b(1, Topology::vtype);
  const auto a = build_stage(b, drive_spec(1, Level::g, Level::e, ae_pair(1, 1, 1, 4), Mode::app, Topology::vtype));
  const auto c = build_stage(b, drive_spec(2, Level::g, Level::e, ae_pair(1, 1, 1, 5), Mode::app, Topology::vtype));
  EXPECT_THROW(a + c, Error);
  const auto d = build_stage(b, drive_spec(2, Level::g, Level::e, ae_pair(1, 1, 1, 4), Mode::app, Topology::vtype));
  const auto s = a + d;
  EXPECT_LT(max_abs(s.at(0.7) - a.at(0.7) - d.at(0.7)), 1e-15);
}

TEST(Static, CouplingsOffIsDiagonal) {
  SystemConfig cfg;
  cfg.cutoff = 2;
  cfg.level_energy = {{{0.0, 31.0, 33.0}, {0.0, 30.0, 34.0}}};
  cfg.omega_a = 40.0;
  cfg.omega_b = 41.0;
  cfg.window = {0, 1};
  const auto h = static_hamiltonian(cfg);
  const Matrix m = h.at(0.5);
  EXPECT_LT(max_abs(m - Matrix(m.diagonal().asDiagonal())), 1e-15);
  const BasisSpec b(2, Topology::vtype);
  EXPECT_DOUBLE_EQ(m(b.index(b.parse_label("g,g,1,0")), b.index(b.parse_label("g,g,1,0"))).real(), 40.0);
  EXPECT_DOUBLE_EQ(m(b.index(b.parse_label("a,e,1,2")), b.index(b.parse_label("a,e,1,2"))).real(),
                   33.0 + 30.0 + 40.0 + 2 * 41.0);
}

TEST(Static, ExchangeCouplingsConserveExcitations) {
  for (auto topo : {Topology::vtype, Topology::ladder}) {
    SystemConfig cfg;
    cfg.topology = topo;
    cfg.cutoff = 2;
    cfg.level_energy = {{{0.0, 31.0, 60.0}, {0.0, 30.0, 61.0}}};
    cfg.omega_a = 29.0;
    cfg.omega_b = 28.0;
    cfg.window = {0, 1};
    cfg.g = {PulseShape::constant(0.1, cfg.window), PulseShape::constant(0.2, cfg.window)};
    cfg.g_prime = {PulseShape::constant(0.3, cfg.window), PulseShape::constant(0.4, cfg.window)};
    cfg.g12 = PulseShape::constant(0.05, cfg.window);
    cfg.g12_prime = PulseShape::constant(0.07, cfg.window);
    const auto h = static_hamiltonian(cfg);
    const Matrix n = excitation_number(BasisSpec(2, topo)).matrix();
    const Matrix m = h.at(0.5);
    EXPECT_LT(max_abs(m * n - n * m), 1e-10);
    EXPECT_GT(max_abs(m - Matrix(m.diagonal().asDiagonal())), 0.0);
  }
}

TEST(Stage, ExchangeStagesConserveExcitations) {
  for (auto topo : {Topology::vtype, Topology::ladder}) {
    const auto plan = plan_noon(topo, 3);
    const BasisSpec b(plan.cutoff, topo);
    const Matrix n = excitation_number(b).matrix();
    int checked = 0;
    for (const auto& st : plan.stages) {
      if (st.parts.front().kind == StageKind::drive) continue;
      const auto h = build_protocol_stage(b, st);
      for (double t : sample_times(h.window(), 10, 9)) {
        const Matrix m = h.at(t);
        EXPECT_LT(max_abs(m * n - n * m), 1e-10) << st.name;
      }
      ++checked;
    }
    EXPECT_GE(checked, 4);
  }
}

TEST(Stage, IdleSubsystemsUntouched) {
  // drive on qutrit 1 only: qutrit 2 and cavity populations stay fixed
  const BasisSpec b(1, Topology::vtype);
  const auto h = build_stage(b, preset_excite().spec);
  const auto psi0 = StateVector::superposition(
      b, {{"g,g,0,0", 0.6}, {"g,a,1,0", cplx(0, 0.5)}, {"e,e,0,1", 0.4}, {"a,g,1,1", 0.3}});
  const auto r = evolve(h, psi0, 1e-10);
  auto reduced = [&](const StateVector& s) {
    std::vector<double> p(3 + 4, 0.0);
    for (std::size_t i = 0; i < b.dim(); ++i) {
      const BasisLabel l = b.label(i);
      p[static_cast<std::size_t>(l.q2)] += s.population(i);
      p[3 + static_cast<std::size_t>(l.na * 2 + l.nb)] += s.population(i);
    }
    return p;
  };
  const auto a = reduced(psi0), c = reduced(r.final_state);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], c[k], 1e-9);
}

TEST(Stage, ReversedUndoesEvolution) {
  const BasisSpec b(1, Topology::vtype);
  const auto h = build_stage(b, preset_excite().spec);
  const auto psi0 = StateVector::superposition(b, {{"g,g,0,0", 0.8}, {"a,e,1,0", cplx(0.3, 0.5)}});
  const auto fwd = evolve(h, psi0, 1e-12).final_state;
  const auto back = evolve(h.reversed(), fwd, 1e-12).final_state;
  EXPECT_GT(fidelity(back, psi0), 1.0 - 1e-9);
}
