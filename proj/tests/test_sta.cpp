#include <gtest/gtest.h>

#include "noon/dynamics.hpp"
#include "noon/protocol.hpp"
#include "noon/sta.hpp"
#include "oracles.hpp"

using namespace noon;

namespace {

struct Schedule {
  std::string name;
  oracle::Fn coupling;
  oracle::Fn detuning;
  double start, end;
  PulsePair pair;
};

// The three demonstration schedules, in closed form and as library pulses.
std::vector<Schedule> demo_schedules() {
  const AeParams a;
  const BellParams b;
  const SwapParams s;
  return {
      {"excite", oracle::sech_pulse(a.omega0, a.t0), oracle::tanh_pulse(a.beta, a.t0, a.t0), -4.0, 4.0,
       drive_pulses(a)},
      {"bell", oracle::gauss_pulse(b.G0, b.tau, b.T0), oracle::gauss_pulse(b.Delta0, -b.tau, b.m * b.T0), b.start,
       b.end, bell_pulses(b)},
      {"swap", oracle::sech_pulse(s.G1, s.T1), oracle::tanh_pulse(s.beta, s.t0, s.T1), -4.0, 4.0, swap_pulses(s)},
  };
}

// cd from the oracle angle: the negative of d/dt atan2(coupling, detuning)
oracle::Fn oracle_cd(const Schedule& s) {
  return [s](double t) { return -oracle::angle_rate(s.coupling, s.detuning, t); };
}

// Minimum overlap with the upper CD-free eigenvector along an RK4 run
// started in that eigenvector; returns (min overlap, final hi population).
std::pair<double, double> track(const Schedule& s, const oracle::Fn& cd, double dt = 2e-4) {
  oracle::TwoLevel sys{s.coupling, cd, s.detuning};
  Eigen::Vector2cd y = oracle::eigvec(s.coupling(s.start), s.detuning(s.start), 1);
  double worst = 1.0;
  const int chunks = 200;
  for (int k = 0; k < chunks; ++k) {
    const double a = s.start + (s.end - s.start) * k / chunks;
    const double b = s.start + (s.end - s.start) * (k + 1) / chunks;
    y = sys.evolve(y, a, b, dt);
    worst = std::min(worst, std::norm(oracle::eigvec(s.coupling(b), s.detuning(b), 1).dot(y)));
  }
  return {worst, std::norm(y(1))};
}

}  // namespace

TEST(CD, ConstantPairGivesZero) {
  const Window w{0, 5};
  const auto cd = cd_amplitude({PulseShape::constant(0.3, w), PulseShape::constant(-0.2, w)});
  for (double t : {0.0, 1.0, 4.9}) EXPECT_EQ(cd.cd_amplitude.value(t), 0.0);
}

TEST(CD, ZeroDetuningGivesZero) {
  const Window w{-3, 3};
  const auto cd = cd_amplitude({PulseShape::ae_amplitude(1.0, 1.0, w), PulseShape::zero(w)});
  for (double t : {-2.0, 0.1, 2.5}) EXPECT_EQ(cd.cd_amplitude.value(t), 0.0);
}

TEST(CD, IdenticallyZeroPairRejected) {
  const Window w{-1, 1};
  EXPECT_THROW(cd_amplitude({PulseShape::zero(w), PulseShape::zero(w)}), Error);
}

TEST(CD, CommonZeroReportsTime) {
  const Window w{-1, 1};
  const auto lin = PulseShape::derived([](double t) { return t; }, [](double) { return 1.0; }, nullptr, w);
  try {
    cd_amplitude({lin, lin.scaled(2.0)});
    FAIL() << "expected singularity";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singularity);
    EXPECT_NE(std::string(e.what()).find("t=0"), std::string::npos) << e.what();
  }
}

TEST(CD, MagnitudeMatchesAngleRate) {
  for (const auto& s : demo_schedules()) {
    const auto cd = cd_amplitude(s.pair).cd_amplitude;
    double peak = 0.0;
    for (int i = 0; i <= 2000; ++i) peak = std::max(peak, std::abs(cd.value(s.start + (s.end - s.start) * i / 2000.0)));
    double worst = 0.0;
    for (int i = 1; i < 2000; ++i) {
      const double t = s.start + (s.end - s.start) * i / 2000.0;
      const double ref = oracle::angle_rate(s.coupling, s.detuning, t);
      worst = std::max(worst, std::abs(std::abs(cd.value(t)) - std::abs(ref)) / std::max(std::abs(ref), 1e-6 * peak));
      // tracking orientation is the negative of the atan2 rate
      EXPECT_NEAR(cd.value(t), -ref, 1e-6 * std::max(std::abs(ref), 1e-6 * peak));
    }
    EXPECT_LT(worst, 1e-6) << s.name;
  }
}

TEST(CD, ReversedSignFlipsValue) {
  const auto s = demo_schedules()[0];
  const auto a = cd_amplitude(s.pair, CdSign::tracking).cd_amplitude;
  const auto b = cd_amplitude(s.pair, CdSign::reversed).cd_amplitude;
  for (double t : {-2.0, 0.0, 1.5}) EXPECT_DOUBLE_EQ(a.value(t), -b.value(t));
}

TEST(CD, DerivativeMatchesFiniteDifference) {
  for (const auto& s : demo_schedules()) {
    const auto cd = cd_amplitude(s.pair).cd_amplitude;
    for (double f : {0.2, 0.45, 0.5, 0.7}) {
      const double t = s.start + (s.end - s.start) * f;
      const double fd = oracle::d5([&](double x) { return cd.value(x); }, t, 1e-3);
      EXPECT_NEAR(cd.derivative(t), fd, 1e-6 * std::max(1.0, std::abs(fd))) << s.name;
    }
  }
}

// The sign is fixed by exact following: one orientation tracks, the other does not.
TEST(CD, SignSelectedByExactFollowing) {
  for (const auto& s : demo_schedules()) {
    const auto lib = cd_amplitude(s.pair).cd_amplitude;
    const auto [good, p_good] = track(s, [lib](double t) { return lib.value(t); });
    const auto [bad, p_bad] = track(s, [lib](double t) { return -lib.value(t); });
    EXPECT_GE(good, 1.0 - 1e-6) << s.name;
    EXPECT_LT(bad, 0.99) << s.name;
    (void)p_good;
    (void)p_bad;
  }
}

TEST(CD, WithoutCorrectionFastSwapIsDiabatic) {
  Schedule s = demo_schedules()[2];
  SwapParams p;
  p.T1 = 0.5;
  p.G1 = two_pi * 0.06;
  s.coupling = oracle::sech_pulse(p.G1, p.T1);
  s.detuning = oracle::tanh_pulse(p.beta, p.t0, p.T1);
  s.start = -2.0;
  s.end = 2.0;
  const auto [no_cd, p_no] = track(s, nullptr);
  EXPECT_LT(no_cd, 0.9);
  const auto [with_cd, p_with] = track(s, oracle_cd(s));
  EXPECT_GE(with_cd, 1.0 - 1e-6);
  (void)p_no;
  (void)p_with;
}

TEST(Frame, IdentityWhenCdZero) {
  const Window w{-4, 4};
  const auto c = PulseShape::ae_amplitude(1.0, 1.0, w);
  const auto d = PulseShape::ae_detuning(1.0, 1.0, w);
  const auto f = realizable_frame(c, d, {PulseShape::zero(w)});
  for (double t : {-3.0, 0.0, 2.0}) {
    EXPECT_DOUBLE_EQ(f.rotated_coupling_at(t), c.value(t));
    EXPECT_EQ(f.frame_angle_at(t), 0.0);
    EXPECT_DOUBLE_EQ(f.rotated_detuning_at(t), d.value(t));
  }
}

TEST(Frame, EqualCouplingAndCd) {
  const Window w{0, 2};
  const auto c = PulseShape::constant(0.7, w);
  const auto f = realizable_frame(c, PulseShape::zero(w), {PulseShape::constant(0.7, w)});
  EXPECT_NEAR(f.rotated_coupling_at(1.0), std::sqrt(2.0) * 0.7, 1e-15);
  EXPECT_NEAR(f.frame_angle_at(1.0), std::numbers::pi / 4, 1e-15);
  EXPECT_EQ(frame_angle_rate(f, 1.0), 0.0);  // static frame
  EXPECT_THROW(frame_angle_rate(f, 3.0), Error);
}

TEST(Frame, LinearAngle) {
  const double a = 0.3;
  const Window w{-2, 2};
  const auto cd = PulseShape::derived([a](double t) { return std::tan(a * t); },
                                      [a](double t) { return a / std::pow(std::cos(a * t), 2); }, nullptr, w);
  const auto f = realizable_frame(PulseShape::constant(1.0, w), PulseShape::zero(w), {cd});
  for (double t : {-1.5, 0.0, 0.9}) {
    EXPECT_NEAR(f.frame_angle_at(t), a * t, 1e-14);
    EXPECT_NEAR(frame_angle_rate(f, t), a, 1e-12);
  }
}

TEST(Frame, InvariantsOnDemoSchedules) {
  for (const auto& s : demo_schedules()) {
    const auto cd = cd_amplitude(s.pair);
    const auto f = realizable_frame(s.pair.coupling, s.pair.detuning, cd);
    for (int i = 0; i <= 500; ++i) {
      const double t = s.start + (s.end - s.start) * i / 500.0;
      const double o = s.pair.coupling.value(t), c = cd.cd_amplitude.value(t);
      const double js = f.rotated_coupling_at(t);
      EXPECT_GE(js, 0.0);
      EXPECT_GE(js, std::abs(o));
      EXPECT_NEAR(js * js, o * o + c * c, 1e-10 * (o * o + c * c));
      // rate vs finite differences of the tracked angle
      if (i > 0 && i < 500) {
        const double fd = oracle::d5([&](double x) { return f.frame_angle_at(x); }, t, 1e-4);
        EXPECT_NEAR(frame_angle_rate(f, t), fd, 1e-6 * std::max(1.0, std::abs(fd))) << s.name << " t=" << t;
        // rotated detuning = detuning + d/dt atan2(cd, coupling), from oracle pieces
        const oracle::Fn cdf = oracle_cd(s);
        const double want = s.detuning(t) + oracle::angle_rate(cdf, s.coupling, t, 1e-3);
        EXPECT_NEAR(f.rotated_detuning_at(t), want, 1e-6 * std::max(1.0, std::abs(want))) << s.name;
      }
    }
  }
}

TEST(Frame, AngleContinuousAcrossBranchCut) {
  // negative coupling with cd changing sign puts atan2 on its cut
  const Window w{-1, 1};
  const auto c = PulseShape::constant(-1.0, w);
  const auto cd = PulseShape::derived([](double t) { return t; }, [](double) { return 1.0; }, nullptr, w);
  const auto f = realizable_frame(c, PulseShape::zero(w), {cd});
  double prev = f.frame_angle_at(-1.0);
  for (int i = 1; i <= 2000; ++i) {
    const double t = -1.0 + 2.0 * i / 2000.0;
    const double cur = f.frame_angle_at(t);
    ASSERT_LT(std::abs(cur - prev), 0.01) << "t=" << t;
    prev = cur;
  }
}

TEST(Frame, SingularWhenCouplingAndCdVanish) {
  const Window w{-1, 1};
  const auto lin = PulseShape::derived([](double t) { return t; }, [](double) { return 1.0; }, nullptr, w);
  try {
    realizable_frame(lin, PulseShape::constant(1.0, w), {lin.scaled(0.5)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singularity);
  }
}

// Populations after the rotated-frame run equal those of the CD-corrected run.
// Both sides here are the independent RK4 with oracle-built coefficients.
TEST(Frame, EquivalenceOracle) {
  for (const auto& s : demo_schedules()) {
    const oracle::Fn cd = oracle_cd(s);
    const oracle::Fn js = [s, cd](double t) { return std::hypot(s.coupling(t), cd(t)); };
    const oracle::Fn ds = [s, cd](double t) { return s.detuning(t) + oracle::angle_rate(cd, s.coupling, t, 1e-3); };
    for (int start_hi = 0; start_hi < 2; ++start_hi) {
      Eigen::Vector2cd y0 = Eigen::Vector2cd::Zero();
      y0(start_hi) = 1.0;
      const auto a = oracle::TwoLevel{s.coupling, cd, s.detuning}.evolve(y0, s.start, s.end, 1e-4);
      const auto b = oracle::TwoLevel{js, nullptr, ds}.evolve(y0, s.start, s.end, 1e-4);
      EXPECT_NEAR(std::norm(a(0)), std::norm(b(0)), 1e-8) << s.name;
      EXPECT_NEAR(std::norm(a(1)), std::norm(b(1)), 1e-8) << s.name;
    }
  }
}

// Library realizable-frame Hamiltonian vs library CD-corrected Hamiltonian,
// full composite space.
TEST(Frame, EquivalenceLibrary) {
  for (const StagePreset& p : {preset_excite(), preset_bell(), preset_swap()}) {
    const BasisSpec basis(p.cutoff, p.topology);
    const StageHamiltonian cd = build_cd_corrected(basis, p.spec);
    const RealizableFrame f = stage_frame(p.spec);
    const StageHamiltonian rot =
        two_level_stage(basis, stage_transition(basis, p.spec), f.rotated_coupling(), nullptr, f.rotated_detuning(), "");
    const StateVector psi0 = StateVector::basis_state(basis, p.initial);
    const auto a = evolve(cd, psi0, 1e-12).final_state;
    const auto b = evolve(rot, psi0, 1e-12).final_state;
    for (std::size_t i = 0; i < basis.dim(); ++i) EXPECT_NEAR(a.population(i), b.population(i), 1e-8) << p.name;
  }
}
