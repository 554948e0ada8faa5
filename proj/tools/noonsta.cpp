// noonsta: command-line front end.
//
//   simulate   --config F [--trajectory CSV] [--out JSON]
//   noon       --config F --out JSON [--trajectory CSV]
//   sweep      --config F --out CSV [--jobs N]
//   synthesize --config F --out CSV
//   pulse-dump --config F --out CSV
//   tcq-map    --config F --out JSON

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "noon/config.hpp"
#include "noon/dynamics.hpp"
#include "noon/protocol.hpp"
#include "noon/sta.hpp"
#include "noon/sweep.hpp"
#include "noon/tcq.hpp"

namespace {

using noon::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw noon::Error(noon::ErrorCode::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw noon::Error(noon::ErrorCode::io, "cannot write " + path);
  return out;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw noon::Error(noon::ErrorCode::io, "write failed: " + path);
}

noon::RunConfig load(const std::string& path) {
  std::string notice;
  noon::RunConfig c = noon::parse_config(read_file(path), &notice);
  if (!notice.empty()) std::cerr << "notice: " << notice << '\n';
  return c;
}

noon::StagePreset configured_preset(const noon::RunConfig& c) {
  noon::StagePreset p = c.stage == "fig2a"   ? noon::preset_excite(c.excite)
                        : c.stage == "fig2b" ? noon::preset_bell(c.bell)
                                             : noon::preset_swap(c.swap);
  p.spec.mode = c.mode;
  return p;
}

int cmd_simulate(const std::string& config, const std::string& trajectory, const std::string& out) {
  const noon::RunConfig c = load(config);
  const noon::StagePreset p = configured_preset(c);
  const double dt = c.sample_dt > 0.0 ? c.sample_dt : 0.01;
  const noon::StageRun r = noon::run_preset(p, c.tol, dt);
  const noon::BasisSpec basis(p.cutoff, p.topology);
  const std::size_t tracked = basis.index(basis.parse_label(p.target.back().first));
  const double passage = noon::passage_duration(*r.evolution.trajectory, tracked);
  if (!trajectory.empty()) {
    auto os = open_out(trajectory);
    noon::write_trajectory_csv(os, *r.evolution.trajectory, basis);
  }
  const noon::Window w = p.spec.pulses.window();
  emit_json({{"status", "ok"},
             {"command", "simulate"},
             {"stage", p.name},
             {"mode", noon::to_string(p.spec.mode)},
             {"fidelity", noon::rounded(r.fidelity)},
             {"phase_rad", noon::rounded(r.phase)},
             {"window_ns", {noon::rounded(w.start), noon::rounded(w.end)}},
             {"passage_ns", noon::rounded(passage)},
             {"norm_drift", noon::rounded(r.evolution.norm_drift)},
             {"steps", r.evolution.step_count},
             {"final_populations", noon::populations_json(r.evolution.final_state)}},
            out);
  return 0;
}

int cmd_noon(const std::string& config, const std::string& out, const std::string& trajectory) {
  const noon::RunConfig c = load(config);
  const noon::ProtocolPlan plan = noon::plan_noon(c.topology, c.N, c.protocol_params());
  noon::RunOptions opt;
  opt.tol = c.tol;
  if (!trajectory.empty()) opt.sample_dt = c.sample_dt > 0.0 ? c.sample_dt : 0.01;
  const noon::ProtocolResult r = noon::run_protocol(plan, opt);
  if (!trajectory.empty() && r.trajectory) {
    auto os = open_out(trajectory);
    noon::write_trajectory_csv(os, *r.trajectory, r.final_state.basis());
  }
  emit_json(noon::protocol_result_json(plan, r), out);
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& out, int jobs) {
  const noon::RunConfig c = load(config);
  const auto rows = noon::run_sweep(c.grid, c.tol, jobs);
  auto os = open_out(out);
  noon::write_sweep_csv(os, rows);
  if (c.grid.run_ro) {
    const auto rep = noon::ro_area_convention(c.grid, rows);
    std::cerr << "RO maxima: mean area/pi = " << noon::format_number(rep.mean_area_over_pi) << " over "
              << rep.rows_used << " rows; matches " << rep.matches << '\n';
  }
  return 0;
}

int cmd_synthesize(const std::string& config, const std::string& out) {
  const noon::RunConfig c = load(config);
  const noon::PulsePair pair = c.selected_pulses();
  const noon::CDSchedule cd = noon::cd_amplitude(pair);
  const noon::RealizableFrame frame = noon::realizable_frame(pair.coupling, pair.detuning, cd);
  auto os = open_out(out);
  os << "t_ns,coupling_radns,detuning_radns,cd_radns,rotated_coupling_radns,rotated_detuning_radns,frame_angle_rad\n";
  const noon::Window w = pair.window();
  for (int i = 0; i < c.samples; ++i) {
    const double t = w.start + w.duration() * i / (c.samples - 1);
    os << noon::format_number(t) << ',' << noon::format_number(pair.coupling.value(t)) << ','
       << noon::format_number(pair.detuning.value(t)) << ',' << noon::format_number(cd.cd_amplitude.value(t)) << ','
       << noon::format_number(frame.rotated_coupling_at(t)) << ','
       << noon::format_number(frame.rotated_detuning_at(t)) << ',' << noon::format_number(frame.frame_angle_at(t))
       << '\n';
  }
  return 0;
}

int cmd_pulse_dump(const std::string& config, const std::string& out) {
  const noon::RunConfig c = load(config);
  const noon::PulsePair pair = c.selected_pulses();
  auto os = open_out(out);
  os << "t_ns,coupling_radns,coupling_deriv_radns2,detuning_radns,detuning_deriv_radns2\n";
  const noon::Window w = pair.window();
  for (int i = 0; i < c.samples; ++i) {
    const double t = w.start + w.duration() * i / (c.samples - 1);
    os << noon::format_number(t) << ',' << noon::format_number(pair.coupling.value(t)) << ','
       << noon::format_number(pair.coupling.derivative(t)) << ',' << noon::format_number(pair.detuning.value(t))
       << ',' << noon::format_number(pair.detuning.derivative(t)) << '\n';
  }
  return 0;
}

int cmd_tcq_map(const std::string& config, const std::string& out) {
  const noon::RunConfig c = load(config);
  const noon::BareModel bare = noon::bare_model(c.tcq);
  const double lambda = c.lambda ? *c.lambda : noon::mixing_angle_lambda(bare);
  const noon::DressedCouplings g = noon::dressed_couplings(c.tcq.g_plus, c.tcq.g_minus, lambda);
  const noon::EffectiveSpectrum s = noon::effective_spectrum(bare);
  const noon::Window gw{c.gmon.start, c.gmon.end};
  const noon::GmonCoupling gm =
      noon::gmon_coupling(noon::PulseShape::gaussian(c.gmon.peak, c.gmon.tau, c.gmon.T0, gw), lambda, lambda,
                          c.gmon.cap);
  json warnings = json::array();
  for (const auto& w : bare.warnings) warnings.push_back(w);
  for (const auto& w : s.warnings) warnings.push_back(w);
  if (gm.saturated) warnings.push_back(gm.warning);
  for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << '\n';
  double gmon_peak = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    gmon_peak = std::max(gmon_peak, std::abs(gm.coupling.value(gw.start + gw.duration() * i / 2000.0)));
  }
  emit_json({{"status", "ok"},
             {"command", "tcq-map"},
             {"units", "rad/ns"},
             {"bare", {{"omega_plus", noon::rounded(bare.omega_plus)},
                       {"omega_minus", noon::rounded(bare.omega_minus)},
                       {"delta_plus", noon::rounded(bare.delta_plus)},
                       {"delta_minus", noon::rounded(bare.delta_minus)},
                       {"J", noon::rounded(bare.J)},
                       {"zeta", noon::rounded(noon::tcq_zeta(bare))}}},
             {"lambda_rad", noon::rounded(lambda)},
             {"effective", {{"omega_plus", noon::rounded(s.omega_plus)},
                            {"omega_minus", noon::rounded(s.omega_minus)},
                            {"delta_plus", noon::rounded(s.delta_plus)},
                            {"delta_minus", noon::rounded(s.delta_minus)},
                            {"delta_c", noon::rounded(s.delta_c)}}},
             {"couplings", {{"g_plus", noon::rounded(g.g_plus)},
                            {"g_minus", noon::rounded(g.g_minus)},
                            {"lambda_zero_rad", noon::rounded(g.lambda_zero)}}},
             {"gmon", {{"requested_peak", noon::rounded(gm.peak)},
                       {"peak", noon::rounded(gmon_peak)},
                       {"cap", noon::rounded(c.gmon.cap)},
                       {"saturated", gm.saturated}}},
             {"warnings", warnings}},
            out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STA pulse synthesis and NOON-state protocol simulator"};
  app.require_subcommand(1);
  std::string config, out, trajectory;
  int jobs = 0;

  auto* sim = app.add_subcommand("simulate", "run one demonstration stage");
  sim->add_option("--config", config, "JSON config")->required();
  sim->add_option("--trajectory", trajectory, "population trajectory CSV");
  sim->add_option("--out", out, "result JSON (default stdout)");

  auto* noon_cmd = app.add_subcommand("noon", "run the NOON protocol");
  noon_cmd->add_option("--config", config, "JSON config")->required();
  noon_cmd->add_option("--out", out, "result JSON")->required();
  noon_cmd->add_option("--trajectory", trajectory, "population trajectory CSV");

  auto* sweep = app.add_subcommand("sweep", "STA/APP/RO fidelity grid");
  sweep->add_option("--config", config, "JSON config")->required();
  sweep->add_option("--out", out, "CSV")->required();
  sweep->add_option("--jobs", jobs, "worker threads (0 = all cores)");

  auto* synth = app.add_subcommand("synthesize", "CD and realizable-frame schedules");
  synth->add_option("--config", config, "JSON config")->required();
  synth->add_option("--out", out, "CSV")->required();

  auto* dump = app.add_subcommand("pulse-dump", "sampled pulse values and derivatives");
  dump->add_option("--config", config, "JSON config")->required();
  dump->add_option("--out", out, "CSV")->required();

  auto* tcq = app.add_subcommand("tcq-map", "TCQ parameters to effective V-type model");
  tcq->add_option("--config", config, "JSON config")->required();
  tcq->add_option("--out", out, "result JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim) return cmd_simulate(config, trajectory, out);
    if (*noon_cmd) return cmd_noon(config, out, trajectory);
    if (*sweep) return cmd_sweep(config, out, jobs);
    if (*synth) return cmd_synthesize(config, out);
    if (*dump) return cmd_pulse_dump(config, out);
    if (*tcq) return cmd_tcq_map(config, out);
  } catch (const noon::Error& e) {
    std::cout << noon::error_json(e).dump(2) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cout << json{{"status", "error"}, {"code", "internal"}, {"message", e.what()}}.dump(2) << '\n';
    return 3;
  }
  return 1;
}
