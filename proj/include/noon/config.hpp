#pragma once

// JSON run configuration.  Physical keys carry their unit in the name
// (_MHz, _ns, _rad); MHz values are angular (x 2 pi) unless
// units.two_pi is false.  Every problem is reported with its key path.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "noon/error.hpp"
#include "noon/protocol.hpp"
#include "noon/sweep.hpp"
#include "noon/tcq.hpp"

namespace noon {

using json = nlohmann::json;

struct ConfigIssue {
  std::string path;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : Error(ErrorCode::validation, summary(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string summary(const std::vector<ConfigIssue>& issues) {
    std::string s = std::to_string(issues.size()) + " configuration error(s)";
    for (const auto& i : issues) s += "; " + i.path + ": " + i.message;
    return s;
  }
  std::vector<ConfigIssue> issues_;
};

struct GmonConfig {
  double peak = two_pi * 0.010;  // S amplitude, rad/ns
  double T0 = 5.0;
  double tau = 4.0;
  double start = -5.0;
  double end = 11.0;
  double cap = gmon_cap;
};

struct RunConfig {
  bool two_pi = true;
  bool units_defaulted = false;
  double tol = 1e-10;
  double sample_dt = 0.01;

  // simulate
  std::string stage = "fig2a";
  Mode mode = Mode::sta;

  AeParams excite{};
  bool excite_halfwidth_set = false;
  BellParams bell{};
  SwapParams swap{};

  // noon
  Topology topology = Topology::vtype;
  int N = 1;
  int cutoff = -1;
  bool simultaneous_arms = false;
  bool rescale_rungs = false;
  double leakage_limit = 1e-8;

  // sweep
  SweepGrid grid{};

  // pulse-dump / synthesize
  std::string pulses = "excite";
  int samples = 801;

  // tcq-map
  TCQParams tcq{};
  std::optional<double> lambda;
  GmonConfig gmon{};

  ProtocolParams protocol_params() const {
    ProtocolParams p;
    p.drive = excite;
    if (!excite_halfwidth_set) p.drive.halfwidth = protocol_drive_halfwidth;
    p.bell = bell;
    p.swap = swap;
    p.mode = mode;
    p.cutoff = cutoff;
    p.simultaneous_arms = simultaneous_arms;
    p.rescale_rungs = rescale_rungs;
    p.leakage_limit = leakage_limit;
    return p;
  }

  PulsePair selected_pulses() const {
    if (pulses == "excite") return drive_pulses(excite);
    if (pulses == "bell") return bell_pulses(bell);
    return swap_pulses(swap);
  }
};

namespace detail {

enum class Bound { any, positive, nonnegative };

class ObjectReader {
 public:
  ObjectReader(const json* j, std::string path, std::vector<ConfigIssue>& issues)
      : j_(j), path_(std::move(path)), issues_(&issues) {
    if (j_ != nullptr && !j_->is_object()) {
      issue(path_, "expected an object");
      j_ = nullptr;
    }
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    if (j_ == nullptr) return nullptr;
    const auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  bool number(const std::string& key, double& out, Bound b = Bound::any, double factor = 1.0) {
    const json* v = get(key);
    if (v == nullptr) return false;
    if (!v->is_number()) {
      issue(key_path(key), "expected a number");
      return false;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x)) {
      issue(key_path(key), "must be finite");
      return false;
    }
    if (b == Bound::positive && !(x > 0.0)) {
      issue(key_path(key), "must be > 0");
      return false;
    }
    if (b == Bound::nonnegative && x < 0.0) {
      issue(key_path(key), "must be >= 0");
      return false;
    }
    out = x * factor;
    return true;
  }

  bool integer(const std::string& key, int& out, int min_value) {
    const json* v = get(key);
    if (v == nullptr) return false;
    if (!v->is_number_integer()) {
      issue(key_path(key), "expected an integer");
      return false;
    }
    const auto x = v->get<long long>();
    if (x < min_value || x > 1'000'000) {
      issue(key_path(key), "must be an integer >= " + std::to_string(min_value));
      return false;
    }
    out = static_cast<int>(x);
    return true;
  }

  bool boolean(const std::string& key, bool& out) {
    const json* v = get(key);
    if (v == nullptr) return false;
    if (!v->is_boolean()) {
      issue(key_path(key), "expected true or false");
      return false;
    }
    out = v->get<bool>();
    return true;
  }

  bool string(const std::string& key, std::string& out, const std::vector<std::string>& allowed) {
    const json* v = get(key);
    if (v == nullptr) return false;
    if (!v->is_string()) {
      issue(key_path(key), "expected a string");
      return false;
    }
    const auto s = v->get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      issue(key_path(key), "must be one of: " + list);
      return false;
    }
    out = s;
    return true;
  }

  // [lo, hi] pair of numbers
  bool range(const std::string& key, double& lo, double& hi, double factor) {
    const json* v = get(key);
    if (v == nullptr) return false;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
      issue(key_path(key), "expected [min, max]");
      return false;
    }
    const double a = (*v)[0].get<double>(), b = (*v)[1].get<double>();
    if (!(a > 0.0) || !(b >= a)) {
      issue(key_path(key), "expected 0 < min <= max");
      return false;
    }
    lo = a * factor;
    hi = b * factor;
    return true;
  }

  void finish() {
    if (j_ == nullptr) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) issue(key_path(k), "unknown key");
    }
  }

  void issue(const std::string& path, const std::string& msg) { issues_->push_back({path, msg}); }

 private:
  const json* j_;
  std::string path_;
  std::vector<ConfigIssue>* issues_;
  std::set<std::string> seen_;
};

}  // namespace detail

// MHz -> rad/ns
inline double mhz_factor(bool two_pi_convention) { return (two_pi_convention ? two_pi : 1.0) * 1e-3; }

inline RunConfig parse_config(const std::string& text, std::string* notice = nullptr) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({{"", std::string("malformed JSON: ") + e.what()}});
  }
  std::vector<ConfigIssue> issues;
  RunConfig c;
  using detail::Bound;
  detail::ObjectReader top(&root, "", issues);

  if (const json* u = top.get("units")) {
    detail::ObjectReader r(u, "units", issues);
    if (!r.boolean("two_pi", c.two_pi)) c.units_defaulted = true;
    r.finish();
  } else {
    c.units_defaulted = true;
  }
  if (c.units_defaulted && notice != nullptr) {
    *notice = "units.two_pi not given: MHz values are read as 2*pi*MHz (angular)";
  }
  const double f = mhz_factor(c.two_pi);

  if (top.number("tol", c.tol, Bound::positive) && !(c.tol >= 1e-12 && c.tol <= 1e-4)) {
    top.issue("tol", "must lie in [1e-12, 1e-4]");
  }
  top.number("sample_dt_ns", c.sample_dt, Bound::nonnegative);
  top.string("stage", c.stage, {"fig2a", "fig2b", "fig2c"});
  {
    std::string m;
    if (top.string("mode", m, {"STA", "APP", "RO"})) c.mode = mode_from_string(m);
  }
  if (const json* e = top.get("excite")) {
    detail::ObjectReader r(e, "excite", issues);
    r.number("Omega0_MHz", c.excite.omega0, Bound::any, f);
    r.number("beta_MHz", c.excite.beta, Bound::any, f);
    r.number("t0_ns", c.excite.t0, Bound::positive);
    c.excite_halfwidth_set = r.number("halfwidth_t0", c.excite.halfwidth, Bound::positive);
    r.finish();
  }
  if (const json* b = top.get("bell")) {
    detail::ObjectReader r(b, "bell", issues);
    r.number("G0_MHz", c.bell.G0, Bound::any, f);
    r.number("Delta0_MHz", c.bell.Delta0, Bound::any, f);
    r.number("T0_ns", c.bell.T0, Bound::positive);
    r.number("m", c.bell.m, Bound::positive);
    r.number("tau_ns", c.bell.tau);
    r.number("start_ns", c.bell.start);
    r.number("end_ns", c.bell.end);
    if (!(c.bell.end > c.bell.start)) r.issue("bell.end_ns", "must exceed bell.start_ns");
    r.finish();
  }
  if (const json* s = top.get("swap")) {
    detail::ObjectReader r(s, "swap", issues);
    r.number("G1_MHz", c.swap.G1, Bound::any, f);
    r.number("beta_MHz", c.swap.beta, Bound::any, f);
    r.number("T1_ns", c.swap.T1, Bound::positive);
    r.number("t0_ns", c.swap.t0, Bound::positive);
    r.number("halfwidth_T1", c.swap.halfwidth, Bound::positive);
    r.finish();
  }
  {
    std::string t;
    if (top.string("topology", t, {"vtype", "ladder"})) c.topology = t == "ladder" ? Topology::ladder : Topology::vtype;
  }
  top.integer("N", c.N, 0);
  top.integer("cutoff", c.cutoff, 0);
  if (c.cutoff >= 0 && c.cutoff < c.N) top.issue("cutoff", "must be >= N");
  top.boolean("simultaneous_arms", c.simultaneous_arms);
  top.boolean("rescale_rungs", c.rescale_rungs);
  top.number("leakage_limit", c.leakage_limit, Bound::positive);

  c.grid.swap = c.swap;
  if (const json* g = top.get("grid")) {
    detail::ObjectReader r(g, "grid", issues);
    r.range("G1_MHz", c.grid.G1_min, c.grid.G1_max, f);
    r.range("T1_ns", c.grid.T1_min, c.grid.T1_max, 1.0);
    r.integer("G1_count", c.grid.G1_count, 2);
    r.integer("T1_count", c.grid.T1_count, 2);
    if (const json* m = r.get("modes")) {
      if (!m->is_array() || m->empty()) {
        r.issue("grid.modes", "expected a nonempty array of STA/APP/RO");
      } else {
        c.grid.run_sta = c.grid.run_app = c.grid.run_ro = false;
        for (std::size_t i = 0; i < m->size(); ++i) {
          const json& x = (*m)[i];
          const std::string p = "grid.modes[" + std::to_string(i) + "]";
          if (!x.is_string()) {
            r.issue(p, "expected a string");
            continue;
          }
          const auto s = x.get<std::string>();
          if (s == "STA") {
            c.grid.run_sta = true;
          } else if (s == "APP") {
            c.grid.run_app = true;
          } else if (s == "RO") {
            c.grid.run_ro = true;
          } else {
            r.issue(p, "must be one of: STA, APP, RO");
          }
        }
      }
    }
    r.finish();
  }

  top.string("pulses", c.pulses, {"excite", "bell", "swap"});
  top.integer("samples", c.samples, 2);

  if (const json* t = top.get("tcq")) {
    detail::ObjectReader r(t, "tcq", issues);
    r.number("EC_plus_MHz", c.tcq.EC_plus, Bound::positive, f);
    r.number("EC_minus_MHz", c.tcq.EC_minus, Bound::positive, f);
    r.number("EJ_plus_MHz", c.tcq.EJ_plus, Bound::positive, f);
    r.number("EJ_minus_MHz", c.tcq.EJ_minus, Bound::positive, f);
    r.number("EI_MHz", c.tcq.EI, Bound::nonnegative, f);
    r.number("g_plus_MHz", c.tcq.g_plus, Bound::any, f);
    r.number("g_minus_MHz", c.tcq.g_minus, Bound::any, f);
    double lam = 0.0;
    if (r.number("lambda_rad", lam)) c.lambda = lam;
    for (const char* k : {"EC_plus_MHz", "EC_minus_MHz", "EJ_plus_MHz", "EJ_minus_MHz"}) {
      if (t->is_object() && !t->contains(k)) r.issue(r.key_path(k), "required");
    }
    r.finish();
  }
  if (const json* g = top.get("gmon")) {
    detail::ObjectReader r(g, "gmon", issues);
    r.number("peak_MHz", c.gmon.peak, Bound::any, f);
    r.number("T0_ns", c.gmon.T0, Bound::positive);
    r.number("tau_ns", c.gmon.tau);
    r.number("start_ns", c.gmon.start);
    r.number("end_ns", c.gmon.end);
    r.number("cap_MHz", c.gmon.cap, Bound::positive, f);
    if (!(c.gmon.end > c.gmon.start)) r.issue("gmon.end_ns", "must exceed gmon.start_ns");
    r.finish();
  }
  top.finish();
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

// Numbers rounded to 12 significant digits so emitted text is stable.
inline json rounded(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

inline json error_json(const Error& e) {
  json j{{"status", "error"}, {"code", to_string(e.code())}, {"message", e.what()}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    json list = json::array();
    for (const auto& i : ce->issues()) list.push_back({{"path", i.path}, {"message", i.message}});
    j["issues"] = list;
  }
  return j;
}

inline json populations_json(const StateVector& psi, double floor = 1e-6) {
  json p = json::object();
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    if (psi.population(i) > floor) p[psi.basis().label_text(i)] = rounded(psi.population(i));
  }
  return p;
}

inline json protocol_result_json(const ProtocolPlan& plan, const ProtocolResult& r) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name},
                      {"mode", s.mode},
                      {"t_start_ns", rounded(s.t_start)},
                      {"t_end_ns", rounded(s.t_end)},
                      {"fidelity", rounded(s.fidelity)},
                      {"phase_rad", rounded(s.phase)},
                      {"leakage", rounded(s.leakage)},
                      {"top_fock", rounded(s.top_fock)},
                      {"norm_drift", rounded(s.norm_drift)},
                      {"steps", s.steps}});
  }
  return {{"status", "ok"},
          {"command", "noon"},
          {"topology", plan.topology == Topology::ladder ? "ladder" : "vtype"},
          {"N", plan.target_N},
          {"cutoff", plan.cutoff},
          {"fidelity", rounded(r.fidelity)},
          {"phase_rad", rounded(r.phase)},
          {"duration_ns", rounded(r.duration)},
          {"stages", stages},
          {"final_populations", populations_json(r.final_state)}};
}

// Structural check of an emitted noon result.
inline std::vector<ConfigIssue> validate_protocol_result_json(const json& j) {
  std::vector<ConfigIssue> issues;
  auto need = [&](const char* key, auto pred, const char* what) {
    if (!j.contains(key) || !pred(j[key])) issues.push_back({key, std::string("expected ") + what});
  };
  auto is_unit = [](const json& v) { return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0; };
  need("status", [](const json& v) { return v.is_string(); }, "string");
  need("N", [](const json& v) { return v.is_number_integer(); }, "integer");
  need("fidelity", is_unit, "number in [0,1]");
  need("duration_ns", [](const json& v) { return v.is_number() && v.get<double>() >= 0.0; }, "number >= 0");
  need("stages", [](const json& v) { return v.is_array(); }, "array");
  if (j.contains("stages") && j["stages"].is_array()) {
    for (std::size_t i = 0; i < j["stages"].size(); ++i) {
      const json& s = j["stages"][i];
      if (!s.is_object() || !s.contains("fidelity") || !is_unit(s["fidelity"])) {
        issues.push_back({"stages[" + std::to_string(i) + "].fidelity", "expected number in [0,1]"});
      }
    }
  }
  return issues;
}

}  // namespace noon
