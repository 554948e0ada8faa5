#pragma once

// Counter-diabatic (CD) corrections for driven two-level subspaces and the
// z-rotated frame in which the corrected coupling is real.
//
// Two-level convention (lo, hi), detuning on hi:
//   H = 1/2 [ Omega (X + X^+) + cd (iX - iX^+) ] + Delta P_hi,   X = |hi><lo|
// Eigenvectors of the CD-free part are (cos t, -sin t), (sin t, cos t) with
// 2t = atan2(Omega, Delta).  Exact following needs
//   cd = (Omega dDelta - dOmega Delta) / (Omega^2 + Delta^2).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "noon/error.hpp"
#include "noon/pulse.hpp"

namespace noon {

// +1 is the orientation that keeps exact following for the operator form above.
enum class CdSign : int { tracking = 1, reversed = -1 };

struct CDSchedule {
  PulseShape cd_amplitude;
};

namespace detail {

inline constexpr std::size_t singularity_scan_points = 4001;

inline std::string time_text(double t) {
  std::ostringstream os;
  os.precision(12);
  os << t;
  return os.str();
}

// Rejects windows where both functions vanish at an interior sample.
template <class F, class G>
void scan_for_common_zero(const Window& w, F&& a, G&& b, const char* what) {
  double scale = 0.0;
  std::vector<std::pair<double, double>> s(singularity_scan_points);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = w.start + w.duration() * static_cast<double>(i) / static_cast<double>(s.size() - 1);
    s[i] = {a(t), b(t)};
    scale = std::max({scale, std::abs(s[i].first), std::abs(s[i].second)});
  }
  if (scale == 0.0) return;  // identically zero pair: caller decides
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (std::hypot(s[i].first, s[i].second) <= 1e-12 * scale) {
      const double t = w.start + w.duration() * static_cast<double>(i) / static_cast<double>(s.size() - 1);
      throw Error(ErrorCode::singularity, std::string(what) + " singular at t=" + time_text(t) + " ns");
    }
  }
}

}  // namespace detail

inline CDSchedule cd_amplitude(const PulsePair& pair, CdSign sign = CdSign::tracking) {
  const PulseShape om = pair.coupling;
  const PulseShape de = pair.detuning;
  const Window w = pair.window();
  if (om.is_zero() && de.is_zero()) {
    throw Error(ErrorCode::invalid_argument, "cd_amplitude: pulse pair is identically zero");
  }
  detail::scan_for_common_zero(
      w, [&](double t) { return om.value(t); }, [&](double t) { return de.value(t); },
      "counter-diabatic amplitude");
  const double s = static_cast<double>(sign);

  auto r2_at = [om, de](double t) {
    const double o = om.value(t), d = de.value(t);
    const double r2 = o * o + d * d;
    if (r2 == 0.0) {
      throw Error(ErrorCode::singularity,
                  "counter-diabatic amplitude singular at t=" + detail::time_text(t) + " ns");
    }
    return r2;
  };
  auto f = [om, de, s, r2_at](double t) {
    const double num = om.value(t) * de.derivative(t) - om.derivative(t) * de.value(t);
    return s * num / r2_at(t);
  };
  auto df = [om, de, s, r2_at](double t) {
    const double o = om.value(t), d = de.value(t);
    const double od = om.derivative(t), dd = de.derivative(t);
    const double num = o * dd - od * d;
    const double dnum = o * de.second_derivative(t) - om.second_derivative(t) * d;
    const double r2 = r2_at(t);
    const double dr2 = 2.0 * (o * od + d * dd);
    return s * (dnum * r2 - num * dr2) / (r2 * r2);
  };
  return {PulseShape::derived(f, df, nullptr, w)};
}

// Realizable frame U = exp(-i phi P_hi) with phi = atan2(cd, coupling).
// In this frame the coupling is sqrt(coupling^2 + cd^2) and the detuning
// picks up d(phi)/dt.
class RealizableFrame {
 public:
  RealizableFrame(PulseShape coupling, PulseShape detuning, CDSchedule cd)
      : coupling_(std::move(coupling)), detuning_(std::move(detuning)), cd_(std::move(cd.cd_amplitude)) {
    window_ = coupling_.window();
    if (cd_.is_zero() && coupling_.is_zero()) {
      identity_ = true;
    } else if (cd_.is_zero()) {
      // phi == 0 wherever coupling > 0; coupling sign changes would flip phi by pi.
      detail::scan_for_common_zero(
          window_, [&](double t) { return coupling_.value(t); }, [](double) { return 0.0; },
          "frame angle");
    } else {
      detail::scan_for_common_zero(
          window_, [&](double t) { return coupling_.value(t); }, [&](double t) { return cd_.value(t); },
          "frame angle");
    }
    locate_branch_cuts();
  }

  const Window& window() const noexcept { return window_; }
  const PulseShape& coupling() const noexcept { return coupling_; }
  const PulseShape& detuning() const noexcept { return detuning_; }
  const PulseShape& cd() const noexcept { return cd_; }

  double rotated_coupling_at(double t) const { return std::hypot(coupling_.value(t), cd_.value(t)); }

  double frame_angle_at(double t) const {
    if (identity_) return 0.0;
    const double o = coupling_.value(t), c = cd_.value(t);
    if (o == 0.0 && c == 0.0) {
      throw Error(ErrorCode::singularity, "frame angle singular at t=" + detail::time_text(t) + " ns");
    }
    const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), t,
                                     [](double x, const std::pair<double, double>& cut) { return x < cut.first; });
    const double offset = it == cuts_.begin() ? 0.0 : std::prev(it)->second;
    return std::atan2(c, o) + offset;
  }

  double frame_angle_rate_at(double t) const {
    if (identity_) return 0.0;
    const double o = coupling_.value(t), c = cd_.value(t);
    const double r2 = o * o + c * c;
    if (r2 == 0.0) {
      throw Error(ErrorCode::singularity, "frame angle singular at t=" + detail::time_text(t) + " ns");
    }
    return (o * cd_.derivative(t) - c * coupling_.derivative(t)) / r2;
  }

  double rotated_detuning_at(double t) const { return detuning_.value(t) + frame_angle_rate_at(t); }

  PulseShape rotated_coupling() const {
    const RealizableFrame self = *this;
    return PulseShape::derived(
        [self](double t) { return self.rotated_coupling_at(t); },
        [self](double t) {
          const double o = self.coupling_.value(t), c = self.cd_.value(t);
          const double r = std::hypot(o, c);
          if (r == 0.0) return 0.0;
          return (o * self.coupling_.derivative(t) + c * self.cd_.derivative(t)) / r;
        },
        nullptr, window_);
  }

  PulseShape rotated_detuning() const {
    const RealizableFrame self = *this;
    return PulseShape::derived([self](double t) { return self.rotated_detuning_at(t); }, nullptr, nullptr,
                               window_);
  }

  PulseShape frame_angle() const {
    const RealizableFrame self = *this;
    return PulseShape::derived([self](double t) { return self.frame_angle_at(t); },
                               [self](double t) { return self.frame_angle_rate_at(t); }, nullptr, window_);
  }

 private:
  // atan2 jumps by 2 pi where coupling < 0 and cd changes sign; record the
  // crossing times and the accumulated offsets so phi stays continuous.
  void locate_branch_cuts() {
    if (identity_) return;
    constexpr std::size_t n = detail::singularity_scan_points;
    const double dt = window_.duration() / static_cast<double>(n - 1);
    double offset = 0.0;
    double prev = std::atan2(cd_.value(window_.start), coupling_.value(window_.start));
    for (std::size_t i = 1; i < n; ++i) {
      const double t1 = window_.start + dt * static_cast<double>(i);
      const double cur = std::atan2(cd_.value(t1), coupling_.value(t1));
      const double jump = cur - prev;
      if (std::abs(jump) > std::numbers::pi) {
        double lo = t1 - dt, hi = t1;
        const double sign_lo = std::copysign(1.0, cd_.value(lo));
        for (int k = 0; k < 80; ++k) {
          const double mid = 0.5 * (lo + hi);
          (std::copysign(1.0, cd_.value(mid)) == sign_lo ? lo : hi) = mid;
        }
        offset += jump > 0 ? -2.0 * std::numbers::pi : 2.0 * std::numbers::pi;
        cuts_.emplace_back(hi, offset);
      }
      prev = cur;
    }
  }

  PulseShape coupling_;
  PulseShape detuning_;
  PulseShape cd_;
  Window window_;
  bool identity_ = false;
  std::vector<std::pair<double, double>> cuts_;
};

inline RealizableFrame realizable_frame(const PulseShape& coupling, const PulseShape& detuning,
                                        const CDSchedule& cd) {
  return {coupling, detuning, cd};
}

inline double frame_angle_rate(const RealizableFrame& frame, double t) {
  if (!frame.window().contains(t)) {
    throw Error(ErrorCode::invalid_argument, "frame_angle_rate: t outside the frame window");
  }
  return frame.frame_angle_rate_at(t);
}

}  // namespace noon
