#pragma once

// Closed-form pulse schedules with analytic first and second derivatives.
// Units: time in ns, amplitudes in rad/ns.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "noon/error.hpp"

namespace noon {

struct Window {
  double start = 0.0;
  double end = 0.0;

  double duration() const noexcept { return end - start; }
  bool contains(double t) const noexcept { return t >= start && t <= end; }
  friend bool operator==(const Window&, const Window&) = default;
};

// Default half-width of AE windows, in units of the pulse time scale.
inline constexpr double default_ae_halfwidth = 4.0;

inline Window symmetric_window(double half_width) { return {-half_width, half_width}; }

inline double sech(double x) { return 1.0 / std::cosh(x); }

inline double ae_amplitude(double t, double omega0, double t0) {
  return omega0 * sech(std::numbers::pi * t / (2.0 * t0));
}

// 2 beta^2 t0 / pi * tanh(pi t / 2T); T defaults to t0.
inline double ae_detuning_scale(double beta, double t0) { return 2.0 * beta * beta * t0 / std::numbers::pi; }

inline double ae_detuning(double t, double beta, double t0) {
  return ae_detuning_scale(beta, t0) * std::tanh(std::numbers::pi * t / (2.0 * t0));
}

inline double gaussian(double t, double amplitude, double center, double width) {
  const double x = (t - center) / width;
  return amplitude * std::exp(-x * x);
}

// Integral of omega0 * sech(pi t / 2 t0) over [-W, W].
inline double ae_area(double omega0, double t0, double half_width) {
  return omega0 * (8.0 * t0 / std::numbers::pi) *
         std::atan(std::tanh(std::numbers::pi * half_width / (4.0 * t0)));
}

class PulseShape {
 public:
  enum class Kind { ae_amplitude, ae_detuning, gaussian, constant, zero, tabulated, derived };

  using Fn = std::function<double(double)>;

  PulseShape() : PulseShape(zero({0.0, 0.0})) {}

  static PulseShape ae_amplitude(double omega0, double t0, Window w) {
    if (!(t0 > 0.0)) throw Error(ErrorCode::invalid_argument, "AE time scale t0 must be > 0");
    return PulseShape(Kind::ae_amplitude, w, AeAmplitude{omega0, std::numbers::pi / (2.0 * t0)});
  }
  static PulseShape ae_amplitude(double omega0, double t0) {
    return ae_amplitude(omega0, t0, symmetric_window(default_ae_halfwidth * t0));
  }

  // Detuning amplitude 2 beta^2 t0 / pi with tanh time scale `time_scale`
  // (equal to t0 unless the swap-stage form decouples them).
  static PulseShape ae_detuning(double beta, double t0, Window w, double time_scale = 0.0) {
    if (!(t0 > 0.0)) throw Error(ErrorCode::invalid_argument, "AE time scale t0 must be > 0");
    const double ts = time_scale > 0.0 ? time_scale : t0;
    return PulseShape(Kind::ae_detuning, w,
                      AeDetuning{ae_detuning_scale(beta, t0), std::numbers::pi / (2.0 * ts)});
  }
  static PulseShape ae_detuning(double beta, double t0) {
    return ae_detuning(beta, t0, symmetric_window(default_ae_halfwidth * t0));
  }

  static PulseShape gaussian(double amplitude, double center, double width, Window w) {
    if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "gaussian width must be > 0");
    return PulseShape(Kind::gaussian, w, Gaussian{amplitude, center, width});
  }

  static PulseShape constant(double value, Window w) {
    return PulseShape(Kind::constant, w, Constant{value});
  }

  static PulseShape zero(Window w) { return PulseShape(Kind::zero, w, Constant{0.0}); }

  // Uniform-grid samples starting at w.start with spacing dt; cubic Hermite
  // interpolation with finite-difference slopes.
  static PulseShape tabulated(std::vector<double> samples, double t_start, double dt) {
    if (samples.size() < 2 || !(dt > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "tabulated pulse needs >= 2 samples and dt > 0");
    }
    const Window w{t_start, t_start + dt * static_cast<double>(samples.size() - 1)};
    return PulseShape(Kind::tabulated, w, Tabulated::make(std::move(samples), t_start, dt));
  }

  // Samples an arbitrary pulse onto a grid.
  static PulseShape tabulate(const PulseShape& src, std::size_t n) {
    if (n < 2) throw Error(ErrorCode::invalid_argument, "tabulate needs n >= 2");
    const Window w = src.window();
    const double dt = w.duration() / static_cast<double>(n - 1);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = src.value(w.start + dt * static_cast<double>(i));
    return tabulated(std::move(s), w.start, dt);
  }

  // Closure-backed pulse; missing derivatives fall back to 5-point differences.
  static PulseShape derived(Fn f, Fn df, Fn d2f, Window w) {
    return PulseShape(Kind::derived, w, Derived{std::move(f), std::move(df), std::move(d2f)});
  }

  Kind kind() const noexcept { return kind_; }
  const Window& window() const noexcept { return window_; }

  double value(double t) const { return scale_ * eval(map(t), 0); }
  double derivative(double t) const { return scale_ * time_sign_ * eval(map(t), 1); }
  double second_derivative(double t) const { return scale_ * eval(map(t), 2); }

  PulseShape scaled(double factor) const {
    PulseShape p = *this;
    p.scale_ *= factor;
    if (factor == 0.0) p.kind_ = Kind::zero;
    return p;
  }

  // t -> window.start + window.end - t.
  PulseShape time_reversed() const {
    PulseShape p = *this;
    p.time_sign_ = -time_sign_;
    p.time_offset_ = time_offset_ + time_sign_ * (window_.start + window_.end);
    return p;
  }

  PulseShape with_window(Window w) const {
    PulseShape p = *this;
    p.window_ = w;
    return p;
  }

  bool is_zero() const noexcept { return kind_ == Kind::zero; }

 private:
  struct AeAmplitude {
    double amp;
    double k;
  };
  struct AeDetuning {
    double amp;
    double k;
  };
  struct Gaussian {
    double amp;
    double center;
    double width;
  };
  struct Constant {
    double value;
  };
  struct Tabulated {
    std::shared_ptr<const std::vector<double>> y;
    std::shared_ptr<const std::vector<double>> slope;
    double t0;
    double dt;

    static Tabulated make(std::vector<double> y, double t0, double dt) {
      const std::size_t n = y.size();
      std::vector<double> m(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
          m[i] = (y[1] - y[0]) / dt;
        } else if (i == n - 1) {
          m[i] = (y[n - 1] - y[n - 2]) / dt;
        } else {
          m[i] = (y[i + 1] - y[i - 1]) / (2.0 * dt);
        }
      }
      return {std::make_shared<const std::vector<double>>(std::move(y)),
              std::make_shared<const std::vector<double>>(std::move(m)), t0, dt};
    }
  };
  struct Derived {
    Fn f;
    Fn df;
    Fn d2f;
  };
  using Impl = std::variant<AeAmplitude, AeDetuning, Gaussian, Constant, Tabulated, Derived>;

  PulseShape(Kind kind, Window w, Impl impl) : kind_(kind), window_(w), impl_(std::move(impl)) {}

  double map(double t) const noexcept { return time_sign_ * t + time_offset_; }

  static double fd(const Fn& f, double t) {
    constexpr double h = 1e-4;
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
  }

  double eval(double t, int order) const {
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, AeAmplitude>) {
            const double x = s.k * t;
            const double se = sech(x);
            const double th = std::tanh(x);
            if (order == 0) return s.amp * se;
            if (order == 1) return -s.amp * s.k * se * th;
            return s.amp * s.k * s.k * se * (th * th - se * se);
          } else if constexpr (std::is_same_v<S, AeDetuning>) {
            const double x = s.k * t;
            const double se = sech(x);
            const double th = std::tanh(x);
            if (order == 0) return s.amp * th;
            if (order == 1) return s.amp * s.k * se * se;
            return -2.0 * s.amp * s.k * s.k * se * se * th;
          } else if constexpr (std::is_same_v<S, Gaussian>) {
            const double u = t - s.center;
            const double w2 = s.width * s.width;
            const double v = s.amp * std::exp(-u * u / w2);
            if (order == 0) return v;
            if (order == 1) return -2.0 * u / w2 * v;
            return (4.0 * u * u / (w2 * w2) - 2.0 / w2) * v;
          } else if constexpr (std::is_same_v<S, Constant>) {
            return order == 0 ? s.value : 0.0;
          } else if constexpr (std::is_same_v<S, Tabulated>) {
            return eval_tabulated(s, t, order);
          } else {
            if (order == 0) return s.f(t);
            if (order == 1) return s.df ? s.df(t) : fd(s.f, t);
            if (s.d2f) return s.d2f(t);
            if (s.df) return fd(s.df, t);
            constexpr double h = 1e-3;
            return (s.f(t + h) - 2 * s.f(t) + s.f(t - h)) / (h * h);
          }
        },
        impl_);
  }

  static double eval_tabulated(const Tabulated& s, double t, int order) {
    const auto& y = *s.y;
    const auto& m = *s.slope;
    const std::size_t n = y.size();
    const double x = (t - s.t0) / s.dt;
    if (x < 0.0) return order == 0 ? y.front() : 0.0;
    if (x > static_cast<double>(n - 1)) return order == 0 ? y.back() : 0.0;
    const auto i = std::min(static_cast<std::size_t>(x), n - 2);
    const double u = x - static_cast<double>(i);
    const double h = s.dt;
    const double y0 = y[i], y1 = y[i + 1], m0 = m[i] * h, m1 = m[i + 1] * h;
    if (order == 0) {
      const double h00 = 2 * u * u * u - 3 * u * u + 1;
      const double h10 = u * u * u - 2 * u * u + u;
      const double h01 = -2 * u * u * u + 3 * u * u;
      const double h11 = u * u * u - u * u;
      return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
    }
    if (order == 1) {
      const double d00 = 6 * u * u - 6 * u;
      const double d10 = 3 * u * u - 4 * u + 1;
      const double d01 = -6 * u * u + 6 * u;
      const double d11 = 3 * u * u - 2 * u;
      return (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
    }
    const double s00 = 12 * u - 6;
    const double s10 = 6 * u - 4;
    const double s01 = -12 * u + 6;
    const double s11 = 6 * u - 2;
    return (s00 * y0 + s10 * m0 + s01 * y1 + s11 * m1) / (h * h);
  }

  Kind kind_;
  Window window_;
  Impl impl_;
  double scale_ = 1.0;
  double time_sign_ = 1.0;
  double time_offset_ = 0.0;
};

// (Omega-like coupling, Delta-like detuning) sharing one window.
struct PulsePair {
  PulseShape coupling;
  PulseShape detuning;

  PulsePair(PulseShape c, PulseShape d) : coupling(std::move(c)), detuning(std::move(d)) {
    if (!(coupling.window() == detuning.window())) {
      throw Error(ErrorCode::invalid_argument, "pulse pair windows differ");
    }
  }

  const Window& window() const noexcept { return coupling.window(); }
};

inline PulsePair ae_pair(double omega0, double beta, double t0, double half_width_factor = default_ae_halfwidth) {
  const Window w = symmetric_window(half_width_factor * t0);
  return {PulseShape::ae_amplitude(omega0, t0, w), PulseShape::ae_detuning(beta, t0, w)};
}

// Half of atan2(coupling, detuning): 0 for large positive detuning,
// pi/2 for large negative detuning.
inline double mixing_angle(double coupling, double detuning) {
  if (coupling == 0.0 && detuning == 0.0) {
    throw Error(ErrorCode::undefined_angle, "mixing angle undefined: coupling and detuning both zero");
  }
  return 0.5 * std::atan2(coupling, detuning);
}

// Branch-tracked mixing angle along a pulse trajectory: consecutive samples
// are unwrapped so the half-angle never jumps by pi/2.
inline std::vector<double> mixing_angle_trajectory(const PulsePair& pair, const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  double offset = 0.0;
  double prev_full = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double full =
        2.0 * mixing_angle(pair.coupling.value(times[i]), pair.detuning.value(times[i]));
    if (i > 0) {
      const double jump = full - prev_full;
      if (jump > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      if (jump < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
    }
    prev_full = full;
    out.push_back(0.5 * (full + offset));
  }
  return out;
}

}  // namespace noon
