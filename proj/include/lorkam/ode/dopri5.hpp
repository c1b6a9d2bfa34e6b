#pragma once

// Dormand-Prince 5(4) with the order-4 continuous extension of Hairer,
// Norsett & Wanner (Solving ODEs I, routine DOPRI5). Every accepted step
// is handed to an observer as a self-contained interpolant, so callers can
// keep the whole trajectory or locate events inside a step.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lorkam/errors.hpp"

namespace lorkam::ode {

struct Dopri5Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 selects a heuristic first step
  double h_max = 0.0;   // 0 means unbounded
  double h_min = 1e-14; // relative to the span
  long max_steps = 200000;
};

/// Interpolant of one accepted step on [t0, t0 + h].
template <class State>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  State r1, r2, r3, r4, r5;

  [[nodiscard]] double t1() const { return t0 + h; }

  [[nodiscard]] State eval(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
  }

  /// Derivative of the interpolant with respect to t.
  [[nodiscard]] State deriv(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    // d/ds of r1 + s r2 + s s1 r3 + s^2 s1 r4 + s^2 s1^2 r5
    State d = r2 + (1.0 - 2.0 * s) * r3 + (2.0 * s * s1 - s * s) * r4 +
              (2.0 * s * s1 * s1 - 2.0 * s * s * s1) * r5;
    return d / h;
  }
};

enum class StopReason { ReachedEnd, Observer };

template <class State>
struct IntegrationResult {
  StopReason reason = StopReason::ReachedEnd;
  double t = 0.0;
  State y;
  long steps = 0;
  long rejected = 0;
};

namespace detail {

template <class State>
double rms_error(const State& err, const State& y0, const State& y1, double rtol, double atol) {
  const auto n = err.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sk;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace detail

/// Integrate y' = f(t, y) from t0 to t_end (t_end > t0). The observer is
/// called with each accepted step and returns false to stop early.
template <class State, class Rhs, class Observer>
IntegrationResult<State> integrate(Rhs&& f, double t0, const State& y0, double t_end,
                                   const Dopri5Options& opt, Observer&& observer) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  IntegrationResult<State> res;
  res.t = t0;
  res.y = y0;
  const double span = t_end - t0;
  if (!(span > 0.0)) return res;

  State y = y0;
  double t = t0;
  State k1 = f(t, y);

  double h = opt.h_init > 0.0 ? opt.h_init : 0.01 * span;
  const double h_max = opt.h_max > 0.0 ? opt.h_max : span;
  const double h_min = opt.h_min * std::max(1.0, std::abs(span));
  h = std::min(h, h_max);

  DenseSegment<State> seg;
  while (t < t_end) {
    if (res.steps + res.rejected >= opt.max_steps)
      throw StepFailure("dopri5: step budget exhausted at t=" + std::to_string(t));
    bool last = false;
    if (t + h >= t_end || t + 1.0001 * h >= t_end) {
      h = t_end - t;
      last = true;
    }
    State k2 = f(t + c2 * h, y + h * (a21 * k1));
    State k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    State k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    State k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    State k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    State y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    State k7 = f(t + h, y1);
    State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = detail::rms_error(err, y, y1, opt.rtol, opt.atol);

    if (!std::isfinite(en)) {
      h *= 0.25;
      ++res.rejected;
      if (h < h_min) throw StepFailure("dopri5: non-finite state near t=" + std::to_string(t));
      continue;
    }
    if (en <= 1.0) {
      seg.t0 = t;
      seg.h = h;
      seg.r1 = y;
      seg.r2 = y1 - y;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      t = last ? t_end : t + h;
      y = y1;
      k1 = k7;
      ++res.steps;
      res.t = t;
      res.y = y;
      if (!observer(seg)) {
        res.reason = StopReason::Observer;
        return res;
      }
      const double fac = en == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 10.0);
      h = std::min(h * fac, h_max);
    } else {
      ++res.rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      if (h < h_min) throw StepFailure("dopri5: step size underflow near t=" + std::to_string(t));
    }
  }
  res.reason = StopReason::ReachedEnd;
  return res;
}

/// Piecewise interpolant assembled from accepted steps.
template <class State>
class DenseTrajectory {
 public:
  void push(const DenseSegment<State>& s) { segs_.push_back(s); }
  [[nodiscard]] bool empty() const { return segs_.empty(); }
  [[nodiscard]] double t_begin() const { return segs_.front().t0; }
  [[nodiscard]] double t_end() const { return segs_.back().t1(); }
  [[nodiscard]] const std::vector<DenseSegment<State>>& segments() const { return segs_; }

  [[nodiscard]] const DenseSegment<State>& segment_at(double t) const {
    auto it = std::upper_bound(segs_.begin(), segs_.end(), t,
                               [](double v, const DenseSegment<State>& s) { return v < s.t0; });
    if (it != segs_.begin()) --it;
    return *it;
  }
  [[nodiscard]] State eval(double t) const { return segment_at(t).eval(t); }

  /// Drop everything after t (t must lie inside the last kept segment).
  void truncate(double t) {
    while (segs_.size() > 1 && segs_.back().t0 >= t) segs_.pop_back();
    trunc_ = t;
  }
  [[nodiscard]] double truncated_end() const { return trunc_ ? *trunc_ : t_end(); }

 private:
  std::vector<DenseSegment<State>> segs_;
  std::optional<double> trunc_;
};

}  // namespace lorkam::ode
