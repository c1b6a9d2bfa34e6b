#pragma once

// Geodesic flow, exponential map, Jacobi fields and conjugate points.
// Geodesics live in the universal cover; θ is never wrapped here.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lorkam/errors.hpp"
#include "lorkam/ode/dopri5.hpp"
#include "lorkam/spacetime.hpp"
#include "lorkam/types.hpp"

namespace lorkam {

/// Geodesic state (x, u) followed by up to three variational pairs (δx, δu).
using FlowState = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 24, 1>;

enum class Termination { Horizon, DomainBoundary };

inline const char* to_string(Termination t) {
  return t == Termination::Horizon ? "horizon" : "domain_boundary";
}

namespace detail {

inline FlowState flow_rhs(const Spacetime& s, int fields, const FlowState& y) {
  const int n = s.dim;
  FlowState dy(y.size());
  const double t = y[0];
  Vec u = y.segment(n, n);
  dy.segment(0, n) = u;
  dy.segment(n, n) = geodesic_acceleration(s, t, u);
  for (int i = 0; i < fields; ++i) {
    const int off = 2 * n + 2 * n * i;
    Vec dx = y.segment(off, n);
    Vec du = y.segment(off + n, n);
    dy.segment(off, n) = du;
    dy.segment(off + n, n) = variational_acceleration(s, t, u, dx, du);
  }
  return dy;
}

struct FlowOutcome {
  double s_reached = 0.0;  // affine parameter where integration ended
  bool hit_boundary = false;
  bool stopped = false;  // user predicate asked to stop
  double energy_drift = 0.0;
  FlowState y_end;
};

/// First parameter in seg where the time coordinate leaves the domain, if any.
inline std::optional<double> domain_exit(const Spacetime& s, const ode::DenseSegment<FlowState>& seg) {
  if (!s.bounded_time()) return std::nullopt;
  constexpr int kProbe = 8;
  double good = seg.t0;
  for (int i = 1; i <= kProbe; ++i) {
    const double p = seg.t0 + seg.h * i / kProbe;
    if (!s.in_domain(seg.eval(p)[0])) {
      double lo = good, hi = p;
      for (int k = 0; k < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++k) {
        const double mid = 0.5 * (lo + hi);
        (s.in_domain(seg.eval(mid)[0]) ? lo : hi) = mid;
      }
      return hi;
    }
    good = p;
  }
  return std::nullopt;
}

/// Integrate the flow on [0, s_end] from y0, clipping at the domain boundary.
/// `stop(seg)` may end the integration early (event location is up to the caller).
template <class Stop>
FlowOutcome run_flow(const Spacetime& s, const FlowState& y0, int fields, double s_end, double tol,
                     ode::DenseTrajectory<FlowState>* traj, Stop&& stop) {
  FlowOutcome out;
  out.y_end = y0;
  if (s_end <= 0.0) return out;
  const int n = s.dim;
  const double e0 = g_dot(s, y0[0], y0.segment(n, n), y0.segment(n, n));
  ode::Dopri5Options opt;
  opt.rtol = tol;
  opt.atol = tol;
  auto rhs = [&](double, const FlowState& y) { return flow_rhs(s, fields, y); };
  auto obs = [&](const ode::DenseSegment<FlowState>& seg) {
    if (auto exit = domain_exit(s, seg)) {
      if (traj) traj->push(seg);
      out.hit_boundary = true;
      out.s_reached = *exit;
      out.y_end = seg.eval(*exit);
      if (traj) traj->truncate(*exit);
      return false;
    }
    if (traj) traj->push(seg);
    const FlowState y1 = seg.eval(seg.t1());
    const Vec u = y1.segment(n, n);
    out.energy_drift = std::max(out.energy_drift, std::abs(g_dot(s, y1[0], u, u) - e0));
    if (stop(seg)) {
      out.stopped = true;
      return false;
    }
    return true;
  };
  auto res = ode::integrate(rhs, 0.0, y0, s_end, opt, obs);
  if (!out.hit_boundary) {
    out.s_reached = res.t;
    out.y_end = res.y;
  }
  return out;
}

inline FlowState pack(const Vec& x, const Vec& u) {
  const auto n = x.size();
  FlowState y(2 * n);
  y << x, u;
  return y;
}

}  // namespace detail

/// Integrated geodesic with dense output on [t_min, t_max].
struct GeodesicRecord {
  Spacetime spec;
  ChartPoint x0;
  TangentVector v0;
  double t_min = 0.0;
  double t_max = 0.0;
  Termination terminated_by = Termination::Horizon;
  Termination terminated_by_past = Termination::Horizon;
  double energy0 = 0.0;
  double energy_drift = 0.0;
  double tol = 1e-10;
  ode::DenseTrajectory<FlowState> forward;
  ode::DenseTrajectory<FlowState> backward;  // parameter -t, velocity negated

  [[nodiscard]] bool contains(double t) const { return t >= t_min && t <= t_max; }

  /// (position, velocity) at parameter t.
  [[nodiscard]] FlowState state(double t) const {
    if (!contains(t))
      throw DomainExceeded(t > 0 ? t_max : t_min,
                           "parameter " + std::to_string(t) + " outside integrated domain");
    const int n = spec.dim;
    if (t >= 0.0) {
      if (forward.empty()) return detail::pack(x0.coords, v0.components);
      return forward.eval(t);
    }
    FlowState y = backward.eval(-t);
    y.segment(n, n) = -y.segment(n, n);
    return y;
  }
  [[nodiscard]] ChartPoint position(double t) const {
    return ChartPoint(Vec(state(t).segment(0, spec.dim)));
  }
  [[nodiscard]] TangentVector velocity(double t) const {
    return TangentVector(Vec(state(t).segment(spec.dim, spec.dim)));
  }
  [[nodiscard]] double energy(double t) const {
    FlowState y = state(t);
    const int n = spec.dim;
    return g_dot(spec, y[0], y.segment(n, n), y.segment(n, n));
  }
};

/// Integrate the geodesic through (x0, v0) on [t_span.first, t_span.second] (t_span.first <= 0).
inline GeodesicRecord integrate_geodesic(const Spacetime& spec, const ChartPoint& x0,
                                         const TangentVector& v0,
                                         std::pair<double, double> t_span, double tol = 1e-10) {
  if (!(tol > 0.0)) throw ConfigError("integrate_geodesic: tol must be positive");
  if (t_span.first > 0.0 || t_span.second < 0.0)
    throw ConfigError("integrate_geodesic: t_span must contain 0");
  check_point(spec, x0);
  check_dim(spec, v0.components, "velocity");
  GeodesicRecord g;
  g.spec = spec;
  g.x0 = x0;
  g.v0 = v0;
  g.tol = tol;
  g.energy0 = g_dot(spec, x0.t(), v0.components, v0.components);
  auto never = [](const auto&) { return false; };

  auto fw = detail::run_flow(spec, detail::pack(x0.coords, v0.components), 0, t_span.second, tol,
                             &g.forward, never);
  g.t_max = fw.hit_boundary ? fw.s_reached : t_span.second;
  g.terminated_by = fw.hit_boundary ? Termination::DomainBoundary : Termination::Horizon;

  auto bw = detail::run_flow(spec, detail::pack(x0.coords, Vec(-v0.components)), 0, -t_span.first,
                             tol, &g.backward, never);
  g.t_min = bw.hit_boundary ? -bw.s_reached : t_span.first;
  g.terminated_by_past = bw.hit_boundary ? Termination::DomainBoundary : Termination::Horizon;
  g.energy_drift = std::max(fw.energy_drift, bw.energy_drift);
  return g;
}

/// exp_x(t v) for t >= 0, or for t < 0 along the past extension.
inline ChartPoint exp_map(const Spacetime& spec, const ChartPoint& x, const TangentVector& v,
                          double t, double tol = 1e-10) {
  check_point(spec, x);
  check_dim(spec, v.components, "velocity");
  if (t == 0.0) return x;
  const double sgn = t > 0 ? 1.0 : -1.0;
  auto never = [](const auto&) { return false; };
  auto out = detail::run_flow(spec, detail::pack(x.coords, Vec(sgn * v.components)), 0,
                              std::abs(t), tol, nullptr, never);
  if (out.hit_boundary)
    throw DomainExceeded(sgn * out.s_reached, "geodesic leaves the time domain at parameter " +
                                                  std::to_string(sgn * out.s_reached));
  return ChartPoint(Vec(out.y_end.segment(0, spec.dim)));
}

/// Jacobi fields along a geodesic. Columns of J0 / J0p are initial values
/// and initial covariant derivatives.
struct JacobiRecord {
  GeodesicRecord along;
  int fields = 1;
  ode::DenseTrajectory<FlowState> traj;
  double t_max = 0.0;

  [[nodiscard]] Mat J(double t) const {
    FlowState y = state_at(t);
    const int n = along.spec.dim;
    Mat m(n, fields);
    for (int i = 0; i < fields; ++i) m.col(i) = y.segment(2 * n + 2 * n * i, n);
    return m;
  }
  /// Covariant derivative D J / dt = δu + Γ(γ̇, J).
  [[nodiscard]] Mat J_prime(double t) const {
    FlowState y = state_at(t);
    const int n = along.spec.dim;
    Vec u = y.segment(n, n);
    Mat m(n, fields);
    for (int i = 0; i < fields; ++i) {
      const int off = 2 * n + 2 * n * i;
      Vec dx = y.segment(off, n);
      m.col(i) = Vec(y.segment(off + n, n)) + connection(along.spec, y[0], u, dx);
    }
    return m;
  }
  /// Coordinate derivative of J (what the variational system integrates).
  [[nodiscard]] Mat J_dot(double t) const {
    FlowState y = state_at(t);
    const int n = along.spec.dim;
    Mat m(n, fields);
    for (int i = 0; i < fields; ++i) m.col(i) = y.segment(2 * n + 2 * n * i + n, n);
    return m;
  }
  /// det[J_1..J_n] when there are n fields, det[γ̇, J_1..J_{n-1}] with n-1
  /// fields, otherwise the Gram determinant of the fields.
  [[nodiscard]] double det_track(double t) const {
    FlowState y = state_at(t);
    const int n = along.spec.dim;
    Mat m = J(t);
    if (fields == n) return m.determinant();
    if (fields == n - 1) {
      Mat full(n, n);
      full.col(0) = y.segment(n, n);
      full.rightCols(n - 1) = m;
      return full.determinant();
    }
    return (m.transpose() * m).determinant();
  }

 private:
  [[nodiscard]] FlowState state_at(double t) const {
    if (t < 0.0 || t > t_max)
      throw DomainExceeded(t_max, "Jacobi field evaluated outside [0, " + std::to_string(t_max) + "]");
    if (traj.empty()) throw ConvergenceFailure("empty Jacobi trajectory");
    return traj.eval(t);
  }
};

inline JacobiRecord jacobi_transport(const Spacetime& spec, const GeodesicRecord& geo, const Mat& J0,
                                     const Mat& J0p) {
  const int n = spec.dim;
  if (J0.rows() != n || J0p.rows() != n || J0.cols() != J0p.cols() || J0.cols() < 1 ||
      J0.cols() > n)
    throw ConfigError("jacobi_transport: initial data must be dim x m with 1 <= m <= dim");
  const int m = static_cast<int>(J0.cols());
  FlowState y0(2 * n + 2 * n * m);
  y0.segment(0, n) = geo.x0.coords;
  y0.segment(n, n) = geo.v0.components;
  for (int i = 0; i < m; ++i) {
    const int off = 2 * n + 2 * n * i;
    Vec j0 = J0.col(i);
    y0.segment(off, n) = j0;
    y0.segment(off + n, n) = Vec(J0p.col(i)) - connection(spec, geo.x0.t(), geo.v0.components, j0);
  }
  JacobiRecord r;
  r.along = geo;
  r.fields = m;
  auto never = [](const auto&) { return false; };
  auto out = detail::run_flow(spec, y0, m, geo.t_max, geo.tol, &r.traj, never);
  r.t_max = out.hit_boundary ? out.s_reached : geo.t_max;
  return r;
}

inline JacobiRecord jacobi_transport(const Spacetime& spec, const GeodesicRecord& geo,
                                     const TangentVector& J0, const TangentVector& J0p) {
  return jacobi_transport(spec, geo, Mat(J0.components), Mat(J0p.components));
}

struct ConjugateResult {
  std::optional<double> t_star;
  bool tangential = false;
  double scanned_to = 0.0;
};

/// First zero of det[J_i]/t^n for J(0)=0, J'(0)=e_i, scanned over (0, horizon].
inline ConjugateResult first_conjugate_detail(const Spacetime& spec, const ChartPoint& x,
                                              const TangentVector& v, double horizon,
                                              double tol = 1e-8) {
  if (!(horizon > 0.0)) throw ConfigError("first_conjugate_time: horizon must be positive");
  const auto cls = causal_class(spec, x, v);
  if (cls == CausalityClass::Spacelike || cls == CausalityClass::Zero)
    throw NotCausallyRelated("first_conjugate_time: direction is not causal");
  check_point(spec, x);
  const int n = spec.dim;
  FlowState y0 = FlowState::Zero(2 * n + 2 * n * n);
  y0.segment(0, n) = x.coords;
  y0.segment(n, n) = v.components;
  for (int i = 0; i < n; ++i) y0[2 * n + 2 * n * i + n + i] = 1.0;

  ode::DenseTrajectory<FlowState> traj;
  auto never = [](const auto&) { return false; };
  auto out = detail::run_flow(spec, y0, n, horizon, std::min(1e-10, tol * 1e-2), &traj, never);
  const double end = out.hit_boundary ? out.s_reached : horizon;

  auto det_scaled = [&](double t) {
    FlowState y = traj.eval(t);
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.col(i) = y.segment(2 * n + 2 * n * i, n);
    return m.determinant() / std::pow(t, n);
  };

  ConjugateResult res;
  res.scanned_to = end;
  // Sample each accepted step at several interior points.
  std::vector<double> ts;
  for (const auto& seg : traj.segments()) {
    for (int k = 1; k <= 8; ++k) {
      const double t = seg.t0 + seg.h * k / 8.0;
      if (t > end) break;
      ts.push_back(t);
    }
  }
  double t_prev = 0.0, f_prev = 1.0;
  double scale = 1.0;
  for (double t : ts) {
    if (t <= 0.0) continue;
    const double f = det_scaled(t);
    scale = std::max(scale, std::abs(f));
    if (f == 0.0 || (f > 0) != (f_prev > 0)) {
      double lo = t_prev, hi = t;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = mid > 0 ? det_scaled(mid) : 1.0;
        ((fm > 0) == (f_prev > 0) ? lo : hi) = mid;
      }
      res.t_star = 0.5 * (lo + hi);
      return res;
    }
    // tangential touch: tiny |det| at a local minimum without a sign change
    if (std::abs(f) < 1e-9 * scale && t_prev > 0.0) {
      res.t_star = t;
      res.tangential = true;
      return res;
    }
    t_prev = t;
    f_prev = f;
  }
  if (out.hit_boundary)
    throw DomainExceeded(end, "no conjugate point before the geodesic leaves the domain at " +
                                  std::to_string(end));
  return res;
}

inline std::optional<double> first_conjugate_time(const Spacetime& spec, const ChartPoint& x,
                                                  const TangentVector& v, double horizon,
                                                  double tol = 1e-8) {
  return first_conjugate_detail(spec, x, v, horizon, tol).t_star;
}

}  // namespace lorkam
