#pragma once

// Two-point boundary value problem for causal geodesics, Lorentzian
// distance, the action kernel c_t and the NU predicate.
//
// In dimension 2 every future causal geodesic from x is a graph over the
// time coordinate, so it is shot level-to-level: directions u = (1, w/a(t_x)),
// w in [-1, 1], are integrated in coordinate time up to t_y, and each lift
// Θ_k of the target angle is solved for by bracketing plus a 1D root.
// Dimension 3 (Minkowski) uses Newton multi-start on the full exp map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "lorkam/errors.hpp"
#include "lorkam/geodesic.hpp"
#include "lorkam/ode/dopri5.hpp"
#include "lorkam/spacetime.hpp"
#include "lorkam/types.hpp"

namespace lorkam {

enum class Relation { Chronological, CausalNull, None };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::Chronological: return "chronological";
    case Relation::CausalNull: return "causal-null";
    case Relation::None: return "none";
  }
  return "?";
}

struct ConnectOptions {
  int n_dirs = 65;
  double integrator_tol = 1e-12;
  double separation = 1e-4;     // relative distinctness threshold on v
  double residual_accept = 1e-9;  // relative to 1 + d_h(x, y)
  double value_tol = 1e-8;      // relative to 1 + d
  int newton_max_iter = 40;
  int multistarts = 6;  // dim 3 only
  bool verify_with_exp = true;
};

/// One causal geodesic from x to a lift of y, parametrised on [0, 1].
struct Candidate {
  TangentVector v;      // initial velocity at x
  TangentVector v_end;  // velocity at y
  double length = 0.0;
  long winding = 0;  // lift index relative to the lift of y nearest x
  double residual = 0.0;
  CausalityClass cls = CausalityClass::Zero;
  ChartPoint target;  // lifted endpoint in the universal cover
  double w = 0.0;     // dim-2 direction parameter
};

struct MaximizerSet {
  ChartPoint x, y;
  Relation relation = Relation::None;
  double d = 0.0;
  std::vector<Candidate> maximizers;
  std::vector<Candidate> candidates;  // every causal geodesic found, maximizing or not

  [[nodiscard]] std::size_t multiplicity() const { return maximizers.size(); }
};

namespace detail {

/// Result of shooting direction w from level t_x to level t_y.
struct LevelShot {
  double s = 0.0;      // affine parameter at arrival for u0 = (1, w/a(t_x))
  double theta = 0.0;  // arrival angle in the cover
  double p = 1.0, q = 0.0;  // arrival velocity for u0
  double dtheta_dw = 0.0;
  double ds_dw = 0.0;
};

using LevelState = Eigen::Matrix<double, 8, 1>;

/// d/dt of (s, θ, u_t, u_θ) and of its w-derivative.
inline LevelState level_rhs(const Spacetime& sp, double t, const LevelState& z) {
  const double a = sp.a(t), da = sp.da(t);
  const double p = z[2], q = z[3];
  const double ds = z[4], dp = z[6], dq = z[7];
  LevelState r;
  r[0] = 1.0 / p;
  r[1] = q / p;
  r[2] = -a * da * q * q / p;
  r[3] = -2.0 * (da / a) * q;
  r[4] = -dp / (p * p);
  r[5] = dq / p - q * dp / (p * p);
  r[6] = -2.0 * a * da * q * dq / p + a * da * q * q * dp / (p * p);
  r[7] = -2.0 * (da / a) * dq;
  (void)ds;
  return r;
}

inline LevelShot shoot_level(const Spacetime& sp, double tx, double thx, double ty, double w,
                             double tol) {
  const double a0 = sp.a(tx);
  const double q0 = w / a0;
  const double dt = ty - tx;
  LevelShot r;
  if (sp.flat() || dt == 0.0) {
    r.s = dt;
    r.theta = thx + q0 * dt;
    r.p = 1.0;
    r.q = q0;
    r.dtheta_dw = dt / a0;
    r.ds_dw = 0.0;
    return r;
  }
  LevelState z0;
  z0 << 0.0, thx, 1.0, q0, 0.0, 0.0, 0.0, 1.0 / a0;
  ode::Dopri5Options opt;
  opt.rtol = tol;
  opt.atol = tol;
  auto rhs = [&](double t, const LevelState& z) { return level_rhs(sp, t, z); };
  auto obs = [](const ode::DenseSegment<LevelState>&) { return true; };
  auto res = ode::integrate(rhs, tx, z0, ty, opt, obs);
  r.s = res.y[0];
  r.theta = res.y[1];
  r.p = res.y[2];
  r.q = res.y[3];
  r.ds_dw = res.y[4];
  r.dtheta_dw = res.y[5];
  return r;
}

inline double causal_length(const Spacetime& sp, const ChartPoint& x, const Vec& v) {
  return std::sqrt(std::max(0.0, -g_dot(sp, x.t(), v, v)));
}

inline Candidate make_candidate_2d(const Spacetime& sp, const ChartPoint& x, double ty, double w,
                                   const LevelShot& sh, double target_theta, double base_theta) {
  const double a0 = sp.a(x.t());
  Candidate c;
  c.w = w;
  c.v = TangentVector{sh.s, sh.s * w / a0};
  c.v_end = TangentVector{sh.s * sh.p, sh.s * sh.q};
  // length from the parametrisation: g(u0,u0) = -(1-w)(1+w)
  c.length = sh.s * std::sqrt(std::max(0.0, (1.0 - w) * (1.0 + w)));
  c.cls = causal_class(sp, x, c.v);
  c.target = ChartPoint{ty, target_theta};
  c.winding = sp.periodic() ? std::lround((target_theta - base_theta) / kTwoPi) : 0;
  c.residual = std::abs(sh.theta - target_theta);
  return c;
}

/// Recompute the residual with an independent affine integration of exp.
inline void verify_candidate(const Spacetime& sp, const ChartPoint& x, Candidate& c,
                             const ConnectOptions& o) {
  if (!o.verify_with_exp) return;
  if (c.cls == CausalityClass::Zero) return;
  ChartPoint e = exp_map(sp, x, c.v, 1.0, o.integrator_tol);
  c.residual = (e.coords - c.target.coords).norm();
}

inline void finalize(const Spacetime& sp, MaximizerSet& ms, const ConnectOptions& o) {
  auto& cs = ms.candidates;
  std::sort(cs.begin(), cs.end(), [](const Candidate& a, const Candidate& b) {
    return std::lexicographical_compare(a.v.components.begin(), a.v.components.end(),
                                        b.v.components.begin(), b.v.components.end());
  });
  // cluster
  std::vector<Candidate> uniq;
  for (const auto& c : cs) {
    bool dup = false;
    for (auto& u : uniq) {
      if ((u.v.components - c.v.components).norm() <= o.separation * (1.0 + u.v.components.norm())) {
        dup = true;
        if (c.residual < u.residual) u = c;
        break;
      }
    }
    if (!dup) uniq.push_back(c);
  }
  cs = std::move(uniq);
  if (cs.empty())
    throw NotCausallyRelated("no future causal geodesic connects the points");
  double d = 0.0;
  for (const auto& c : cs) d = std::max(d, c.length);
  ms.d = d;
  ms.maximizers.clear();
  for (const auto& c : cs)
    if (c.length >= d - o.value_tol * (1.0 + d)) ms.maximizers.push_back(c);
  ms.relation = d > 0.0 ? Relation::Chronological : Relation::CausalNull;
  if (sp.periodic()) {
    for (const auto& m : ms.maximizers)
      if (std::abs(m.winding) >= sp.winding_bound)
        throw WindingBoundExceeded("maximizer winding " + std::to_string(m.winding) +
                                   " reaches the bound K=" + std::to_string(sp.winding_bound));
  }
}

inline void check_residuals(const Spacetime& sp, const MaximizerSet& ms, const ConnectOptions& o) {
  const double accept = o.residual_accept * (1.0 + reference_distance(sp, ms.x, ms.y));
  for (const auto& c : ms.candidates)
    if (!(c.residual <= accept))
      throw ConvergenceFailure("shooting residual " + fmt_g(c.residual) +
                               " above acceptance " + fmt_g(accept) + " (winding " +
                               std::to_string(c.winding) + ")");
}

/// Solve θ(w) = target on [lo, hi] given a sign change.
inline std::optional<std::pair<double, LevelShot>> solve_w(const Spacetime& sp, const ChartPoint& x,
                                                           double ty, double target, double lo,
                                                           double hi, double flo, double fhi,
                                                           const ConnectOptions& o) {
  auto f = [&](double w) {
    return shoot_level(sp, x.t(), x[1], ty, w, o.integrator_tol).theta - target;
  };
  std::uintmax_t it = 100;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
  double w = 0.5 * (a + b);
  LevelShot sh = shoot_level(sp, x.t(), x[1], ty, w, o.integrator_tol);
  // Newton polish on the exact derivative
  for (int k = 0; k < 4; ++k) {
    const double r = sh.theta - target;
    if (r == 0.0 || sh.dtheta_dw == 0.0) break;
    const double wn = std::clamp(w - r / sh.dtheta_dw, lo, hi);
    LevelShot sn = shoot_level(sp, x.t(), x[1], ty, wn, o.integrator_tol);
    if (std::abs(sn.theta - target) >= std::abs(r)) break;
    w = wn;
    sh = sn;
  }
  return std::make_pair(w, sh);
}

inline MaximizerSet connect_2d(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                               const ConnectOptions& o) {
  MaximizerSet ms;
  ms.x = x;
  ms.y = y;
  const double dt = y.t() - x.t();
  const double base = sp.periodic() ? x[1] + wrap_angle(y[1] - x[1]) : y[1];
  const double accept = o.residual_accept * (1.0 + reference_distance(sp, x, y));
  if (dt < 0.0) throw NotCausallyRelated("target lies in the past of the source");
  if (dt == 0.0) {
    if (std::abs(base - x[1]) <= accept) {
      Candidate c;
      c.v = TangentVector(Vec::Zero(2));
      c.v_end = c.v;
      c.cls = CausalityClass::Zero;
      c.target = ChartPoint{y.t(), x[1]};
      ms.candidates.push_back(c);
      finalize(sp, ms, o);
      return ms;
    }
    throw NotCausallyRelated("distinct points on the same time level");
  }

  const int n = std::max(2, o.n_dirs);
  std::vector<double> ws(n), th(n);
  for (int i = 0; i < n; ++i) {
    ws[i] = -1.0 + 2.0 * i / (n - 1);
    th[i] = shoot_level(sp, x.t(), x[1], y.t(), ws[i], o.integrator_tol).theta;
  }
  const int K = sp.periodic() ? sp.winding_bound : 0;
  for (int k = -K; k <= K; ++k) {
    const double target = base + kTwoPi * k;
    std::vector<double> roots;
    auto add = [&](double w, const LevelShot& sh) {
      for (double r : roots)
        if (std::abs(r - w) <= 1e-12) return;
      roots.push_back(w);
      Candidate c = make_candidate_2d(sp, x, y.t(), w, sh, target, base);
      verify_candidate(sp, x, c, o);
      ms.candidates.push_back(c);
    };
    // direct hits on scan directions need a tenth of the acceptance so that
    // the independent exp check has room for integration error
    const double hit = 0.1 * accept;
    for (int i = 0; i < n; ++i) {
      const double r = th[i] - target;
      if (std::abs(r) <= hit) {
        add(ws[i], shoot_level(sp, x.t(), x[1], y.t(), ws[i], o.integrator_tol));
        continue;
      }
      if (i + 1 < n) {
        const double r1 = th[i + 1] - target;
        if (std::abs(r1) > hit && (r < 0) != (r1 < 0)) {
          if (auto sol = solve_w(sp, x, y.t(), target, ws[i], ws[i + 1], r, r1, o))
            add(sol->first, sol->second);
        }
      }
    }
  }
  if (ms.candidates.empty()) throw NotCausallyRelated("all lifts of the target are acausal");
  finalize(sp, ms, o);
  check_residuals(sp, ms, o);
  return ms;
}

/// exp_x(v) and its differential at v (parameter 1).
inline std::pair<Vec, Mat> exp_with_jacobian(const Spacetime& sp, const ChartPoint& x, const Vec& v,
                                             double tol) {
  const int n = sp.dim;
  if (sp.flat()) return {Vec(x.coords + v), Mat::Identity(n, n)};
  FlowState y0 = FlowState::Zero(2 * n + 2 * n * n);
  y0.segment(0, n) = x.coords;
  y0.segment(n, n) = v;
  for (int i = 0; i < n; ++i) y0[2 * n + 2 * n * i + n + i] = 1.0;
  auto never = [](const auto&) { return false; };
  auto out = run_flow(sp, y0, n, 1.0, tol, nullptr, never);
  if (out.hit_boundary) throw DomainExceeded(out.s_reached, "shooting leaves the time domain");
  Mat J(n, n);
  for (int i = 0; i < n; ++i) J.col(i) = out.y_end.segment(2 * n + 2 * n * i, n);
  return {Vec(out.y_end.segment(0, n)), J};
}

inline MaximizerSet connect_newton(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                   const ConnectOptions& o) {
  MaximizerSet ms;
  ms.x = x;
  ms.y = y;
  const int n = sp.dim;
  const Vec Y = y.coords;
  const Vec delta = Y - x.coords;
  if (delta[0] < 0.0) throw NotCausallyRelated("target lies in the past of the source");
  const double accept = o.residual_accept * (1.0 + reference_distance(sp, x, y));
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Vec> starts{delta};
  for (int i = 1; i < o.multistarts; ++i) {
    Vec s = delta;
    for (int k = 1; k < n; ++k) s[k] += 0.25 * delta[0] * nd(rng);
    starts.push_back(s);
  }
  for (const Vec& s0 : starts) {
    Vec v = s0;
    bool ok = false;
    double res = kInf;
    for (int it = 0; it < o.newton_max_iter; ++it) {
      auto [e, J] = exp_with_jacobian(sp, x, v, o.integrator_tol);
      Vec r = e - Y;
      res = r.norm();
      if (res <= 0.1 * accept) {
        ok = true;
        break;
      }
      v -= J.fullPivLu().solve(r);
    }
    if (!ok && res <= accept) ok = true;
    if (!ok) continue;
    Candidate c;
    c.v = TangentVector(v);
    c.cls = causal_class(sp, x, c.v);
    if (!is_future_causal(c.cls)) continue;
    c.length = causal_length(sp, x, v);
    c.residual = res;
    c.target = y;
    if (sp.flat()) {
      c.v_end = c.v;
    } else {
      auto g = integrate_geodesic(sp, x, c.v, {0.0, 1.0}, o.integrator_tol);
      c.v_end = g.velocity(1.0);
    }
    ms.candidates.push_back(c);
  }
  if (ms.candidates.empty()) throw NotCausallyRelated("no causal geodesic found to the target");
  finalize(sp, ms, o);
  return ms;
}

}  // namespace detail

/// All causal geodesics from x to y and the maximizing ones among them.
inline MaximizerSet connect(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                            const ConnectOptions& o = {}) {
  check_point(sp, x);
  check_point(sp, y);
  if (sp.dim == 2) return detail::connect_2d(sp, x, y, o);
  return detail::connect_newton(sp, x, y, o);
}

/// Warm-started connect: re-solves each previous candidate near y, keeping
/// every lift nearest its old lifted target. Falls back to a full connect
/// when a branch disappears or fails to converge.
inline MaximizerSet connect_seeded(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                   const MaximizerSet& prev, const ConnectOptions& o = {}) {
  if (sp.dim != 2 || prev.candidates.empty() || prev.x.coords != x.coords)
    return connect(sp, x, y, o);
  check_point(sp, y);
  const double dt = y.t() - x.t();
  if (dt <= 0.0) return connect(sp, x, y, o);
  MaximizerSet ms;
  ms.x = x;
  ms.y = y;
  const double base = sp.periodic() ? x[1] + wrap_angle(y[1] - x[1]) : y[1];
  const double accept = o.residual_accept * (1.0 + reference_distance(sp, x, y));
  for (const auto& pc : prev.candidates) {
    if (pc.cls == CausalityClass::Zero) return connect(sp, x, y, o);
    const double target =
        sp.periodic() ? pc.target[1] + wrap_angle(y[1] - pc.target[1]) : y[1];
    double w = pc.w;
    auto sh = detail::shoot_level(sp, x.t(), x[1], y.t(), w, o.integrator_tol);
    bool ok = false;
    for (int it = 0; it < o.newton_max_iter; ++it) {
      const double r = sh.theta - target;
      if (std::abs(r) <= 0.01 * accept) {
        ok = true;
        break;
      }
      if (sh.dtheta_dw <= 0.0) break;
      double wn = w - r / sh.dtheta_dw;
      if (wn < -1.0 || wn > 1.0) break;
      w = wn;
      sh = detail::shoot_level(sp, x.t(), x[1], y.t(), w, o.integrator_tol);
    }
    if (!ok && std::abs(sh.theta - target) <= accept) ok = true;
    if (!ok) return connect(sp, x, y, o);
    Candidate c = detail::make_candidate_2d(sp, x, y.t(), w, sh, target, base);
    ms.candidates.push_back(c);
  }
  detail::finalize(sp, ms, o);
  return ms;
}

/// d(x, y); 0 for null-related pairs. Throws NotCausallyRelated otherwise.
inline double lorentz_distance(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                               const ConnectOptions& o = {}) {
  return connect(sp, x, y, o).d;
}

/// Whether y lies in J⁺(x).
inline bool causally_related(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                             const ConnectOptions& o = {}) {
  try {
    connect(sp, x, y, o);
    return true;
  } catch (const NotCausallyRelated&) {
    return false;
  }
}

/// c_t(x, y) = -√t √d(x, y), +∞ off J⁺(x); c_0(x, x) = 0.
inline double action_c(const Spacetime& sp, double t, const ChartPoint& x, const ChartPoint& y,
                       const ConnectOptions& o = {}) {
  if (t < 0.0) throw ConfigError("action_c: t must be non-negative");
  if (t == 0.0) {
    check_point(sp, x);
    check_point(sp, y);
    return reference_distance(sp, x, y) == 0.0 ? 0.0 : kInf;
  }
  try {
    return -std::sqrt(t) * std::sqrt(connect(sp, x, y, o).d);
  } catch (const NotCausallyRelated&) {
    return kInf;
  }
}

inline double action_from_distance(double t, double d) { return -std::sqrt(t) * std::sqrt(d); }

/// Breakpoints in the universal cover joined by geodesic segments.
struct PathSample {
  std::vector<std::pair<double, ChartPoint>> breakpoints;
};

/// Action of a piecewise geodesic path run over total time t_total.
inline double path_action(const Spacetime& sp, const PathSample& path, double t_total,
                          const ConnectOptions& o = {}) {
  if (!(t_total > 0.0)) throw ConfigError("path_action: t_total must be positive");
  const auto& bp = path.breakpoints;
  if (bp.size() < 2) throw ConfigError("path_action: need at least two breakpoints");
  for (std::size_t i = 1; i < bp.size(); ++i)
    if (!(bp[i].first > bp[i - 1].first))
      throw ConfigError("path_action: parameters must be strictly increasing");
  const double p0 = bp.front().first, p1 = bp.back().first;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const ChartPoint& a = bp[i].second;
    const ChartPoint& b = bp[i + 1].second;
    const double tau = (bp[i + 1].first - bp[i].first) * t_total / (p1 - p0);
    MaximizerSet ms;
    try {
      ms = connect(sp, a, b, o);
    } catch (const NotCausallyRelated&) {
      return kInf;
    }
    // segment in the cover: the candidate whose lifted target is b itself
    const Candidate* seg = nullptr;
    for (const auto& c : ms.candidates)
      if ((c.target.coords - b.coords).norm() <= 1e-9 * (1.0 + b.coords.norm())) seg = &c;
    if (!seg) return kInf;
    if (seg->cls == CausalityClass::Zero) continue;
    // γ(σ) = exp_a(σ v / τ), σ in [0, τ]
    auto g = integrate_geodesic(sp, a, seg->v, {0.0, 1.0}, o.integrator_tol);
    auto integrand = [&](double sigma) {
      const double lam = sigma / tau;
      TangentVector vel(Vec(g.velocity(lam).components / tau));
      return lagrangian(sp, g.position(lam), vel);
    };
    const double seg_action = boost::math::quadrature::gauss<double, 10>::integrate(integrand, 0.0, tau);
    if (!std::isfinite(seg_action)) return kInf;
    total += seg_action;
  }
  return total;
}

struct NuResult {
  bool nu = false;
  MaximizerSet set;
  bool fd_checked = false;
  double fd_jump = 0.0;  // largest one-sided derivative mismatch of d(x, ·) at y
  bool fd_agrees = true;
};

/// Two or more maximizers; chronological pairs are cross-checked by a
/// finite-difference probe of the derivative of d(x, ·) at y.
inline NuResult is_nu(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                      const ConnectOptions& o = {}, double fd_step = 1e-5, double fd_threshold = 1e-3) {
  NuResult r;
  r.set = connect(sp, x, y, o);
  r.nu = r.set.multiplicity() >= 2;
  if (r.set.relation != Relation::Chronological) return r;
  const int n = sp.dim;
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) dirs.push_back(Vec::Unit(n, i));
  if (n == 2) {
    dirs.push_back(Vec((Vec(2) << 1.0, 1.0).finished() / std::sqrt(2.0)));
    dirs.push_back(Vec((Vec(2) << 1.0, -1.0).finished() / std::sqrt(2.0)));
  }
  try {
    for (const Vec& e : dirs) {
      ChartPoint yp(Vec(y.coords + fd_step * e)), ym(Vec(y.coords - fd_step * e));
      const double dp = connect_seeded(sp, x, yp, r.set, o).d;
      const double dm = connect_seeded(sp, x, ym, r.set, o).d;
      const double jump = std::abs((dp - r.set.d) - (r.set.d - dm)) / fd_step;
      r.fd_jump = std::max(r.fd_jump, jump);
    }
    r.fd_checked = true;
    r.fd_agrees = (r.fd_jump > fd_threshold) == r.nu;
  } catch (const Error&) {
    r.fd_checked = false;
  }
  return r;
}

}  // namespace lorkam
