#pragma once

// Lax-Oleinik semigroups on the characteristic function χ_x of a point:
// T_t χ_x = c_t(x, ·) and the sup-convolution Ĥ_s T_t χ_x, its maximizer
// map F, the ε-controlled variant F̄, reaching gradients of the action and
// grid probes of semiconvexity / semiconcavity / C¹ regularity.
//
// Maximizing z ↦ c_t(x, z) - c_s(y, z) is a max-min problem: c_t(x, ·) is
// the minimum of smooth branches, one per causal geodesic class from x.
// The search runs a polar grid over the future cone of y, refines it, then
// a proximal ascent whose model is the minimum of all branch linearisations.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lorkam/cutlocus.hpp"
#include "lorkam/distance.hpp"
#include "lorkam/errors.hpp"
#include "lorkam/spacetime.hpp"
#include "lorkam/types.hpp"

namespace lorkam {

struct LOOptions {
  double C0 = 10.0;
  double s_max = 0.1;
  double value_tol = 1e-9;
  double separation = 1e-4;  // spatial separation for a second maximizer
  int n_radii = 13;
  int n_angles = 9;
  int refine_levels = 3;
  int max_ascent = 300;
  double boundary_fraction = 0.95;
  double jitter = 0.0;  // relative grid perturbation, 0 for the plain grid
  std::uint64_t seed = 0;
  ConnectOptions connect;
};

/// c_t(x, y), i.e. T_t χ_x(y).
inline double forward_lo(const Spacetime& sp, double t, const ChartPoint& x, const ChartPoint& y,
                         const ConnectOptions& o = {}) {
  if (!(t > 0.0)) throw ConfigError("forward_lo: t must be positive");
  return action_c(sp, t, x, y, o);
}

struct LOEvaluation {
  double s = 0.0, t = 0.0;
  ChartPoint x, y;
  double value = 0.0;
  ChartPoint argmax_z;
  bool argmax_equals_y = false;
  double search_radius = 0.0;
  bool multiplicity_flag = false;
  double second_value = -kInf;
  std::optional<ChartPoint> second_argmax;
  int evaluations = 0;
  int ascent_steps = 0;
  MaximizerSet x_set;  // connect(x, z) at the argmax
  MaximizerSet y_set;  // connect(y, z) at the argmax
};

namespace detail {

/// Branch values and gradients of z ↦ c_t(x, z) - c_s(y, z).
struct LOPoint {
  bool valid = false;
  ChartPoint z;
  double phi = -kInf;
  std::vector<double> f;
  std::vector<Vec> g;
  MaximizerSet mx, my;
};

class LOProblem {
 public:
  LOProblem(const Spacetime& sp, double s, double t, ChartPoint x, ChartPoint y, const LOOptions& o)
      : sp_(sp), s_(s), t_(t), x_(std::move(x)), y_(std::move(y)), o_(o) {
    R_ = o_.C0 * std::sqrt(s_);
  }

  [[nodiscard]] double radius() const { return R_; }
  [[nodiscard]] int evaluations() const { return evals_; }

  LOPoint eval(const ChartPoint& z, const LOPoint* seed = nullptr) {
    ++evals_;
    LOPoint p;
    p.z = z;
    if (!sp_.in_domain(z.t())) return p;
    if (reference_distance(sp_, y_, z) > R_) return p;
    try {
      p.my = seed && seed->valid ? connect_seeded(sp_, y_, z, seed->my, o_.connect)
                                 : connect(sp_, y_, z, o_.connect);
      if (p.my.relation != Relation::Chronological) return p;
      p.mx = seed && seed->valid ? connect_seeded(sp_, x_, z, seed->mx, o_.connect)
                                 : connect(sp_, x_, z, o_.connect);
      if (p.mx.relation != Relation::Chronological) return p;
    } catch (const NotCausallyRelated&) {
      return p;
    } catch (const DomainExceeded&) {
      return p;
    }
    const double ss = std::sqrt(s_), st = std::sqrt(t_);
    const Candidate& ym = p.my.maximizers.front();
    const double ypart = ss * std::sqrt(p.my.d);
    const Vec gy = ss * legendre(sp_, z, ym.v_end).components;
    const double dmax = p.mx.d;
    for (const auto& c : p.mx.candidates) {
      if (c.cls != CausalityClass::FutureTimelike || c.length < 0.5 * dmax) continue;
      p.f.push_back(-st * std::sqrt(c.length) + ypart);
      p.g.push_back(Vec(st * legendre(sp_, z, c.v_end).components - gy));
    }
    if (p.f.empty()) return p;
    p.phi = -st * std::sqrt(dmax) + ypart;
    p.valid = true;
    return p;
  }

  /// Proximal step for max_δ min_k (f_k + g_k·δ) - μ/2 |δ|².
  static std::pair<Vec, double> prox_step(const LOPoint& p, double mu) {
    const int m = static_cast<int>(p.f.size());
    const int n = static_cast<int>(p.g.front().size());
    auto primal = [&](const Vec& d) {
      double v = kInf;
      for (int k = 0; k < m; ++k) v = std::min(v, p.f[k] + p.g[k].dot(d));
      return v;
    };
    Vec best_d = Vec::Zero(n);
    double best_val = primal(best_d);
    const int max_size = std::min(m, n + 1);
    // all subsets up to size n + 1 (m is small: one entry per winding class)
    const int total = 1 << m;
    for (int mask = 1; mask < total; ++mask) {
      const int sz = __builtin_popcount(static_cast<unsigned>(mask));
      if (sz > max_size) continue;
      std::vector<int> idx;
      for (int k = 0; k < m; ++k)
        if (mask & (1 << k)) idx.push_back(k);
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(sz + 1, sz + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sz + 1);
      for (int a = 0; a < sz; ++a) {
        for (int b = 0; b < sz; ++b) K(a, b) = p.g[idx[a]].dot(p.g[idx[b]]) / mu;
        K(a, sz) = -1.0;
        K(sz, a) = 1.0;
        rhs[a] = -p.f[idx[a]];
      }
      rhs[sz] = 1.0;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
      if (!lu.isInvertible()) continue;
      Eigen::VectorXd sol = lu.solve(rhs);
      bool ok = true;
      Vec d = Vec::Zero(n);
      for (int a = 0; a < sz; ++a) {
        if (sol[a] < -1e-12) ok = false;
        d += sol[a] * p.g[idx[a]];
      }
      if (!ok) continue;
      d /= mu;
      const double val = primal(d) - 0.5 * mu * d.squaredNorm();
      if (val > best_val) {
        best_val = val;
        best_d = d;
      }
    }
    return {best_d, primal(best_d) - p.phi};
  }

  /// Proximal ascent from p. Returns the final point.
  LOPoint ascend(LOPoint p, int& steps) {
    if (!p.valid) return p;
    double gnorm = 0.0;
    for (const auto& g : p.g) gnorm = std::max(gnorm, g.norm());
    const double rho = std::max(reference_distance(sp_, y_, p.z), 1e-6 * R_);
    double mu = gnorm / (0.1 * rho) + 1e-300;
    for (int it = 0; it < o_.max_ascent; ++it) {
      ++steps;
      auto [d, pred] = prox_step(p, mu);
      const double scale = 1.0 + std::abs(p.phi);
      if (pred <= 1e-17 * scale || d.norm() <= 1e-12 * (1.0 + p.z.coords.norm())) break;
      LOPoint q = eval(ChartPoint(Vec(p.z.coords + d)), &p);
      // once gains drop to rounding level the model gradient still carries
      // information; accept steps that do not measurably lose value
      const bool noise_level = pred <= 1e-12 * scale;
      const double gain = q.valid ? q.phi - p.phi : -kInf;
      if (q.valid && (gain >= 0.1 * pred || (noise_level && gain >= -4e-16 * scale))) {
        p = std::move(q);
        mu *= 0.5;
      } else {
        mu *= 4.0;
        if (mu > 1e300) break;
      }
    }
    return p;
  }

  [[nodiscard]] Vec cone_direction(double omega, double phi_angle) const {
    Vec d = Vec::Zero(sp_.dim);
    d[0] = 1.0;
    const double a = sp_.a(y_.t());
    if (sp_.dim == 2) {
      d[1] = omega / a;
    } else {
      d[1] = omega * std::cos(phi_angle);
      d[2] = omega * std::sin(phi_angle);
    }
    return d;
  }

  [[nodiscard]] const ChartPoint& y() const { return y_; }

 private:
  const Spacetime& sp_;
  double s_, t_;
  ChartPoint x_, y_;
  LOOptions o_;
  double R_ = 0.0;
  int evals_ = 0;
};

struct GridNode {
  double logr, omega, phi_angle;
  LOPoint p;
};

}  // namespace detail

inline void check_lo_args(const Spacetime& sp, double s, double t, const ChartPoint& x,
                          const ChartPoint& y, const LOOptions& o) {
  check_point(sp, x);
  check_point(sp, y);
  if (s < 0.0 || s > o.s_max)
    throw ConfigError("s must lie in [0, s_max=" + fmt_g(o.s_max) + "]");
  if (!(t > s)) throw ConfigError("t must exceed s");
  if (!(o.C0 > 0.0)) throw ConfigError("C0 must be positive");
}

/// Ĥ_s T_t χ_x (y) and its maximizer.
inline LOEvaluation backward_forward(const Spacetime& sp, double s, double t, const ChartPoint& x,
                                     const ChartPoint& y, const LOOptions& o = {}) {
  check_lo_args(sp, s, t, x, y, o);
  LOEvaluation ev;
  ev.s = s;
  ev.t = t;
  ev.x = x;
  ev.y = y;
  if (s == 0.0) {
    ev.value = forward_lo(sp, t, x, y, o.connect);
    ev.argmax_z = y;
    ev.argmax_equals_y = true;
    return ev;
  }
  MaximizerSet xy;
  try {
    xy = connect(sp, x, y, o.connect);
  } catch (const NotCausallyRelated&) {
    throw NotChronological("backward_forward: y is not in the chronological future of x");
  }
  if (xy.relation != Relation::Chronological)
    throw NotChronological("backward_forward: y is only null related to x");

  detail::LOProblem prob(sp, s, t, x, y, o);
  const double R = prob.radius();
  ev.search_radius = R;

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const double j_r = o.jitter * U(rng), j_w = o.jitter * U(rng), j_p = o.jitter * U(rng);

  // polar sector grid: geometric radii, interior cone angles
  const int nr = std::max(2, o.n_radii), na = std::max(2, o.n_angles);
  const int nphi = sp.dim == 3 ? 8 : 1;
  const double dir_scale = prob.cone_direction(0.0, 0.0).norm();
  const double logr_max = std::log(R / dir_scale);
  const double dlogr = std::log(1e3) / (nr - 1);
  const double domega = 2.0 / na;
  auto node_point = [&](double logr, double omega, double pa) {
    Vec d = prob.cone_direction(omega, pa);
    // keep the node inside the reference ball
    const double r = std::min(std::exp(logr), 0.999 * R / d.norm());
    return ChartPoint(Vec(y.coords + r * d));
  };
  std::vector<detail::GridNode> grid;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < na; ++j) {
      for (int k = 0; k < nphi; ++k) {
        detail::GridNode nd;
        nd.logr = logr_max - (i + 0.5 + j_r) * dlogr;
        nd.omega = -1.0 + (j + 0.5 + j_w) * domega;
        nd.phi_angle = kTwoPi * (k + j_p) / nphi;
        nd.p = prob.eval(node_point(nd.logr, nd.omega, nd.phi_angle));
        grid.push_back(std::move(nd));
      }
    }
  }
  auto better = [](const detail::LOPoint& a, const detail::LOPoint& b) {
    return a.valid && (!b.valid || a.phi > b.phi);
  };
  // grid local maxima (over index neighbours) as ascent seeds
  auto at = [&](int i, int j, int k) -> const detail::GridNode& {
    return grid[static_cast<std::size_t>((i * na + j) * nphi + k)];
  };
  std::vector<std::size_t> seeds;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < na; ++j)
      for (int k = 0; k < nphi; ++k) {
        const auto& c = at(i, j, k);
        if (!c.p.valid) continue;
        bool is_max = true;
        for (int di = -1; di <= 1 && is_max; ++di)
          for (int dj = -1; dj <= 1 && is_max; ++dj)
            for (int dk = -1; dk <= 1 && is_max; ++dk) {
              if (!di && !dj && !dk) continue;
              const int ii = i + di, jj = j + dj;
              const int kk = nphi == 1 ? 0 : (k + dk + nphi) % nphi;
              if (ii < 0 || ii >= nr || jj < 0 || jj >= na) continue;
              if (better(at(ii, jj, kk).p, c.p)) is_max = false;
            }
        if (is_max) seeds.push_back(static_cast<std::size_t>((i * na + j) * nphi + k));
      }
  if (seeds.empty()) throw ConvergenceFailure("backward_forward: no valid grid point in the search ball");
  std::sort(seeds.begin(), seeds.end(),
            [&](std::size_t a, std::size_t b) { return grid[a].p.phi > grid[b].p.phi; });
  if (seeds.size() > 3) seeds.resize(3);

  std::vector<detail::LOPoint> finals;
  for (std::size_t si : seeds) {
    detail::GridNode best = grid[si];
    double sr = dlogr, sw = domega, sp_ang = kTwoPi / nphi;
    for (int lvl = 0; lvl < o.refine_levels; ++lvl) {
      sr *= 0.5;
      sw *= 0.5;
      sp_ang *= 0.5;
      detail::GridNode centre = best;
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b)
          for (int c = (nphi == 1 ? 0 : -1); c <= (nphi == 1 ? 0 : 1); ++c) {
            if (!a && !b && !c) continue;
            detail::GridNode nd;
            nd.logr = std::min(centre.logr + a * sr, logr_max);
            nd.omega = std::clamp(centre.omega + b * sw, -0.999, 0.999);
            nd.phi_angle = centre.phi_angle + c * sp_ang;
            nd.p = prob.eval(node_point(nd.logr, nd.omega, nd.phi_angle));
            if (better(nd.p, best.p)) best = std::move(nd);
          }
    }
    int steps = 0;
    finals.push_back(prob.ascend(best.p, steps));
    ev.ascent_steps += steps;
  }
  std::sort(finals.begin(), finals.end(),
            [](const detail::LOPoint& a, const detail::LOPoint& b) { return a.phi > b.phi; });
  const detail::LOPoint& top = finals.front();
  if (!top.valid) throw ConvergenceFailure("backward_forward: ascent produced no valid point");

  // compare with z = y (c_s(y, y) = 0)
  const double at_y = forward_lo(sp, t, x, y, o.connect);
  if (at_y > top.phi + o.value_tol)
    throw ConvergenceFailure("backward_forward: z = y beats every interior candidate");

  ev.value = top.phi;
  ev.argmax_z = top.z;
  ev.x_set = top.mx;
  ev.y_set = top.my;
  for (std::size_t i = 1; i < finals.size(); ++i) {
    const auto& f = finals[i];
    if (!f.valid) continue;
    if (reference_distance(sp, f.z, top.z) > o.separation &&
        top.phi - f.phi <= o.value_tol * (1.0 + std::abs(top.phi))) {
      ev.multiplicity_flag = true;
      ev.second_value = f.phi;
      ev.second_argmax = f.z;
      break;
    }
  }
  ev.evaluations = prob.evaluations();
  if (reference_distance(sp, y, top.z) > o.boundary_fraction * R)
    throw SearchBoundaryHit("maximizer pinned at the search-ball boundary (radius " + fmt_g(R) +
                            "); enlarge C0");
  if (!(top.my.d > 1e-7 * (1.0 + t)))
    throw ConvergenceFailure("backward_forward: maximizer is not in the chronological future of y");
  return ev;
}

/// Ascent only, started at z0 (used to sweep grids continuously).
inline LOEvaluation backward_forward_from(const Spacetime& sp, double s, double t,
                                          const ChartPoint& x, const ChartPoint& y,
                                          const ChartPoint& z0, const LOOptions& o = {}) {
  check_lo_args(sp, s, t, x, y, o);
  if (s == 0.0) return backward_forward(sp, s, t, x, y, o);
  detail::LOProblem prob(sp, s, t, x, y, o);
  auto p = prob.eval(z0);
  if (!p.valid) return backward_forward(sp, s, t, x, y, o);
  int steps = 0;
  p = prob.ascend(p, steps);
  LOEvaluation ev;
  ev.s = s;
  ev.t = t;
  ev.x = x;
  ev.y = y;
  ev.value = p.phi;
  ev.argmax_z = p.z;
  ev.search_radius = prob.radius();
  ev.ascent_steps = steps;
  ev.evaluations = prob.evaluations();
  ev.x_set = p.mx;
  ev.y_set = p.my;
  if (reference_distance(sp, y, p.z) > o.boundary_fraction * prob.radius())
    throw SearchBoundaryHit("maximizer pinned at the search-ball boundary; enlarge C0");
  return ev;
}

struct FMapResult {
  ChartPoint z;
  LOEvaluation eval;
  bool pair_in_cut = false;
  bool nu_checked = false;
  bool nu = false;
  bool chronological_from_x = true;
};

/// F(s, x, y): maximizer of Ĥ_s T_{1+s} χ_x at y.
inline FMapResult f_map_detail(const Spacetime& sp, double s, const ChartPoint& x,
                               const ChartPoint& y, const LOOptions& o = {}, bool check_nu = true,
                               double horizon = 1e3) {
  FMapResult r;
  auto xy = connect(sp, x, y, o.connect);
  if (xy.relation != Relation::Chronological)
    throw NotChronological("f_map: (x, y) must be chronologically related");
  if (s == 0.0) {
    r.z = y;
    r.eval = backward_forward(sp, 0.0, 1.0, x, y, o);
    return r;
  }
  r.eval = backward_forward(sp, s, 1.0 + s, x, y, o);
  r.z = r.eval.argmax_z;
  r.chronological_from_x = r.eval.x_set.relation == Relation::Chronological;
  if (!r.chronological_from_x) throw NUCheckFailed("f_map: image is not in I+(x)");
  if (check_nu) {
    CutOptions co;
    co.connect = o.connect;
    r.pair_in_cut = in_cut(sp, x, y, horizon, 1e-4, co).in_cut;
    if (r.pair_in_cut) {
      r.nu_checked = true;
      r.nu = is_nu(sp, x, r.z, o.connect).nu;
      if (!r.nu)
        throw NUCheckFailed("f_map: (x, F(s,x,y)) is not in NU; s exceeds the valid neighbourhood");
    }
  }
  return r;
}

inline ChartPoint f_map(const Spacetime& sp, double s, const ChartPoint& x, const ChartPoint& y,
                        const LOOptions& o = {}) {
  return f_map_detail(sp, s, x, y, o).z;
}

/// Scale s(x, y) = min(s_max, (ε / C0)²) used by F̄.
inline double fbar_scale(double eps, const LOOptions& o) {
  return std::min(o.s_max, (eps / o.C0) * (eps / o.C0));
}

inline FMapResult fbar_map_detail(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                  double tau, double eps, const LOOptions& o = {},
                                  double horizon = 1e3) {
  if (tau < 0.0 || tau > 1.0) throw ConfigError("fbar_map: tau must lie in [0, 1]");
  if (!(eps > 0.0)) throw ConfigError("fbar_map: eps must be positive");
  CutOptions co;
  co.connect = o.connect;
  if (!in_cut(sp, x, y, horizon, 1e-4, co).in_cut)
    throw DomainError("fbar_map: (x, y) is not a timelike cut pair");
  if (tau == 0.0) {
    FMapResult r;
    r.z = y;
    r.pair_in_cut = true;
    return r;
  }
  return f_map_detail(sp, tau * fbar_scale(eps, o), x, y, o, true, horizon);
}

inline ChartPoint fbar_map(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y, double tau,
                           double eps, const LOOptions& o = {}) {
  return fbar_map_detail(sp, x, y, tau, eps, o).z;
}

/// Extreme points of the superdifferential of c_1 at (x, y), one per maximizer.
inline std::vector<std::pair<Covector, Covector>> superdiff_action(const Spacetime& sp,
                                                                   const ChartPoint& x,
                                                                   const ChartPoint& y,
                                                                   const ConnectOptions& o = {}) {
  auto ms = connect(sp, x, y, o);
  if (ms.relation != Relation::Chronological)
    throw NotChronological("superdiff_action: y must lie in I+(x)");
  std::vector<std::pair<Covector, Covector>> out;
  for (const auto& m : ms.maximizers) {
    Covector px = legendre(sp, x, m.v);
    Covector py = legendre(sp, y, m.v_end);
    out.emplace_back(Covector(Vec(-px.components)), py);
  }
  return out;
}

struct GridSpec {
  double t0 = 0.0, t1 = 1.0, th0 = 0.0, th1 = 1.0;
  int n = 11;

  [[nodiscard]] double ht() const { return (t1 - t0) / (n - 1); }
  [[nodiscard]] double hth() const { return (th1 - th0) / (n - 1); }
  [[nodiscard]] ChartPoint point(int i, int j) const {
    return ChartPoint{t0 + i * ht(), th0 + j * hth()};
  }

  /// n × n grid centred at c with spacing h in both directions.
  static GridSpec centred(const ChartPoint& c, double h, int n) {
    const double half = 0.5 * h * (n - 1);
    return {c.t() - half, c.t() + half, c[1] - half, c[1] + half, n};
  }
};

struct FieldStats {
  double sd_max = -kInf, sd_min = kInf;  // directional second differences
  double gradient_jump = 0.0;            // max |f(i+1) - 2 f(i) + f(i-1)| / h
  double gradient_jump_t = 0.0, gradient_jump_theta = 0.0;
};

struct RegularityReport {
  GridSpec grid;
  double s = 0.0, t = 0.0;
  std::vector<double> T_values;  // row-major, i over t, j over θ
  std::vector<double> H_values;
  FieldStats T_stats, H_stats;
  // verdicts with their constants
  double semiconvex_C = 0.0;   // Ĥ second differences >= -C
  double semiconcave_C = 0.0;  // Ĥ second differences <= C
  bool c1_smooth = false;      // Ĥ gradient_jump <= c1_factor * h
  double c1_eps = 0.0;
  int failed_points = 0;
};

inline FieldStats field_stats(const std::vector<double>& f, const GridSpec& g) {
  FieldStats st;
  const int n = g.n;
  auto at = [&](int i, int j) { return f[static_cast<std::size_t>(i * n + j)]; };
  const double ht = g.ht(), hth = g.hth();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i > 0 && i + 1 < n) {
        const double d2 = at(i + 1, j) - 2 * at(i, j) + at(i - 1, j);
        if (std::isfinite(d2)) {
          st.sd_max = std::max(st.sd_max, d2 / (ht * ht));
          st.sd_min = std::min(st.sd_min, d2 / (ht * ht));
          st.gradient_jump_t = std::max(st.gradient_jump_t, std::abs(d2) / ht);
        }
      }
      if (j > 0 && j + 1 < n) {
        const double d2 = at(i, j + 1) - 2 * at(i, j) + at(i, j - 1);
        if (std::isfinite(d2)) {
          st.sd_max = std::max(st.sd_max, d2 / (hth * hth));
          st.sd_min = std::min(st.sd_min, d2 / (hth * hth));
          st.gradient_jump_theta = std::max(st.gradient_jump_theta, std::abs(d2) / hth);
        }
      }
    }
  st.gradient_jump = std::max(st.gradient_jump_t, st.gradient_jump_theta);
  return st;
}

/// T_t χ_x and Ĥ_s T_t χ_x on a grid, with second-difference and kink statistics.
inline RegularityReport regularity_probe(const Spacetime& sp, double s, double t, const ChartPoint& x,
                                         const GridSpec& grid, const LOOptions& o = {},
                                         double c1_factor = 10.0) {
  if (grid.n < 3) throw ConfigError("regularity_probe: grid needs n >= 3");
  RegularityReport rep;
  rep.grid = grid;
  rep.s = s;
  rep.t = t;
  const int n = grid.n;
  rep.T_values.assign(static_cast<std::size_t>(n * n), kInf);
  rep.H_values.assign(static_cast<std::size_t>(n * n), kInf);
  std::optional<MaximizerSet> prev;
  for (int i = 0; i < n; ++i) {
    std::optional<LOEvaluation> last;
    for (int j = 0; j < n; ++j) {
      const ChartPoint y = grid.point(i, j);
      const std::size_t k = static_cast<std::size_t>(i * n + j);
      try {
        MaximizerSet ms = prev ? connect_seeded(sp, x, y, *prev, o.connect) : connect(sp, x, y, o.connect);
        prev = ms;
        rep.T_values[k] = action_from_distance(t, ms.d);
      } catch (const Error&) {
        prev.reset();
      }
      try {
        LOEvaluation ev;
        if (s == 0.0) {
          ev.value = rep.T_values[k];
        } else if (last) {
          // follow the maximizer: shift by the displacement of y
          ChartPoint z0(Vec(last->argmax_z.coords + (y.coords - last->y.coords)));
          ev = backward_forward_from(sp, s, t, x, y, z0, o);
        } else {
          ev = backward_forward(sp, s, t, x, y, o);
        }
        rep.H_values[k] = ev.value;
        if (s != 0.0) last = ev;
      } catch (const Error&) {
        ++rep.failed_points;
        last.reset();
      }
    }
    prev.reset();
  }
  rep.T_stats = field_stats(rep.T_values, grid);
  rep.H_stats = field_stats(rep.H_values, grid);
  rep.semiconvex_C = std::max(0.0, -rep.H_stats.sd_min);
  rep.semiconcave_C = std::max(0.0, rep.H_stats.sd_max);
  const double h = std::max(grid.ht(), grid.hth());
  rep.c1_eps = c1_factor * h;
  rep.c1_smooth = rep.H_stats.gradient_jump <= rep.c1_eps;
  return rep;
}

}  // namespace lorkam
