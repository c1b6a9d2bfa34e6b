#pragma once

// Cut times, cut-locus sampling and Aubry-set membership up to a horizon.
//
// Horizons are given in coordinate time: for a direction v the parameter
// limit is horizon / v_t, i.e. the affine extent of v rescaled to unit time
// component at the base point.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "lorkam/distance.hpp"
#include "lorkam/errors.hpp"
#include "lorkam/geodesic.hpp"
#include "lorkam/spacetime.hpp"
#include "lorkam/types.hpp"

namespace lorkam {

struct CutOptions {
  double tol = 1e-9;         // bisection tolerance in the parameter
  double slack_rel = 1e-7;   // slack(t) = slack_rel * (1 + t|v|)
  double tol_c = 1e-4;       // conjugate time vs cut time coincidence
  bool refine = true;        // competitor-gap refinement after bisection
  ConnectOptions connect;
};

struct CutTime {
  enum class Kind { Finite, AtHorizon, AtDomainBoundary };
  Kind kind = Kind::AtHorizon;
  double value = kInf;  // α, the parameter horizon, or the parameter where the domain ends

  [[nodiscard]] bool finite() const { return kind == Kind::Finite; }
};

inline const char* to_string(CutTime::Kind k) {
  switch (k) {
    case CutTime::Kind::Finite: return "finite";
    case CutTime::Kind::AtHorizon: return "at_horizon";
    case CutTime::Kind::AtDomainBoundary: return "at_domain_boundary";
  }
  return "?";
}

inline double slack(const CutOptions& o, double t, double vnorm) {
  return o.slack_rel * (1.0 + t * vnorm);
}

inline double parameter_horizon(const TangentVector& v, double horizon) { return horizon / v[0]; }

namespace detail {

inline void check_direction(const Spacetime& sp, const ChartPoint& x, const TangentVector& v) {
  check_point(sp, x);
  check_dim(sp, v.components, "direction");
  const auto c = causal_class(sp, x, v);
  if (c != CausalityClass::FutureTimelike && c != CausalityClass::FutureNull)
    throw DomainError(std::string("direction must be future causal and non-zero, got ") + to_string(c));
}

/// Lengths along γ(t) = exp_x(t v): the geodesic's own branch and its best competitor.
struct BranchProbe {
  ChartPoint point;  // γ(t) in the cover
  double own = 0.0;
  double competitor = -kInf;  // -∞ when there is no other causal lift
  double d = 0.0;
  MaximizerSet set;
};

inline BranchProbe probe_branch(const Spacetime& sp, const ChartPoint& x, const TangentVector& v,
                                double t, const CutOptions& o) {
  BranchProbe b;
  b.point = exp_map(sp, x, v, t, o.connect.integrator_tol);
  b.set = connect(sp, x, b.point, o.connect);
  b.d = b.set.d;
  b.own = t * lorentz_norm(sp, x, v);
  double best = kInf;
  const Candidate* own = nullptr;
  for (const auto& c : b.set.candidates) {
    const double e = (c.target.coords - b.point.coords).norm();
    if (e < best) {
      best = e;
      own = &c;
    }
  }
  if (own && best > 1e-6 * (1.0 + b.point.coords.norm())) own = nullptr;
  for (const auto& c : b.set.candidates)
    if (&c != own) b.competitor = std::max(b.competitor, c.length);
  return b;
}

}  // namespace detail

struct CutTimeDetail {
  CutTime alpha;
  double bisection_alpha = kInf;  // before refinement
  bool refined = false;
};

inline CutTimeDetail cut_time_detail(const Spacetime& sp, const ChartPoint& x, const TangentVector& v,
                                     double horizon, const CutOptions& o = {}) {
  detail::check_direction(sp, x, v);
  if (!(horizon > 0.0)) throw ConfigError("cut_time: horizon must be positive");
  const double vn = lorentz_norm(sp, x, v);
  const bool null_dir = causal_class(sp, x, v) == CausalityClass::FutureNull;
  const double T = parameter_horizon(v, horizon);

  std::optional<double> reach;
  // maximizing(t) <=> d(x, γ(t)) <= t|v| + slack(t)
  auto maximizing = [&](double t) -> std::optional<bool> {
    try {
      auto b = detail::probe_branch(sp, x, v, t, o);
      const double own = null_dir ? 0.0 : b.own;
      return b.d <= own + slack(o, t, vn);
    } catch (const DomainExceeded& e) {
      reach = e.t_reach();
      return std::nullopt;
    }
  };

  CutTimeDetail out;
  double lo = 0.0, hi = std::min(1.0, T);
  bool found = false;
  while (true) {
    auto m = maximizing(hi);
    if (!m) {
      // the geodesic leaves the domain before hi
      const double r = *reach;
      const double probe = r * (1.0 - 1e-9);
      if (probe <= lo) {
        out.alpha = {CutTime::Kind::AtDomainBoundary, r};
        return out;
      }
      auto mp = maximizing(probe);
      if (mp && *mp) {
        out.alpha = {CutTime::Kind::AtDomainBoundary, r};
        return out;
      }
      hi = probe;
      found = true;
      break;
    }
    if (!*m) {
      found = true;
      break;
    }
    lo = hi;
    if (hi >= T) break;
    hi = std::min(2.0 * hi, T);
  }
  if (!found) {
    out.alpha = {CutTime::Kind::AtHorizon, T};
    return out;
  }
  while (hi - lo > o.tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    auto m = maximizing(mid);
    if (!m) {
      hi = mid;
      continue;
    }
    (*m ? lo : hi) = mid;
  }
  double alpha = 0.5 * (lo + hi);
  out.bisection_alpha = alpha;

  if (o.refine && !null_dir) {
    // root of competitor - own; the slack biases bisection by slack / gap'
    auto gap = [&](double t) {
      auto b = detail::probe_branch(sp, x, v, t, o);
      return (std::isfinite(b.competitor) ? b.competitor : 0.0) - b.own;
    };
    try {
      double ghi = gap(hi);
      if (ghi > 0.0) {
        double a = lo, ga = gap(a);
        double step = std::max(o.tol, 1e-6 * alpha);
        for (int i = 0; i < 60 && ga >= 0.0 && a > 0.0; ++i) {
          a = std::max(0.0, lo - step);
          ga = gap(a);
          step *= 2.0;
        }
        if (ga < 0.0) {
          std::uintmax_t it = 100;
          auto tol = boost::math::tools::eps_tolerance<double>(48);
          auto [r0, r1] = boost::math::tools::toms748_solve(gap, a, hi, ga, ghi, tol, it);
          alpha = 0.5 * (r0 + r1);
          out.refined = true;
        }
      }
    } catch (const Error&) {
      // keep the bisection value
    }
  } else if (o.refine) {
    // null direction: the competitor length grows like sqrt(t - α), so its
    // square is smooth across α; two secant rounds on L² locate the root
    try {
      auto comp2 = [&](double t) {
        auto b = detail::probe_branch(sp, x, v, t, o);
        if (!std::isfinite(b.competitor)) throw ConvergenceFailure("no competitor");
        return b.competitor * b.competitor;
      };
      double est = alpha;
      double t1 = hi, d = std::max(1e-4 * alpha, 10.0 * (hi - lo));
      for (int round = 0; round < 3; ++round) {
        const double t2 = t1 + d;
        const double l1 = comp2(t1), l2 = comp2(t2);
        if (!(l2 > l1)) break;
        const double cand = t1 - l1 * (t2 - t1) / (l2 - l1);
        if (!(cand > lo - 10.0 * (hi - lo) && cand <= hi)) break;
        est = cand;
        out.refined = true;
        d = std::max(1e-7 * alpha, 1e-12);
        t1 = est + d;
      }
      alpha = est;
    } catch (const Error&) {
      // keep the bisection value
    }
  }
  out.alpha = {CutTime::Kind::Finite, alpha};
  return out;
}

inline CutTime cut_time(const Spacetime& sp, const ChartPoint& x, const TangentVector& v,
                        double horizon, const CutOptions& o = {}) {
  return cut_time_detail(sp, x, v, horizon, o).alpha;
}

struct CutRecord {
  ChartPoint x;
  TangentVector v;
  double direction = 0.0;  // fan parameter w
  CutTime alpha;
  std::optional<ChartPoint> cut_point;
  bool conjugate = false;
  bool multi_geodesic = false;
  std::optional<double> conjugate_time;
  std::optional<MaximizerSet> nearby_maximizers;
  std::string error;  // per-direction failure, empty on success

  [[nodiscard]] bool classified() const { return conjugate || multi_geodesic; }
};

/// Fill cut point and classification of a finite-α record.
inline CutRecord classify_cut(const Spacetime& sp, CutRecord rec, const CutOptions& o = {}) {
  if (!rec.alpha.finite()) return rec;
  const double a = rec.alpha.value;
  rec.cut_point = exp_map(sp, rec.x, rec.v, a, o.connect.integrator_tol);
  rec.nearby_maximizers = connect(sp, rec.x, *rec.cut_point, o.connect);
  rec.multi_geodesic = rec.nearby_maximizers->multiplicity() >= 2;
  try {
    auto c = first_conjugate_detail(sp, rec.x, rec.v, a + o.tol_c, 1e-8);
    rec.conjugate_time = c.t_star;
  } catch (const DomainExceeded&) {
    rec.conjugate_time.reset();
  }
  rec.conjugate = rec.conjugate_time && std::abs(*rec.conjugate_time - a) <= o.tol_c;
  if (!rec.classified())
    throw ClassificationGap("cut point at parameter " + std::to_string(a) +
                            " is neither conjugate nor reached by a second maximizer");
  return rec;
}

inline CutRecord cut_record(const Spacetime& sp, const ChartPoint& x, const TangentVector& v,
                            double horizon, const CutOptions& o = {}) {
  CutRecord r;
  r.x = x;
  r.v = v;
  r.alpha = cut_time(sp, x, v, horizon, o);
  return classify_cut(sp, r, o);
}

/// Fan of causal directions u = (1, w/a(t_x)), w from -1 to 1 including both null edges.
inline std::vector<CutRecord> cut_locus_sample(const Spacetime& sp, const ChartPoint& x, int n_dirs,
                                               double horizon, const CutOptions& o = {}) {
  if (n_dirs < 2) throw ConfigError("cut_locus_sample: n_dirs must be >= 2");
  check_point(sp, x);
  std::vector<CutRecord> out;
  const double a0 = sp.a(x.t());
  for (int i = 0; i < n_dirs; ++i) {
    const double w = -1.0 + 2.0 * i / (n_dirs - 1);
    CutRecord r;
    r.x = x;
    r.direction = w;
    Vec v = Vec::Zero(sp.dim);
    v[0] = 1.0;
    v[1] = w / a0;
    r.v = TangentVector(v);
    try {
      r.alpha = cut_time(sp, x, r.v, horizon, o);
      r = classify_cut(sp, r, o);
    } catch (const Error& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// A longer causal curve than the geodesic between its endpoints.
struct NonMaxWitness {
  double a = 0.0, b = 0.0;  // parameter interval of γ
  ChartPoint from, to;
  double own_length = 0.0;
  double competitor_length = 0.0;
  bool second_maximizer = false;

  [[nodiscard]] double margin() const { return competitor_length - own_length; }
};

struct AubryVerdict {
  enum class Kind { NotInAubry, InAubryUpToHorizon, DomainIncomplete };
  Kind kind = Kind::InAubryUpToHorizon;
  double horizon = 0.0;
  double t_reach = kInf;
  std::optional<CutRecord> evidence;
  std::optional<NonMaxWitness> witness;
};

inline const char* to_string(AubryVerdict::Kind k) {
  switch (k) {
    case AubryVerdict::Kind::NotInAubry: return "NotInAubry";
    case AubryVerdict::Kind::InAubryUpToHorizon: return "InAubryUpToHorizon";
    case AubryVerdict::Kind::DomainIncomplete: return "DomainIncomplete";
  }
  return "?";
}

namespace detail {

/// Witness that γ stops maximizing just after a finite cut time α.
inline std::optional<NonMaxWitness> witness_after(const Spacetime& sp, const ChartPoint& x,
                                                  const TangentVector& v, double alpha,
                                                  const CutOptions& o) {
  const double vn = lorentz_norm(sp, x, v);
  const bool null_dir = causal_class(sp, x, v) == CausalityClass::FutureNull;
  for (double eps = 1e-3 * std::max(1.0, alpha); eps < 10.0 * std::max(1.0, alpha); eps *= 2.0) {
    try {
      auto b = probe_branch(sp, x, v, alpha + eps, o);
      const double own = null_dir ? 0.0 : b.own;
      if (b.d > own + slack(o, alpha + eps, vn)) {
        NonMaxWitness w;
        w.a = 0.0;
        w.b = alpha + eps;
        w.from = x;
        w.to = b.point;
        w.own_length = own;
        w.competitor_length = b.d;
        return w;
      }
    } catch (const DomainExceeded&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Whether y lies on a future ray from x, decided up to the horizon.
inline AubryVerdict in_future_aubry(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                    double horizon, const CutOptions& o = {}) {
  auto ms = connect(sp, x, y, o.connect);
  AubryVerdict out;
  out.horizon = horizon;
  if (ms.maximizers.empty() || ms.maximizers.front().cls == CausalityClass::Zero)
    throw DomainError("in_future_aubry: y must differ from x");
  if (ms.multiplicity() >= 2) {
    CutRecord r;
    r.x = x;
    r.v = ms.maximizers.front().v;
    r.alpha = {CutTime::Kind::Finite, 1.0};
    r.cut_point = y;
    r.multi_geodesic = true;
    r.nearby_maximizers = ms;
    NonMaxWitness w;
    w.a = 0.0;
    w.b = 1.0;
    w.from = x;
    w.to = y;
    w.own_length = ms.d;
    w.competitor_length = ms.d;
    w.second_maximizer = true;
    out.kind = AubryVerdict::Kind::NotInAubry;
    out.evidence = r;
    out.witness = w;
    return out;
  }
  const Candidate& m = ms.maximizers.front();
  CutRecord r;
  r.x = x;
  r.v = m.v;
  r.alpha = cut_time(sp, x, m.v, horizon, o);
  if (r.alpha.kind == CutTime::Kind::AtHorizon) {
    out.kind = AubryVerdict::Kind::InAubryUpToHorizon;
    out.evidence = r;
    return out;
  }
  if (r.alpha.kind == CutTime::Kind::AtDomainBoundary) {
    out.kind = AubryVerdict::Kind::DomainIncomplete;
    out.t_reach = r.alpha.value;
    out.evidence = r;
    return out;
  }
  r = classify_cut(sp, r, o);
  out.kind = AubryVerdict::Kind::NotInAubry;
  out.witness = detail::witness_after(sp, x, m.v, r.alpha.value, o);
  out.evidence = r;
  return out;
}

/// Result of growing [a, b] ⊇ [0, 1] along γ until maximality fails.
struct ExtensionSearch {
  bool certified = false;  // non-maximizing on [a, b]
  double a = 0.0, b = 1.0;
  bool clipped_past = false, clipped_future = false;
  double reach_past = -kInf, reach_future = kInf;
  std::optional<NonMaxWitness> witness;
};

namespace detail {

/// Point γ(s) along exp_x(s v), recording where the domain ends.
inline std::optional<ChartPoint> try_point(const Spacetime& sp, const ChartPoint& x,
                                           const TangentVector& v, double s, double tol,
                                           double& reach) {
  try {
    return exp_map(sp, x, v, s, tol);
  } catch (const DomainExceeded& e) {
    reach = e.t_reach();
    return std::nullopt;
  }
}

inline bool excess_certifies(const Spacetime& sp, const ChartPoint& p, const ChartPoint& q,
                             double own, double threshold, const CutOptions& o, double& d_out) {
  try {
    d_out = connect(sp, p, q, o.connect).d;
  } catch (const NotCausallyRelated&) {
    d_out = 0.0;
    return false;
  }
  return d_out > own + threshold;
}

}  // namespace detail

/// Grow b from b0 and shrink a from a0 geometrically until the distance
/// between γ(a) and γ(b) exceeds the length of γ on [a, b] by margin * slack.
inline ExtensionSearch extension_search(const Spacetime& sp, const ChartPoint& x,
                                        const TangentVector& v, double a0, double b0,
                                        double factor, double horizon, double margin,
                                        const CutOptions& o = {}) {
  ExtensionSearch out;
  const double vn = lorentz_norm(sp, x, v);
  const bool null_dir = causal_class(sp, x, v) == CausalityClass::FutureNull;
  const double T = parameter_horizon(v, horizon);
  double a = a0, b = b0;
  bool a_done = false, b_done = false;
  double growth_a = -a0, growth_b = b0 - 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    double reach = 0.0;
    std::optional<ChartPoint> pb, pa;
    // clip the future end
    while (!(pb = detail::try_point(sp, x, v, b, o.connect.integrator_tol, reach))) {
      out.clipped_future = true;
      out.reach_future = reach;
      b = std::max(1.0, reach * (1.0 - 1e-9));
      b_done = true;
    }
    while (!(pa = detail::try_point(sp, x, v, a, o.connect.integrator_tol, reach))) {
      out.clipped_past = true;
      out.reach_past = reach;
      a = std::min(0.0, reach * (1.0 - 1e-9));
      a_done = true;
    }
    const double own = null_dir ? 0.0 : (b - a) * vn;
    double d = 0.0;
    if (detail::excess_certifies(sp, *pa, *pb, own, margin * slack(o, b - a, vn), o, d)) {
      out.certified = true;
      out.a = a;
      out.b = b;
      NonMaxWitness w;
      w.a = a;
      w.b = b;
      w.from = *pa;
      w.to = *pb;
      w.own_length = own;
      w.competitor_length = d;
      out.witness = w;
      return out;
    }
    out.a = a;
    out.b = b;
    if (b >= T) b_done = true;
    if (-a >= T) a_done = true;
    if (a_done && b_done) return out;
    if (!b_done) {
      growth_b *= factor;
      b = std::min(1.0 + growth_b, T);
    }
    if (!a_done) {
      growth_a *= factor;
      a = std::max(-growth_a, -T);
    }
  }
  return out;
}

/// Whether (x, y) lies on a maximizing line, decided on [-horizon, horizon].
inline AubryVerdict in_pair_aubry(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                  double horizon, const CutOptions& o = {}) {
  auto ms = connect(sp, x, y, o.connect);
  AubryVerdict out;
  out.horizon = horizon;
  if (ms.maximizers.empty() || ms.maximizers.front().cls == CausalityClass::Zero)
    throw DomainError("in_pair_aubry: y must differ from x");
  if (ms.multiplicity() >= 2) {
    NonMaxWitness w;
    w.a = 0.0;
    w.b = 1.0;
    w.from = x;
    w.to = y;
    w.own_length = ms.d;
    w.competitor_length = ms.d;
    w.second_maximizer = true;
    out.kind = AubryVerdict::Kind::NotInAubry;
    out.witness = w;
    return out;
  }
  const Candidate& m = ms.maximizers.front();
  auto ext = extension_search(sp, x, m.v, -0.1, 1.1, 1.5, horizon, 1.0, o);
  if (ext.certified) {
    out.kind = AubryVerdict::Kind::NotInAubry;
    out.witness = ext.witness;
    return out;
  }
  if (ext.clipped_future || ext.clipped_past) {
    out.kind = AubryVerdict::Kind::DomainIncomplete;
    out.t_reach = ext.clipped_future ? ext.reach_future : ext.reach_past;
    return out;
  }
  out.kind = AubryVerdict::Kind::InAubryUpToHorizon;
  return out;
}

struct CutMembership {
  bool in_cut = false;
  bool multi = false;
  double alpha = kInf;  // smallest cut time over maximizers, parameter of y is 1
};

/// Whether y is a cut point of x: two maximizers, or α = 1 within tol along the maximizer.
inline CutMembership in_cut(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                            double horizon, double tol = 1e-4, const CutOptions& o = {}) {
  CutMembership r;
  auto ms = connect(sp, x, y, o.connect);
  if (ms.maximizers.empty() || ms.maximizers.front().cls == CausalityClass::Zero) return r;
  r.multi = ms.multiplicity() >= 2;
  for (const auto& m : ms.maximizers) {
    auto a = cut_time(sp, x, m.v, horizon, o);
    if (a.finite()) r.alpha = std::min(r.alpha, a.value);
  }
  r.in_cut = r.multi || std::abs(r.alpha - 1.0) <= tol;
  return r;
}

}  // namespace lorkam
