#pragma once

// Deformation retractions onto cut loci: the point retraction along a
// maximizer up to its cut time, the pair retraction driven by φ± and β,
// and the Cut -> NU step that flows the pair, retracts and applies F̄.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "lorkam/cutlocus.hpp"
#include "lorkam/distance.hpp"
#include "lorkam/errors.hpp"
#include "lorkam/laxoleinik.hpp"
#include "lorkam/spacetime.hpp"
#include "lorkam/types.hpp"

namespace lorkam {

struct HomotopyOptions {
  double horizon = 1e3;
  double alpha_consistency = 1e-4;  // multi-maximizer inputs must have α = 1 within this
  double beta_tol = 1e-9;
  double phi_a0 = -0.1, phi_b0 = 1.1, phi_factor = 1.5, phi_margin = 1.1;
  double flow_resolution = 1e-3;
  CutOptions cut;
  LOOptions lo;
};

namespace detail {

/// Unique maximizer of (x, y), or nullopt for a Cut_M pair (after checking α = 1 on each).
inline std::optional<Candidate> single_maximizer(const Spacetime& sp, const ChartPoint& x,
                                                 const ChartPoint& y, const HomotopyOptions& o,
                                                 const MaximizerSet& ms) {
  if (ms.maximizers.empty() || ms.maximizers.front().cls == CausalityClass::Zero)
    throw DomainError("retraction needs y different from x");
  if (ms.multiplicity() == 1) return ms.maximizers.front();
  for (const auto& m : ms.maximizers) {
    auto a = cut_time(sp, x, m.v, o.horizon, o.cut);
    if (!a.finite() || std::abs(a.value - 1.0) > o.alpha_consistency)
      throw InconsistentCut("maximizers of a multi-geodesic pair disagree about the cut time (alpha=" +
                            fmt_g(a.value) + ")");
  }
  (void)y;
  return std::nullopt;
}

/// Length excess on γ|[a, b] over the geodesic's own branch, in the cover.
struct SegmentProbe {
  double d = 0.0;
  double own = 0.0;
  double competitor = -kInf;
};

inline SegmentProbe segment_probe(const Spacetime& sp, const ChartPoint& x, const TangentVector& v,
                                  double a, double b, const CutOptions& o) {
  SegmentProbe r;
  ChartPoint p = exp_map(sp, x, v, a, o.connect.integrator_tol);
  ChartPoint q = exp_map(sp, x, v, b, o.connect.integrator_tol);
  const bool null_dir = causal_class(sp, x, v) == CausalityClass::FutureNull;
  r.own = null_dir ? 0.0 : (b - a) * lorentz_norm(sp, x, v);
  auto ms = connect(sp, p, q, o.connect);
  r.d = ms.d;
  // lifts are relative to p, which sits in the same cover as q
  const Candidate* own = nullptr;
  double best = kInf;
  for (const auto& c : ms.candidates) {
    const double e = (c.target.coords - q.coords).norm();
    if (e < best) {
      best = e;
      own = &c;
    }
  }
  if (own && best > 1e-6 * (1.0 + q.coords.norm())) own = nullptr;
  for (const auto& c : ms.candidates)
    if (&c != own) r.competitor = std::max(r.competitor, c.length);
  return r;
}

}  // namespace detail

struct PointRetraction {
  ChartPoint image;
  double alpha = 1.0;
  TangentVector v;
  bool fixed = false;  // input already in Cut(x)
};

/// exp_x(((1 - τ) + τ α(x, v)) v) for the maximizer v with exp_x(v) = y.
inline PointRetraction retract_point_detail(const Spacetime& sp, const ChartPoint& x,
                                            const ChartPoint& y, double tau,
                                            const HomotopyOptions& o = {}) {
  if (tau < 0.0 || tau > 1.0) throw ConfigError("retract_point: tau must lie in [0, 1]");
  auto ms = connect(sp, x, y, o.cut.connect);
  PointRetraction r;
  auto m = detail::single_maximizer(sp, x, y, o, ms);
  if (!m) {
    r.image = y;
    r.fixed = true;
    r.v = ms.maximizers.front().v;
    return r;
  }
  r.v = m->v;
  auto a = cut_time(sp, x, m->v, o.horizon, o.cut);
  if (!a.finite()) throw InAubry("retract_point: y lies on a future ray from x (up to the horizon)");
  r.alpha = a.value;
  if (tau == 0.0) {
    r.image = y;
    return r;
  }
  r.image = exp_map(sp, x, m->v, (1.0 - tau) + tau * r.alpha, o.cut.connect.integrator_tol);
  return r;
}

inline ChartPoint retract_point(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                double tau, const HomotopyOptions& o = {}) {
  return retract_point_detail(sp, x, y, tau, o).image;
}

struct PairBounds {
  double phi_minus = 0.0;
  double phi_plus = 1.0;
  bool clipped_past = false, clipped_future = false;
  NonMaxWitness witness;
  TangentVector v;
  bool multi = false;  // (x, y) already in Cut_M
};

/// Interval [φ⁻, φ⁺] ⊇ [0, 1] on which the extension of the maximizer is not maximizing.
inline PairBounds phi_bounds(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                             const HomotopyOptions& o = {}) {
  auto ms = connect(sp, x, y, o.cut.connect);
  if (ms.maximizers.empty() || ms.maximizers.front().cls == CausalityClass::Zero)
    throw DomainError("phi_bounds: y must differ from x");
  PairBounds pb;
  pb.multi = ms.multiplicity() >= 2;
  pb.v = ms.maximizers.front().v;
  auto ext = extension_search(sp, x, pb.v, o.phi_a0, o.phi_b0, o.phi_factor, o.horizon,
                              o.phi_margin, o.cut);
  if (!ext.certified) throw InAubry("phi_bounds: the extension stays maximizing up to the horizon");
  pb.phi_minus = ext.a;
  pb.phi_plus = ext.b;
  pb.clipped_past = ext.clipped_past;
  pb.clipped_future = ext.clipped_future;
  pb.witness = *ext.witness;
  return pb;
}

/// sup of τ in [0, 1) with γ maximizing on [τ φ⁻, (1 - τ) + τ φ⁺]; 0 on Cut_M.
inline double beta_value(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                         const PairBounds& b, const HomotopyOptions& o = {}) {
  if (b.multi) return 0.0;
  auto ms = connect(sp, x, y, o.cut.connect);
  if (ms.multiplicity() >= 2) return 0.0;
  const TangentVector& v = b.v;
  const double vn = lorentz_norm(sp, x, v);
  const bool null_dir = causal_class(sp, x, v) == CausalityClass::FutureNull;
  auto ends = [&](double tau) {
    return std::make_pair(tau * b.phi_minus, (1.0 - tau) + tau * b.phi_plus);
  };
  auto maximizing = [&](double tau) {
    auto [a, e] = ends(tau);
    auto p = detail::segment_probe(sp, x, v, a, e, o.cut);
    return p.d <= p.own + slack(o.cut, e - a, vn);
  };
  double lo = 0.0, hi = 1.0;
  while (hi - lo > o.beta_tol) {
    const double mid = 0.5 * (lo + hi);
    (maximizing(mid) ? lo : hi) = mid;
  }
  double beta = 0.5 * (lo + hi);
  if (o.cut.refine) {
    try {
      if (!null_dir) {
        auto gap = [&](double tau) {
          auto [a, e] = ends(tau);
          auto p = detail::segment_probe(sp, x, v, a, e, o.cut);
          return (std::isfinite(p.competitor) ? p.competitor : 0.0) - p.own;
        };
        const double ghi = gap(hi);
        if (ghi > 0.0) {
          double a = lo, ga = gap(a), step = std::max(o.beta_tol, 1e-6);
          for (int i = 0; i < 60 && ga >= 0.0 && a > 0.0; ++i) {
            a = std::max(0.0, lo - step);
            ga = gap(a);
            step *= 2.0;
          }
          if (ga < 0.0) {
            std::uintmax_t it = 100;
            auto tol = boost::math::tools::eps_tolerance<double>(48);
            auto [r0, r1] = boost::math::tools::toms748_solve(gap, a, hi, ga, ghi, tol, it);
            beta = 0.5 * (r0 + r1);
          }
        }
      } else {
        auto comp2 = [&](double tau) {
          auto [a, e] = ends(tau);
          auto p = detail::segment_probe(sp, x, v, a, e, o.cut);
          if (!std::isfinite(p.competitor)) throw ConvergenceFailure("no competitor");
          return p.competitor * p.competitor;
        };
        double t1 = hi, d = std::max(1e-4, 10.0 * (hi - lo));
        for (int round = 0; round < 3 && t1 + d <= 1.0; ++round) {
          const double l1 = comp2(t1), l2 = comp2(t1 + d);
          if (!(l2 > l1)) break;
          const double cand = t1 - l1 * d / (l2 - l1);
          if (!(cand > lo - 10.0 * (hi - lo) && cand <= hi)) break;
          beta = cand;
          d = 1e-7;
          t1 = beta + d;
        }
      }
    } catch (const Error&) {
      // keep the bisection value
    }
  }
  return std::clamp(beta, 0.0, 1.0);
}

struct PairRetraction {
  ChartPoint first, second;
  double beta = 0.0;
  PairBounds bounds;
};

/// (γ(τ β φ⁻), γ((1 - τ β) + τ β φ⁺)) along the maximizer γ from x to y.
inline PairRetraction retract_pair_detail(const Spacetime& sp, const ChartPoint& x,
                                          const ChartPoint& y, double tau,
                                          const HomotopyOptions& o = {}) {
  if (tau < 0.0 || tau > 1.0) throw ConfigError("retract_pair: tau must lie in [0, 1]");
  PairRetraction r;
  r.bounds = phi_bounds(sp, x, y, o);
  r.beta = beta_value(sp, x, y, r.bounds, o);
  if (tau == 0.0 || r.beta == 0.0) {
    r.first = x;
    r.second = y;
    return r;
  }
  const double tb = tau * r.beta;
  const double a = tb * r.bounds.phi_minus;
  const double b = (1.0 - tb) + tb * r.bounds.phi_plus;
  const double tol = o.cut.connect.integrator_tol;
  r.first = exp_map(sp, x, r.bounds.v, a, tol);
  r.second = exp_map(sp, x, r.bounds.v, b, tol);
  return r;
}

inline std::pair<ChartPoint, ChartPoint> retract_pair(const Spacetime& sp, const ChartPoint& x,
                                                      const ChartPoint& y, double tau,
                                                      const HomotopyOptions& o = {}) {
  auto r = retract_pair_detail(sp, x, y, tau, o);
  return {r.first, r.second};
}

enum class StepMode { Pair, FixedX };

struct CutToNuResult {
  ChartPoint first, second;
  double flow_time = 0.0;  // τ T
  double T = 0.0;
  bool nu = false;
};

/// One Cut -> NU step: flow y along ∂_t for τ T, retract, then apply F̄(τ, ·, ·) with ε.
inline CutToNuResult cut_to_nu_step(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                    double tau, double eps, StepMode mode = StepMode::Pair,
                                    const HomotopyOptions& o = {}) {
  if (tau < 0.0 || tau > 1.0) throw ConfigError("cut_to_nu_step: tau must lie in [0, 1]");
  CutToNuResult r;
  if (tau == 0.0) {
    r.first = x;
    r.second = y;
    return r;
  }
  auto flowed = [&](double T) {
    ChartPoint q = y;
    q.coords[0] += tau * T;
    return q;
  };
  auto keeps_witness = [&](double T) {
    try {
      ChartPoint q = flowed(T);
      check_point(sp, q);
      auto v = mode == StepMode::Pair ? in_pair_aubry(sp, x, q, o.horizon, o.cut)
                                      : in_future_aubry(sp, x, q, o.horizon, o.cut);
      return v.kind == AubryVerdict::Kind::NotInAubry;
    } catch (const Error&) {
      return false;
    }
  };
  double T = 1.0;
  if (!keeps_witness(T)) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > o.flow_resolution) {
      const double mid = 0.5 * (lo + hi);
      (keeps_witness(mid) ? lo : hi) = mid;
    }
    T = lo;
    if (T <= 0.0)
      throw SafetyBoundHit("cut_to_nu_step: no positive flow time keeps the pair out of the Aubry set");
  }
  r.T = T;
  r.flow_time = tau * T;
  const ChartPoint q = flowed(T);
  ChartPoint xp = x, yp = q;
  if (mode == StepMode::Pair) {
    auto pr = retract_pair_detail(sp, x, q, 1.0, o);
    xp = pr.first;
    yp = pr.second;
  } else {
    yp = retract_point(sp, x, q, 1.0, o);
  }
  auto fb = fbar_map_detail(sp, xp, yp, tau, eps, o.lo, o.horizon);
  r.first = xp;
  r.second = fb.z;
  r.nu = is_nu(sp, r.first, r.second, o.lo.connect).nu;
  return r;
}

struct RetractionTrace {
  std::vector<double> params;
  std::vector<std::pair<ChartPoint, ChartPoint>> images;  // (x, image) for point retractions
  std::vector<bool> out_of_aubry;
  bool endpoint_in_cut = false;
  double max_step = 0.0;
};

enum class TraceKind { Point, Pair };

/// Sample a retraction at n equally spaced τ; optionally certify each sample.
inline RetractionTrace retraction_trace(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                        int n, TraceKind kind, bool certify,
                                        const HomotopyOptions& o = {}) {
  if (n < 2) throw ConfigError("retraction_trace: need at least two samples");
  RetractionTrace tr;
  std::optional<PointRetraction> pr;
  std::optional<PairRetraction> pp;
  if (kind == TraceKind::Point) {
    pr = retract_point_detail(sp, x, y, 1.0, o);
  } else {
    pp = retract_pair_detail(sp, x, y, 1.0, o);
  }
  const double tol = o.cut.connect.integrator_tol;
  for (int i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i) / (n - 1);
    std::pair<ChartPoint, ChartPoint> img;
    if (kind == TraceKind::Point) {
      if (tau == 0.0 || pr->fixed)
        img = {x, y};
      else
        img = {x, exp_map(sp, x, pr->v, (1.0 - tau) + tau * pr->alpha, tol)};
    } else {
      if (tau == 0.0 || pp->beta == 0.0) {
        img = {x, y};
      } else {
        const double tb = tau * pp->beta;
        img = {exp_map(sp, x, pp->bounds.v, tb * pp->bounds.phi_minus, tol),
               exp_map(sp, x, pp->bounds.v, (1.0 - tb) + tb * pp->bounds.phi_plus, tol)};
      }
    }
    if (!tr.images.empty()) {
      const auto& prev = tr.images.back();
      tr.max_step = std::max(tr.max_step, reference_distance(sp, prev.first, img.first) +
                                              reference_distance(sp, prev.second, img.second));
    }
    if (certify) {
      bool out = false;
      try {
        auto v = kind == TraceKind::Point
                     ? in_future_aubry(sp, img.first, img.second, o.horizon, o.cut)
                     : in_pair_aubry(sp, img.first, img.second, o.horizon, o.cut);
        out = v.kind == AubryVerdict::Kind::NotInAubry;
      } catch (const Error&) {
        out = false;
      }
      tr.out_of_aubry.push_back(out);
    }
    tr.params.push_back(tau);
    tr.images.push_back(img);
  }
  if (certify) {
    const auto& last = tr.images.back();
    try {
      tr.endpoint_in_cut = in_cut(sp, last.first, last.second, o.horizon, 1e-4, o.cut).in_cut;
    } catch (const Error&) {
      tr.endpoint_in_cut = false;
    }
  }
  return tr;
}

}  // namespace lorkam
