#pragma once

// Acceptance run: criteria 1-10 against closed-form and brute-force
// references. Tolerances are fixed here and nowhere else.

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lorkam/cutlocus.hpp"
#include "lorkam/distance.hpp"
#include "lorkam/geodesic.hpp"
#include "lorkam/homotopy.hpp"
#include "lorkam/laxoleinik.hpp"
#include "lorkam/spacetime.hpp"
#include "lorkam/testing/oracles.hpp"

namespace lorkam::verify {

namespace tol {
inline constexpr double distance = 1e-8;
inline constexpr double distance_runtime_s = 60.0;
inline constexpr double legendre = 1e-10;
inline constexpr double hamiltonian = 1e-10;
inline constexpr double action = 1e-6;
inline constexpr double cut_law = 1e-4;
inline constexpr double cut_horizon = 1e3;
inline constexpr double lo_spread = 1e-6;
inline constexpr double lo_runtime_s = 120.0;
inline constexpr double kink_fraction = 0.9;
inline constexpr double c1_factor = 10.0;
inline constexpr double sd_growth = 2.0;  // a kink would grow second differences 4x over the grids
inline constexpr double sandwich = 1e-7;
inline constexpr double cut_param = 1e-4;
inline constexpr double conjugate = 1e-6;
inline constexpr double jacobi_oracle_tol = 1e-12;
}  // namespace tol

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  unsigned seed = 7;
};

namespace detail {

struct Outcome {
  bool pass = true;
  std::ostringstream msg;
  std::vector<std::string> failures;
  void fail(const std::string& why) {
    failures.push_back(why);
    pass = false;
  }
};

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline ChartPoint random_cylinder_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(-5.0, 5.0), th(-kPi, kPi);
  return ChartPoint{t(rng), th(rng)};
}

// 1 ------------------------------------------------------------------
inline void distance_oracle(Outcome& out, const Options& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  auto cyl = Spacetime::cylinder(8);
  auto mk2 = Spacetime::minkowski(2), mk3 = Spacetime::minkowski(3);
  double worst = 0.0;
  int mult_mismatch = 0, relation_mismatch = 0, multi_pairs = 0, unrelated = 0;
  auto check = [&](const Spacetime& sp, const ChartPoint& x, const ChartPoint& y) {
    auto ref = oracle::flat_distance(sp, x, y);
    try {
      auto ms = connect(sp, x, y);
      if (!ref.related) {
        ++relation_mismatch;
        return;
      }
      worst = std::max(worst, std::abs(ms.d - ref.d));
      if (static_cast<int>(ms.multiplicity()) != ref.multiplicity) ++mult_mismatch;
      if (ref.multiplicity > 1) ++multi_pairs;
    } catch (const NotCausallyRelated&) {
      if (ref.related) ++relation_mismatch;
      else ++unrelated;
    }
  };
  for (int i = 0; i < 500; ++i) {
    ChartPoint x = random_cylinder_point(rng);
    const double dt = 0.2 + 9.8 * U(rng);
    // one pair in ten sits on the antipodal ridge
    const double dth = i % 10 == 0 ? kPi : kPi * (2.0 * U(rng) - 1.0);
    check(cyl, x, ChartPoint{x[0] + dt, x[1] + dth});
  }
  for (int i = 0; i < 500; ++i) {
    const Spacetime& sp = i % 2 ? mk3 : mk2;
    const double dt = 0.2 + 9.8 * U(rng);
    ChartPoint x = sp.dim == 2 ? ChartPoint{10 * U(rng) - 5, 10 * U(rng) - 5}
                               : ChartPoint{10 * U(rng) - 5, 10 * U(rng) - 5, 10 * U(rng) - 5};
    const double r = 1.2 * dt * U(rng), phi = kTwoPi * U(rng);
    ChartPoint y = x;
    y[0] += dt;
    if (sp.dim == 2) {
      y[1] += phi < kPi ? r : -r;
    } else {
      y[1] += r * std::cos(phi);
      y[2] += r * std::sin(phi);
    }
    check(sp, x, y);
  }
  // the same cylinder written as a tabulated unit warp goes through the integrator
  auto unit = Spacetime::warped(Profile::tabulated(std::vector<double>(121, 1.0), -20.0, 0.5), -20.0, 40.0);
  for (int i = 0; i < 100; ++i) {
    ChartPoint x = random_cylinder_point(rng);
    const double dt = 0.2 + 9.8 * U(rng);
    const double dth = i % 10 == 0 ? kPi : kPi * (2.0 * U(rng) - 1.0);
    check(unit, x, ChartPoint{x[0] + dt, x[1] + dth});
  }
  const double secs = elapsed(t0);
  out.msg << "max|d-d_ref|=" << worst << " multiplicity_mismatch=" << mult_mismatch
          << " relation_mismatch=" << relation_mismatch << " multi_pairs=" << multi_pairs
          << " unrelated=" << unrelated << " runtime=" << secs << "s";
  if (worst > tol::distance) out.fail("distance error above tolerance");
  if (mult_mismatch) out.fail("multiplicity mismatch");
  if (relation_mismatch) out.fail("relation mismatch");
  if (secs >= tol::distance_runtime_s) out.fail("runtime");
}

// 2 ------------------------------------------------------------------
inline void formula_suite(Outcome& out, const Options& opt) {
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Spacetime> specs{Spacetime::cylinder(8), spacetime_from_name("warped-cosh"),
                               spacetime_from_name("warped-2cos"), Spacetime::minkowski(3)};
  double leg = 0.0, ham = 0.0;
  for (int i = 0; i < 400; ++i) {
    const Spacetime& sp = specs[static_cast<std::size_t>(i) % specs.size()];
    ChartPoint x = sp.dim == 2 ? ChartPoint{4 * U(rng) - 2, 6 * U(rng) - 3}
                               : ChartPoint{4 * U(rng) - 2, 6 * U(rng) - 3, 6 * U(rng) - 3};
    const double a = sp.a(x.t());
    const double v0 = 0.2 + 3 * U(rng), frac = 0.98 * U(rng), phi = kTwoPi * U(rng);
    TangentVector v = sp.dim == 2 ? TangentVector{v0, (phi < kPi ? 1 : -1) * frac * v0 / a}
                                  : TangentVector{v0, frac * v0 * std::cos(phi), frac * v0 * std::sin(phi)};
    auto p = legendre(sp, x, v);
    auto back = legendre_inverse(sp, x, p);
    leg = std::max(leg, (back.components - v.components).norm() / v.components.norm());
    const double vn = lorentz_norm(sp, x, v);
    ham = std::max(ham, std::abs(hamiltonian(sp, x, p) - 0.5 * std::sqrt(vn)));
  }
  // c_t against the action of the maximizers themselves, sampled at breakpoints
  double act = 0.0;
  int paths = 0;
  std::vector<std::pair<Spacetime, std::pair<ChartPoint, ChartPoint>>> pairs{
      {Spacetime::cylinder(8), {ChartPoint{0, 0}, ChartPoint{4, kPi}}},
      {Spacetime::cylinder(8), {ChartPoint{0, 0}, ChartPoint{3, 1}}},
      {Spacetime::cylinder(8), {ChartPoint{-1, 2}, ChartPoint{6, -2.5}}},
      {spacetime_from_name("warped-cosh"), {ChartPoint{0, 0}, ChartPoint{2, 0.3}}},
      {spacetime_from_name("warped-2cos"), {ChartPoint{0, 0}, ChartPoint{3, 0.4}}},
      {Spacetime::minkowski(3), {ChartPoint{0, 0, 0}, ChartPoint{3, 1, -1}}}};
  for (const auto& [sp, xy] : pairs) {
    const auto& [x, y] = xy;
    auto ms = connect(sp, x, y);
    for (double t : {0.5, 1.0, 2.0}) {
      const double c = action_c(sp, t, x, y);
      for (const auto& m : ms.maximizers) {
        PathSample ps;
        for (int k = 0; k <= 4; ++k) {
          const double lam = k / 4.0;
          ps.breakpoints.emplace_back(lam, k == 4 ? m.target : k == 0 ? x : exp_map(sp, x, m.v, lam, 1e-12));
        }
        act = std::max(act, std::abs(path_action(sp, ps, t) - c));
        ++paths;
      }
    }
  }
  out.msg << "legendre_roundtrip=" << leg << " hamiltonian=" << ham << " action_vs_path=" << act
          << " paths=" << paths;
  if (leg > tol::legendre) out.fail("legendre");
  if (ham > tol::hamiltonian) out.fail("hamiltonian");
  if (act > tol::action) out.fail("action");
}

// 3 ------------------------------------------------------------------
inline void cut_time_law(Outcome& out, const Options&) {
  auto cyl = Spacetime::cylinder(8);
  ChartPoint x{0, 0};
  double worst = 0.0;
  int non_finite = 0;
  for (int i = 1; i <= 33; ++i) {
    const double w = i / 34.0;
    auto a = cut_time(cyl, x, TangentVector{1, w}, tol::cut_horizon);
    if (!a.finite()) {
      ++non_finite;
      continue;
    }
    worst = std::max(worst, std::abs(a.value * w - kPi));
  }
  auto null_a = cut_time(cyl, x, TangentVector{1, 1}, tol::cut_horizon);
  const double null_err = null_a.finite() ? std::abs(null_a.value - kPi) : kInf;
  int not_horizon = 0, fan = 0;
  for (const auto& r : cut_locus_sample(Spacetime::minkowski(2), x, 33, tol::cut_horizon)) {
    ++fan;
    if (!r.error.empty() || r.alpha.kind != CutTime::Kind::AtHorizon) ++not_horizon;
  }
  for (int i = 0; i < 8; ++i) {
    const double phi = kTwoPi * i / 8;
    auto a = cut_time(Spacetime::minkowski(3), ChartPoint{0, 0, 0},
                      TangentVector{1, 0.7 * std::cos(phi), 0.7 * std::sin(phi)}, tol::cut_horizon);
    ++fan;
    if (a.kind != CutTime::Kind::AtHorizon) ++not_horizon;
  }
  out.msg << "max|alpha*w-pi|=" << worst << " null|alpha-pi|=" << null_err
          << " minkowski_not_at_horizon=" << not_horizon << "/" << fan;
  if (non_finite) out.fail("cylinder direction without finite cut time");
  if (worst > tol::cut_law) out.fail("cut law");
  if (!(null_err <= tol::cut_law)) out.fail("null cut time");
  if (not_horizon) out.fail("minkowski fan");
}

// 4 ------------------------------------------------------------------
inline void dichotomy(Outcome& out, const Options&) {
  int gaps = 0, other_errors = 0, unclassified = 0, finite = 0, not_exactly_multi = 0;
  for (const char* name : {"cylinder", "warped-2cos"}) {
    auto sp = spacetime_from_name(name);
    const bool flat = sp.kind == Spacetime::Kind::Cylinder;
    for (const auto& r : cut_locus_sample(sp, ChartPoint{0, 0}, 33, tol::cut_horizon)) {
      if (!r.error.empty()) {
        (r.error.find("ClassificationGap") != std::string::npos ? gaps : other_errors)++;
        continue;
      }
      if (!r.alpha.finite()) continue;
      ++finite;
      if (!r.classified()) ++unclassified;
      if (flat && !(r.multi_geodesic && !r.conjugate)) ++not_exactly_multi;
    }
  }
  out.msg << "finite_records=" << finite << " unclassified=" << unclassified
          << " classification_gaps=" << gaps << " other_errors=" << other_errors
          << " cylinder_not_exactly_multi=" << not_exactly_multi;
  if (gaps) out.fail("classification gap");
  if (other_errors) out.fail("direction errors");
  if (unclassified) out.fail("unclassified cut point");
  if (not_exactly_multi) out.fail("cylinder classification");
  if (finite == 0) out.fail("no finite cut times");
}

// 5 ------------------------------------------------------------------
inline void desk_check(Outcome& out, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cyl = Spacetime::cylinder(8);
  ChartPoint x{0, 0}, y{5, kPi};
  LOOptions lo;
  auto f0 = f_map(cyl, 0.0, x, y, lo);
  const bool f0_exact = f0.coords == y.coords;
  double worst_ridge = 0.0, worst_spread = 0.0, worst_ratio = 0.0;
  bool nu_all = true;
  for (double s : {0.01, 0.02, 0.03, 0.05}) {
    auto r = f_map_detail(cyl, s, x, y, lo);
    worst_ridge = std::max(worst_ridge, std::abs(wrap_angle(r.z[1] - kPi)));
    worst_ratio = std::max(worst_ratio, reference_distance(cyl, y, r.z) / (lo.C0 * std::sqrt(s)));
    nu_all = nu_all && r.nu_checked && r.nu;
    double lo_t = kInf, hi_t = -kInf, lo_th = kInf, hi_th = -kInf;
    for (unsigned k = 1; k <= 10; ++k) {
      LOOptions j = lo;
      j.jitter = 0.25;
      j.seed = opt.seed * 1000 + k;
      auto e = backward_forward(cyl, s, 1.0 + s, x, y, j);
      lo_t = std::min(lo_t, e.argmax_z[0]);
      hi_t = std::max(hi_t, e.argmax_z[0]);
      lo_th = std::min(lo_th, e.argmax_z[1]);
      hi_th = std::max(hi_th, e.argmax_z[1]);
    }
    worst_spread = std::max({worst_spread, hi_t - lo_t, hi_th - lo_th});
  }
  const double secs = elapsed(t0);
  out.msg << "F(0)=y:" << (f0_exact ? "exact" : "no") << " max|theta-pi|=" << worst_ridge
          << " max d_h/(C0 sqrt s)=" << worst_ratio << " nu=" << (nu_all ? "all" : "not all")
          << " restart_spread=" << worst_spread << " runtime=" << secs << "s";
  if (!f0_exact) out.fail("F(0) != y");
  if (worst_ridge > 1e-9) out.fail("argmax off the ridge");
  if (worst_ratio > 1.0) out.fail("displacement bound");
  if (!nu_all) out.fail("is_nu");
  if (worst_spread > tol::lo_spread) out.fail("restart spread");
  if (secs >= tol::lo_runtime_s) out.fail("runtime");
}

// 6 ------------------------------------------------------------------
inline void regularity(Outcome& out, const Options&) {
  auto cyl = Spacetime::cylinder(8);
  ChartPoint x{0, 0}, c{5, kPi};
  auto sd = superdiff_action(cyl, x, c);
  double q_jump = 0.0;
  for (const auto& a : sd)
    for (const auto& b : sd) q_jump = std::max(q_jump, (a.second.components - b.second.components).norm());
  const double hs[3] = {1e-2, 5e-3, 2.5e-3};
  double T_jump_min = kInf, H_jump_ratio = 0.0;
  double H_upper[3], H_lower[3], T_lower[3];
  int failed = 0;
  for (int k = 0; k < 3; ++k) {
    auto g = GridSpec::centred(c, hs[k], 101);
    auto rt = regularity_probe(cyl, 0.0, 1.0, x, g);
    auto rh = regularity_probe(cyl, 0.05, 1.05, x, g, {}, tol::c1_factor);
    failed += rt.failed_points + rh.failed_points;
    T_jump_min = std::min(T_jump_min, rt.T_stats.gradient_jump);
    H_jump_ratio = std::max(H_jump_ratio, rh.H_stats.gradient_jump / hs[k]);
    H_upper[k] = rh.H_stats.sd_max;
    H_lower[k] = rh.H_stats.sd_min;
    T_lower[k] = rt.T_stats.sd_min;
  }
  // constants fixed from the coarsest grid
  const double C_up = tol::sd_growth * std::abs(H_upper[0]) + 1.0;
  const double C_lo = tol::sd_growth * std::abs(H_lower[0]) + 1.0;
  bool bounded = true;
  for (int k = 0; k < 3; ++k) bounded = bounded && H_upper[k] <= C_up && H_lower[k] >= -C_lo;
  out.msg << "|q+-q-|=" << q_jump << " T_jump_min=" << T_jump_min
          << " H_jump/h_max=" << H_jump_ratio << " H_sd=[" << H_lower[0] << "," << H_upper[0] << "]->["
          << H_lower[2] << "," << H_upper[2] << "] T_sd_min=" << T_lower[0] << "->" << T_lower[2]
          << " failed_points=" << failed;
  if (sd.size() < 2) out.fail("superdifferential has a single element");
  if (T_jump_min < tol::kink_fraction * q_jump) out.fail("T kink below prediction");
  if (H_jump_ratio > tol::c1_factor) out.fail("H gradient jump");
  if (!bounded) out.fail("H second differences not grid independent");
  if (failed) out.fail("failed grid points");
}

// 7 ------------------------------------------------------------------
inline void sandwich(Outcome& out, const Options& opt) {
  std::mt19937_64 rng(opt.seed + 7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto cyl = Spacetime::cylinder(8);
  auto wc = spacetime_from_name("warped-cosh");
  double lower = 0.0, upper = 0.0;
  int n = 0, errors = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool warped = i % 20 == 19;
    const Spacetime& sp = warped ? wc : cyl;
    ChartPoint x = warped ? ChartPoint{0.5 * U(rng), 0.5 * U(rng)} : random_cylinder_point(rng);
    const double dt = warped ? 0.5 + 1.5 * U(rng) : 1.0 + 7.0 * U(rng);
    // inside the light cone of x, so y is chronological
    const double spread = warped ? 0.6 * dt / sp.a(x[0] + dt) : 0.95 * std::min(dt, kPi);
    ChartPoint y{x[0] + dt, x[1] + spread * (2 * U(rng) - 1)};
    const double t = 0.5 + 1.5 * U(rng), s = 0.001 + 0.099 * U(rng);
    try {
      const double d = warped ? lorentz_distance(sp, x, y) : oracle::flat_distance(sp, x, y).d;
      const double T_t = oracle::action(t, d), T_ts = oracle::action(t - s, d);
      const double h = backward_forward(sp, s, t, x, y).value;
      lower = std::max(lower, T_t - h);
      upper = std::max(upper, h - T_ts);
      ++n;
    } catch (const Error& e) {
      if (errors++ == 0) out.msg << "first_error=\"" << e.what() << "\" ";
    }
  }
  out.msg << "evaluations=" << n << " max(T_t-H)=" << lower << " max(H-T_{t-s})=" << upper
          << " errors=" << errors;
  if (lower > tol::sandwich) out.fail("lower bound violated");
  if (upper > tol::sandwich) out.fail("upper bound violated");
  if (errors) out.fail("evaluation errors");
}

// 8 ------------------------------------------------------------------
inline void retraction_contracts(Outcome& out, const Options& opt) {
  std::mt19937_64 rng(opt.seed + 8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto cyl = Spacetime::cylinder(8);
  HomotopyOptions ho;
  int point_bad = 0, pair_bad = 0, aubry_bad = 0, chrono_bad = 0, fixed_bad = 0, errors = 0;
  double worst_alpha = 0.0;
  for (int i = 0; i < 50; ++i) {
    ChartPoint x = random_cylinder_point(rng);
    const double dt = 0.5 + 5.0 * U(rng);
    double dth = std::min(dt, kPi) * (0.05 + 0.9 * U(rng));
    if (i % 2) dth = -dth;
    ChartPoint y{x[0] + dt, x[1] + dth};
    try {
      auto tp = retraction_trace(cyl, x, y, 6, TraceKind::Point, true, ho);
      const auto& end = tp.images.back();
      auto cm = in_cut(cyl, end.first, end.second, ho.horizon, tol::cut_param, ho.cut);
      if (!cm.in_cut) ++point_bad;
      if (!cm.multi) worst_alpha = std::max(worst_alpha, std::abs(cm.alpha - 1.0));
      for (bool b : tp.out_of_aubry) aubry_bad += !b;

      auto tq = retraction_trace(cyl, x, y, 6, TraceKind::Pair, true, ho);
      if (!tq.endpoint_in_cut) ++pair_bad;
      for (bool b : tq.out_of_aubry) aubry_bad += !b;
      for (const auto& [p, q] : tq.images)
        if (!oracle::flat_distance(cyl, p, q).chronological) ++chrono_bad;
      for (const auto& [p, q] : tp.images)
        if (!oracle::flat_distance(cyl, p, q).chronological) ++chrono_bad;

      // Cut_M inputs (antipodal pairs) are fixed exactly by both retractions
      ChartPoint ya{x[0] + dt + kPi, x[1] + kPi};
      for (double tau : {0.0, 0.3, 1.0}) {
        auto fx = retract_pair(cyl, x, ya, tau, ho);
        if (fx.first.coords != x.coords || fx.second.coords != ya.coords) ++fixed_bad;
        if (retract_point(cyl, x, ya, tau, ho).coords != ya.coords) ++fixed_bad;
      }
    } catch (const Error& e) {
      ++errors;
      if (errors == 1) out.msg << "first_error=\"" << e.what() << "\" ";
    }
  }
  out.msg << "point_not_in_cut=" << point_bad << " max|alpha-1|=" << worst_alpha
          << " pair_not_in_cut=" << pair_bad << " cut_inputs_moved=" << fixed_bad
          << " samples_in_aubry=" << aubry_bad << " lost_chronology=" << chrono_bad
          << " errors=" << errors;
  if (point_bad || worst_alpha > tol::cut_param) out.fail("point retraction endpoint");
  if (pair_bad) out.fail("pair retraction endpoint");
  if (fixed_bad) out.fail("Cut_M not fixed");
  if (aubry_bad) out.fail("sample in Aubry set");
  if (chrono_bad) out.fail("chronology lost");
  if (errors) out.fail("errors");
}

// 9 ------------------------------------------------------------------
inline void aubry_verdicts(Outcome& out, const Options& opt) {
  std::mt19937_64 rng(opt.seed + 9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto cyl = Spacetime::cylinder(8);
  int axis_bad = 0, off_bad = 0, witness_bad = 0, mk_bad = 0;
  for (int t = 1; t <= 10; ++t) {
    auto v = in_future_aubry(cyl, ChartPoint{0, 0}, ChartPoint{double(t), 0}, tol::cut_horizon);
    if (v.kind != AubryVerdict::Kind::InAubryUpToHorizon) ++axis_bad;
  }
  CutOptions co;
  for (int i = 0; i < 20; ++i) {
    ChartPoint x = random_cylinder_point(rng);
    const double dt = 0.5 + 6 * U(rng);
    const double dth = (i % 2 ? 1 : -1) * std::min(dt, kPi) * (0.05 + 0.9 * U(rng));
    auto v = in_future_aubry(cyl, x, ChartPoint{x[0] + dt, x[1] + dth}, tol::cut_horizon);
    if (v.kind != AubryVerdict::Kind::NotInAubry || !v.witness) {
      ++off_bad;
      continue;
    }
    // the witness must exhibit a longer curve by the closed-form distance
    const auto& w = *v.witness;
    const double d_ref = oracle::flat_distance(cyl, w.from, w.to).d;
    const double len = w.b - w.a;
    if (!(d_ref > w.own_length + slack(co, len, w.own_length / len)) ||
        std::abs(d_ref - w.competitor_length) > 1e-8 || !(w.margin() > 0.0))
      ++witness_bad;
  }
  for (int i = 0; i < 20; ++i) {
    const bool three = i % 2;
    auto sp = Spacetime::minkowski(three ? 3 : 2);
    const double dt = 0.5 + 5 * U(rng), r = 0.9 * dt * U(rng), phi = kTwoPi * U(rng);
    ChartPoint x = three ? ChartPoint{0, 0, 0} : ChartPoint{0, 0};
    ChartPoint y = three ? ChartPoint{dt, r * std::cos(phi), r * std::sin(phi)}
                         : ChartPoint{dt, phi < kPi ? r : -r};
    auto v = in_future_aubry(sp, x, y, tol::cut_horizon);
    auto vp = in_pair_aubry(sp, x, y, tol::cut_horizon);
    if (v.kind != AubryVerdict::Kind::InAubryUpToHorizon ||
        vp.kind != AubryVerdict::Kind::InAubryUpToHorizon)
      ++mk_bad;
  }
  int incomplete = 0;
  auto slab = spacetime_from_name("warped-2cos-slab");
  for (double t : {1.0, 3.0, 6.0}) {
    auto v = in_future_aubry(slab, ChartPoint{0, 0}, ChartPoint{t, 0}, tol::cut_horizon);
    if (v.kind == AubryVerdict::Kind::DomainIncomplete) ++incomplete;
  }
  out.msg << "axis_not_in_aubry=" << axis_bad << "/10 off_axis_bad=" << off_bad
          << "/20 invalid_witness=" << witness_bad << " minkowski_bad=" << mk_bad
          << "/20 slab_domain_incomplete=" << incomplete << "/3";
  if (axis_bad) out.fail("axis pairs");
  if (off_bad) out.fail("off-axis pairs");
  if (witness_bad) out.fail("witness");
  if (mk_bad) out.fail("minkowski pairs");
  if (incomplete == 0) out.fail("no DomainIncomplete verdict on the slab");
}

// 10 -----------------------------------------------------------------
inline void conjugate_cross_check(Outcome& out, const Options&) {
  auto sp = spacetime_from_name("warped-2cos");
  const double horizon = 20.0;
  int disagree = 0;
  double worst_t = 0.0, worst_field = 0.0;
  for (double t0 : {0.0, 1.0, 2.0, kPi, 4.0, 5.5}) {
    ChartPoint x{t0, 0.0};
    TangentVector v{1.0, 0.0};
    auto ours = first_conjugate_time(sp, x, v, horizon);
    auto ref = oracle::scalar_jacobi(sp.profile, t0, horizon, tol::jacobi_oracle_tol);
    if (ours.has_value() != ref.first_zero.has_value()) {
      ++disagree;
    } else if (ours) {
      worst_t = std::max(worst_t, std::abs(*ours - *ref.first_zero));
    }
    // the transported field itself against the scalar solution
    auto geo = integrate_geodesic(sp, x, v, {0.0, horizon}, 1e-12);
    auto jac = jacobi_transport(sp, geo, TangentVector{0.0, 0.0}, TangentVector{0.0, 1.0 / sp.a(t0)});
    for (int k = 1; k <= 200; ++k) {
      const double s = horizon * k / 200.0;
      const double f = sp.a(t0 + s) * jac.J(s)(1, 0);
      worst_field = std::max(worst_field, std::abs(f - ref(s)) / (1.0 + std::abs(ref(s))));
    }
  }
  out.msg << "existence_disagreements=" << disagree << " max|t*-t*_ref|=" << worst_t
          << " max_rel|J-J_ref|=" << worst_field;
  if (disagree) out.fail("existence of conjugate point");
  if (worst_t > tol::conjugate) out.fail("conjugate time");
  if (worst_field > tol::conjugate) out.fail("Jacobi field");
}

}  // namespace detail

struct Criterion {
  int id;
  const char* name;
  void (*run)(detail::Outcome&, const Options&);
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "distance oracle equivalence", detail::distance_oracle},
      {2, "formula suite", detail::formula_suite},
      {3, "cylinder cut-time law", detail::cut_time_law},
      {4, "cut point dichotomy", detail::dichotomy},
      {5, "F desk check", detail::desk_check},
      {6, "regularity probe", detail::regularity},
      {7, "sandwich inequality", detail::sandwich},
      {8, "retraction contracts", detail::retraction_contracts},
      {9, "Aubry verdicts", detail::aubry_verdicts},
      {10, "conjugate point cross-validation", detail::conjugate_cross_check},
  };
  return all;
}

inline CriterionResult run_criterion(const Criterion& c, const Options& opt) {
  CriterionResult r;
  r.id = c.id;
  r.name = c.name;
  detail::Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(out, opt);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  r.seconds = detail::elapsed(t0);
  r.pass = out.pass;
  r.detail = out.msg.str();
  for (const auto& f : out.failures) r.detail += " | failed: " + f;
  return r;
}

/// ids empty means every criterion.
inline std::vector<CriterionResult> run(const std::vector<int>& ids, const Options& opt,
                                        const std::function<void(const CriterionResult&)>& on_done = {}) {
  std::vector<CriterionResult> res;
  for (const auto& c : criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    res.push_back(run_criterion(c, opt));
    if (on_done) on_done(res.back());
  }
  return res;
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os.precision(4);
  os << "[" << (r.pass ? "PASS" : "FAIL") << "] " << r.id << ". " << r.name << " (" << r.seconds
     << "s): " << r.detail;
  return os.str();
}

}  // namespace lorkam::verify
