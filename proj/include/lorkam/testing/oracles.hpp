#pragma once

// Closed-form and brute-force references used by the tests and the
// acceptance run. Nothing here calls the shooting, cut or LO code.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "lorkam/spacetime.hpp"
#include "lorkam/types.hpp"

namespace lorkam::oracle {

struct DistanceOracle {
  bool related = false;
  bool chronological = false;
  double d = 0.0;
  int multiplicity = 0;  // number of winding classes (or 1 on Minkowski) attaining d
  std::vector<long> windings;
};

/// Minkowski: the interval. Cylinder: max over lifts θ_y + 2πk of the flat interval.
inline DistanceOracle flat_distance(const Spacetime& sp, const ChartPoint& x, const ChartPoint& y,
                                    double tie = 1e-12) {
  DistanceOracle o;
  const double dt = y[0] - x[0];
  if (sp.kind == Spacetime::Kind::Minkowski) {
    double s2 = 0.0;
    for (int i = 1; i < sp.dim; ++i) s2 += (y[i] - x[i]) * (y[i] - x[i]);
    const double q = dt * dt - s2;
    if (dt < 0.0 || q < -1e-14 * (1.0 + dt * dt)) return o;
    o.related = true;
    o.chronological = q > 1e-14 * (1.0 + dt * dt);
    o.d = std::sqrt(std::max(0.0, q));
    o.multiplicity = 1;
    o.windings = {0};
    return o;
  }
  // cylinder
  const double base = wrap_angle(y[1] - x[1]);
  if (dt < 0.0) return o;
  const long kmax = static_cast<long>(std::ceil(dt / kTwoPi)) + 1;
  double best = -1.0;
  std::vector<std::pair<long, double>> vals;
  for (long k = -kmax; k <= kmax; ++k) {
    const double dth = base + kTwoPi * static_cast<double>(k);
    const double q = dt * dt - dth * dth;
    if (q < -1e-14 * (1.0 + dt * dt)) continue;
    const double dk = std::sqrt(std::max(0.0, q));
    vals.emplace_back(k, dk);
    best = std::max(best, dk);
  }
  if (vals.empty()) return o;
  o.related = true;
  o.d = best;
  o.chronological = best > 1e-7 * (1.0 + dt);
  for (auto [k, dk] : vals)
    if (std::abs(dk - best) <= tie * (1.0 + best)) {
      ++o.multiplicity;
      o.windings.push_back(k);
    }
  return o;
}

inline double action(double t, double d) { return -std::sqrt(t) * std::sqrt(d); }

/// Cut parameter of v = (v0, v1) from any point of the flat cylinder: the
/// geodesic meets its mirror image once it has turned by π.
inline std::optional<double> cylinder_cut_parameter(const TangentVector& v) {
  if (v[1] == 0.0) return std::nullopt;
  return kPi / std::abs(v[1]);
}

/// Scalar Jacobi equation along the t-axis of -dt² + a(t)² dθ²: f = a j solves
/// f'' = (a''/a) f with f(0) = 0, f'(0) = 1 in the orthonormal frame.
struct ScalarJacobi {
  std::vector<double> ts, f, fp;
  std::optional<double> first_zero;

  /// Cubic Hermite interpolation between stored samples.
  [[nodiscard]] double operator()(double t) const {
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    if (i + 1 >= ts.size()) return f.back();
    const double h = ts[i + 1] - ts[i], s = (t - ts[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * f[i] + h10 * h * fp[i] + h01 * f[i + 1] + h11 * h * fp[i + 1];
  }
};

inline ScalarJacobi scalar_jacobi(const Profile& a, double t0, double horizon, double tol = 1e-12,
                                  double dt_out = 1e-2) {
  using namespace boost::numeric::odeint;
  using State = std::array<double, 2>;
  ScalarJacobi out;
  auto rhs = [&](const State& y, State& dy, double s) {
    const double t = t0 + s;
    dy[0] = y[1];
    dy[1] = a.dda(t) / a.a(t) * y[0];
  };
  State y{0.0, 1.0};
  auto stepper = make_dense_output(tol, tol, runge_kutta_dopri5<State>());
  const int n = static_cast<int>(std::ceil(horizon / dt_out));
  std::vector<double> times;
  for (int i = 0; i <= n; ++i) times.push_back(std::min(horizon, i * dt_out));
  integrate_times(stepper, rhs, y, times.begin(), times.end(), dt_out * 0.1,
                  [&](const State& st, double s) {
                    out.ts.push_back(s);
                    out.f.push_back(st[0]);
                    out.fp.push_back(st[1]);
                  });
  for (std::size_t i = 1; i < out.f.size(); ++i) {
    if (out.f[i - 1] > 0.0 && out.f[i] <= 0.0 && i > 1) {
      // bisection on the interpolant
      double lo = out.ts[i - 1], hi = out.ts[i];
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (out(mid) > 0.0 ? lo : hi) = mid;
      }
      out.first_zero = 0.5 * (lo + hi);
      break;
    }
  }
  return out;
}

/// Grid maximum of z ↦ -√t √d(x,z) + √s √d(y,z) over the future cone of y
/// on the flat cylinder, with d from the winding formula.
inline double brute_lo(const Spacetime& sp, double s, double t, const ChartPoint& x,
                       const ChartPoint& y, double radius, int n_r = 400, int n_a = 400) {
  double best = action(t, flat_distance(sp, x, y).d);
  for (int i = 1; i <= n_r; ++i) {
    const double r = radius * i / n_r;
    for (int j = 0; j <= n_a; ++j) {
      const double w = -1.0 + 2.0 * j / n_a;
      ChartPoint z{y[0] + r, y[1] + r * w};
      auto dx = flat_distance(sp, x, z);
      auto dy = flat_distance(sp, y, z);
      if (!dx.related || !dy.related) continue;
      best = std::max(best, action(t, dx.d) - action(s, dy.d));
    }
  }
  return best;
}

}  // namespace lorkam::oracle
