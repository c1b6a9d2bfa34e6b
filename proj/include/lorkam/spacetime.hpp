#pragma once

// Model spacetimes: Minkowski (dim 2/3), the flat cylinder R x S^1 and
// warped products -dt^2 + a(t)^2 dθ^2. The angle is carried unwrapped.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <nlohmann/json.hpp>

#include "lorkam/errors.hpp"
#include "lorkam/types.hpp"

namespace lorkam {

/// Warp factor a(t) together with its first two derivatives.
class Profile {
 public:
  enum class Kind { Constant, Cosh, TwoPlusCos, Tabulated };

  static Profile constant() { return Profile(Kind::Constant); }
  static Profile cosh() { return Profile(Kind::Cosh); }
  static Profile two_plus_cos() { return Profile(Kind::TwoPlusCos); }

  /// Uniform samples a(t0 + i*dt). The valid domain is the open sample span.
  static Profile tabulated(std::vector<double> values, double t0, double dt) {
    if (values.size() < 4) throw ConfigError("tabulated profile needs at least 4 samples");
    if (!(dt > 0.0)) throw ConfigError("tabulated profile needs dt > 0");
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("tabulated profile must be positive");
    Profile p(Kind::Tabulated);
    p.t0_ = t0;
    p.t1_ = t0 + dt * static_cast<double>(values.size() - 1);
    p.dt_ = dt;
    p.samples_ = std::make_shared<const std::vector<double>>(values);
    p.spline_ = std::make_shared<const boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        values.begin(), values.end(), t0, dt);
    return p;
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool is_constant() const { return kind_ == Kind::Constant; }

  /// Natural domain of the profile (whole line except for tables).
  [[nodiscard]] std::pair<double, double> natural_domain() const {
    if (kind_ == Kind::Tabulated) return {t0_, t1_};
    return {-kInf, kInf};
  }

  [[nodiscard]] std::string name() const {
    switch (kind_) {
      case Kind::Constant: return "constant";
      case Kind::Cosh: return "cosh";
      case Kind::TwoPlusCos: return "2+cos";
      case Kind::Tabulated: return "tabulated";
    }
    return "?";
  }

  /// Values are evaluated on the extended profile: tables are clamped,
  /// analytic profiles are used as is. Domain policing happens elsewhere.
  [[nodiscard]] double a(double t) const {
    t = mirror(t);
    switch (kind_) {
      case Kind::Constant: return 1.0;
      case Kind::Cosh: return std::cosh(t);
      case Kind::TwoPlusCos: return 2.0 + std::cos(t);
      case Kind::Tabulated: return (*spline_)(clamp(t));
    }
    return 1.0;
  }
  [[nodiscard]] double da(double t) const {
    const double sgn = reflected_ ? -1.0 : 1.0;
    t = mirror(t);
    switch (kind_) {
      case Kind::Constant: return 0.0;
      case Kind::Cosh: return sgn * std::sinh(t);
      case Kind::TwoPlusCos: return -sgn * std::sin(t);
      case Kind::Tabulated: return sgn * spline_->prime(clamp(t));
    }
    return 0.0;
  }
  [[nodiscard]] double dda(double t) const {
    t = mirror(t);
    switch (kind_) {
      case Kind::Constant: return 0.0;
      case Kind::Cosh: return std::cosh(t);
      case Kind::TwoPlusCos: return -std::cos(t);
      case Kind::Tabulated: return spline_->double_prime(clamp(t));
    }
    return 0.0;
  }

  /// t -> a(-t).
  [[nodiscard]] Profile reflected() const {
    Profile p = *this;
    p.reflected_ = !reflected_;
    return p;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name();
    if (kind_ == Kind::Tabulated) {
      j["t0"] = t0_;
      j["dt"] = dt_;
      j["values"] = *samples_;
    }
    if (reflected_) j["reflected"] = true;
    return j;
  }

 private:
  explicit Profile(Kind k) : kind_(k) {}
  [[nodiscard]] double mirror(double t) const { return reflected_ ? -t : t; }
  [[nodiscard]] double clamp(double t) const { return std::clamp(t, t0_, t1_); }

  Kind kind_;
  bool reflected_ = false;
  double t0_ = 0.0, t1_ = 0.0, dt_ = 0.0;
  std::shared_ptr<const std::vector<double>> samples_;
  std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

/// Immutable description of a model spacetime.
struct Spacetime {
  enum class Kind { Minkowski, Cylinder, Warped };

  Kind kind = Kind::Minkowski;
  int dim = 2;
  Profile profile = Profile::constant();
  int winding_bound = 8;
  double t_lo = -kInf;
  double t_hi = kInf;

  static Spacetime minkowski(int dim = 2) {
    if (dim != 2 && dim != 3) throw ConfigError("minkowski dimension must be 2 or 3");
    Spacetime s;
    s.kind = Kind::Minkowski;
    s.dim = dim;
    return s;
  }
  static Spacetime cylinder(int winding_bound = 8) {
    Spacetime s;
    s.kind = Kind::Cylinder;
    s.winding_bound = winding_bound;
    return s;
  }
  static Spacetime warped(Profile p, double t_lo = -kInf, double t_hi = kInf,
                          int winding_bound = 8) {
    Spacetime s;
    s.kind = Kind::Warped;
    auto [n_lo, n_hi] = p.natural_domain();
    s.t_lo = std::max(t_lo, n_lo);
    s.t_hi = std::min(t_hi, n_hi);
    if (!(s.t_lo < s.t_hi)) throw ConfigError("empty time domain");
    s.profile = std::move(p);
    s.winding_bound = winding_bound;
    return s;
  }

  [[nodiscard]] bool periodic() const { return kind != Kind::Minkowski; }
  [[nodiscard]] bool flat() const { return kind != Kind::Warped || profile.is_constant(); }
  [[nodiscard]] bool bounded_time() const { return std::isfinite(t_lo) || std::isfinite(t_hi); }
  [[nodiscard]] bool in_domain(double t) const { return t > t_lo && t < t_hi; }

  [[nodiscard]] double a(double t) const { return kind == Kind::Warped ? profile.a(t) : 1.0; }
  [[nodiscard]] double da(double t) const { return kind == Kind::Warped ? profile.da(t) : 0.0; }
  [[nodiscard]] double dda(double t) const { return kind == Kind::Warped ? profile.dda(t) : 0.0; }

  [[nodiscard]] std::string name() const {
    switch (kind) {
      case Kind::Minkowski: return "minkowski" + std::to_string(dim);
      case Kind::Cylinder: return "cylinder";
      case Kind::Warped: return "warped(" + profile.name() + ")";
    }
    return "?";
  }

  /// Same manifold with the opposite time orientation, via t -> -t.
  [[nodiscard]] Spacetime time_reversed() const {
    Spacetime s = *this;
    if (kind == Kind::Warped) s.profile = profile.reflected();
    s.t_lo = -t_hi;
    s.t_hi = -t_lo;
    return s;
  }
};

inline ChartPoint reverse_time(const ChartPoint& x) {
  ChartPoint r = x;
  r.coords[0] = -r.coords[0];
  return r;
}

inline void check_dim(const Spacetime& s, const Vec& v, const char* what) {
  if (v.size() != s.dim)
    throw DomainError(std::string(what) + ": dimension " + std::to_string(v.size()) +
                      " does not match spacetime dimension " + std::to_string(s.dim));
  if (!v.allFinite()) throw DomainError(std::string(what) + ": non-finite coordinates");
}

inline void check_point(const Spacetime& s, const ChartPoint& x) {
  check_dim(s, x.coords, "point");
  if (!s.in_domain(x.t()))
    throw DomainError("t=" + std::to_string(x.t()) + " outside the time domain (" +
                      std::to_string(s.t_lo) + ", " + std::to_string(s.t_hi) + ")");
}

/// Diagonal of g at time t (the metrics are all diagonal in the chart).
inline Vec metric_diag(const Spacetime& s, double t) {
  Vec d = Vec::Ones(s.dim);
  d[0] = -1.0;
  if (s.kind == Spacetime::Kind::Warped) {
    const double a = s.a(t);
    d[1] = a * a;
  }
  return d;
}

inline Mat metric_tensor(const Spacetime& s, const ChartPoint& x) {
  check_point(s, x);
  return metric_diag(s, x.t()).asDiagonal();
}

inline double g_dot(const Spacetime& s, double t, const Vec& v, const Vec& w) {
  return (metric_diag(s, t).array() * v.array() * w.array()).sum();
}

inline double null_tolerance(const Vec& v) { return 1e-9 * (1.0 + v.squaredNorm()); }

inline CausalityClass causal_class(const Spacetime& s, const ChartPoint& x, const TangentVector& v) {
  const Vec& c = v.components;
  if ((c.array() == 0.0).all()) return CausalityClass::Zero;
  const double q = g_dot(s, x.t(), c, c);
  const double tol = null_tolerance(c);
  if (q > tol || c[0] == 0.0) return CausalityClass::Spacelike;
  if (q < -tol) return c[0] > 0 ? CausalityClass::FutureTimelike : CausalityClass::PastTimelike;
  return c[0] > 0 ? CausalityClass::FutureNull : CausalityClass::PastNull;
}

/// |v|_g at base point x.
inline double lorentz_norm(const Spacetime& s, const ChartPoint& x, const TangentVector& v) {
  return std::sqrt(std::abs(g_dot(s, x.t(), v.components, v.components)));
}

inline double lagrangian(const Spacetime& s, const ChartPoint& x, const TangentVector& v) {
  if (!is_future_causal(causal_class(s, x, v))) return kInf;
  return -std::sqrt(lorentz_norm(s, x, v));
}

inline double dual_dot(const Spacetime& s, double t, const Vec& p, const Vec& q) {
  return (p.array() * q.array() / metric_diag(s, t).array()).sum();
}

inline bool in_dual_cone_interior(const Spacetime& s, const ChartPoint& x, const Covector& p) {
  return p.components[0] < 0.0 && dual_dot(s, x.t(), p.components, p.components) < 0.0;
}

inline double hamiltonian(const Spacetime& s, const ChartPoint& x, const Covector& p) {
  if (!in_dual_cone_interior(s, x, p)) return kInf;
  return 1.0 / (4.0 * std::sqrt(-dual_dot(s, x.t(), p.components, p.components)));
}

/// p = dL/dv = ½ |v|^{-3/2} g(v, ·).
inline Covector legendre(const Spacetime& s, const ChartPoint& x, const TangentVector& v) {
  if (causal_class(s, x, v) != CausalityClass::FutureTimelike)
    throw NotTimelike("legendre: vector is not future timelike");
  const double n = lorentz_norm(s, x, v);
  Vec p = metric_diag(s, x.t()).cwiseProduct(v.components);
  return Covector(Vec(0.5 * std::pow(n, -1.5) * p));
}

inline TangentVector legendre_inverse(const Spacetime& s, const ChartPoint& x, const Covector& p) {
  if (!in_dual_cone_interior(s, x, p))
    throw NotTimelike("legendre_inverse: covector is not in the open future dual cone");
  const double pn2 = -dual_dot(s, x.t(), p.components, p.components);
  const double vn = 1.0 / (4.0 * pn2);
  Vec up = p.components.cwiseQuotient(metric_diag(s, x.t()));
  return TangentVector(Vec(2.0 * std::pow(vn, 1.5) * up));
}

/// Distance of the reference metric dt² + dθ² (angle wrapped) or Euclidean.
inline double reference_distance(const Spacetime& s, const ChartPoint& x, const ChartPoint& y) {
  Vec d = y.coords - x.coords;
  if (s.periodic()) d[1] = wrap_angle(d[1]);
  return d.norm();
}

/// Gamma[k](i, j).
using Christoffel = std::vector<Mat>;

inline Christoffel christoffel(const Spacetime& s, const ChartPoint& x) {
  check_point(s, x);
  Christoffel G(static_cast<size_t>(s.dim), Mat::Zero(s.dim, s.dim));
  if (s.kind == Spacetime::Kind::Warped) {
    const double a = s.a(x.t()), da = s.da(x.t());
    G[0](1, 1) = a * da;
    G[1](0, 1) = G[1](1, 0) = da / a;
  }
  return G;
}

/// Geodesic acceleration -Γ(u, u) at time t.
inline Vec geodesic_acceleration(const Spacetime& s, double t, const Vec& u) {
  Vec acc = Vec::Zero(s.dim);
  if (s.kind == Spacetime::Kind::Warped) {
    const double a = s.a(t), da = s.da(t);
    acc[0] = -a * da * u[1] * u[1];
    acc[1] = -2.0 * (da / a) * u[0] * u[1];
  }
  return acc;
}

/// Linearisation of the geodesic acceleration along (dx, du).
inline Vec variational_acceleration(const Spacetime& s, double t, const Vec& u, const Vec& dx,
                                    const Vec& du) {
  Vec acc = Vec::Zero(s.dim);
  if (s.kind == Spacetime::Kind::Warped) {
    const double a = s.a(t), da = s.da(t), dda = s.dda(t);
    acc[0] = -(da * da + a * dda) * dx[0] * u[1] * u[1] - 2.0 * a * da * u[1] * du[1];
    acc[1] = -2.0 * (dda / a - da * da / (a * a)) * dx[0] * u[0] * u[1] -
             2.0 * (da / a) * (du[0] * u[1] + u[0] * du[1]);
  }
  return acc;
}

/// Γ(v, w) contracted at time t, i.e. the connection term of D/dt.
inline Vec connection(const Spacetime& s, double t, const Vec& v, const Vec& w) {
  Vec r = Vec::Zero(s.dim);
  if (s.kind == Spacetime::Kind::Warped) {
    const double a = s.a(t), da = s.da(t);
    r[0] = a * da * v[1] * w[1];
    r[1] = (da / a) * (v[0] * w[1] + v[1] * w[0]);
  }
  return r;
}

// ---------------------------------------------------------------- config

inline Profile profile_from_json(const nlohmann::json& j) {
  std::string name = j.is_string() ? j.get<std::string>() : j.value("name", std::string{});
  Profile p = Profile::constant();
  if (name == "constant" || name == "1") {
    p = Profile::constant();
  } else if (name == "cosh") {
    p = Profile::cosh();
  } else if (name == "2+cos" || name == "two_plus_cos") {
    p = Profile::two_plus_cos();
  } else if (name == "tabulated") {
    if (!j.contains("values") || !j.contains("t0") || !j.contains("dt"))
      throw ConfigError("tabulated profile needs t0, dt and values");
    p = Profile::tabulated(j.at("values").get<std::vector<double>>(), j.at("t0").get<double>(),
                           j.at("dt").get<double>());
  } else {
    throw ConfigError("unknown profile '" + name + "'");
  }
  if (j.is_object() && j.value("reflected", false)) p = p.reflected();
  return p;
}

/// {kind, dim, profile, winding_bound, t_domain}
inline Spacetime spacetime_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.value("dim", 2);
    const int K = j.value("winding_bound", 8);
    if (K < 1) throw ConfigError("winding_bound must be >= 1");
    double lo = -kInf, hi = kInf;
    if (j.contains("t_domain") && !j.at("t_domain").is_null()) {
      auto d = j.at("t_domain");
      if (!d.is_array() || d.size() != 2) throw ConfigError("t_domain must be [lo, hi]");
      if (!d[0].is_null()) lo = d[0].get<double>();
      if (!d[1].is_null()) hi = d[1].get<double>();
    }
    if (kind == "minkowski") {
      if (std::isfinite(lo) || std::isfinite(hi)) throw ConfigError("minkowski has no t_domain");
      return Spacetime::minkowski(dim);
    }
    if (dim != 2) throw ConfigError(kind + " is two-dimensional");
    if (kind == "cylinder") {
      if (std::isfinite(lo) || std::isfinite(hi)) throw ConfigError("cylinder has no t_domain");
      return Spacetime::cylinder(K);
    }
    if (kind == "warped") {
      if (!j.contains("profile")) throw ConfigError("warped spacetime needs a profile");
      return Spacetime::warped(profile_from_json(j.at("profile")), lo, hi, K);
    }
    throw ConfigError("unknown spacetime kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad spacetime config: ") + e.what());
  }
}

inline nlohmann::json spacetime_to_json(const Spacetime& s) {
  nlohmann::json j;
  switch (s.kind) {
    case Spacetime::Kind::Minkowski: j["kind"] = "minkowski"; break;
    case Spacetime::Kind::Cylinder: j["kind"] = "cylinder"; break;
    case Spacetime::Kind::Warped: j["kind"] = "warped"; break;
  }
  j["dim"] = s.dim;
  j["winding_bound"] = s.winding_bound;
  if (s.kind == Spacetime::Kind::Warped) j["profile"] = s.profile.to_json();
  if (s.bounded_time()) {
    nlohmann::json d = nlohmann::json::array();
    d.push_back(std::isfinite(s.t_lo) ? nlohmann::json(s.t_lo) : nlohmann::json(nullptr));
    d.push_back(std::isfinite(s.t_hi) ? nlohmann::json(s.t_hi) : nlohmann::json(nullptr));
    j["t_domain"] = d;
  }
  return j;
}

/// Short names used on the command line.
inline Spacetime spacetime_from_name(const std::string& name, int winding_bound = 8) {
  if (name == "minkowski2" || name == "minkowski") return Spacetime::minkowski(2);
  if (name == "minkowski3") return Spacetime::minkowski(3);
  if (name == "cylinder") return Spacetime::cylinder(winding_bound);
  if (name == "warped-cosh") return Spacetime::warped(Profile::cosh(), -kInf, kInf, winding_bound);
  if (name == "warped-2cos")
    return Spacetime::warped(Profile::two_plus_cos(), -kInf, kInf, winding_bound);
  if (name == "warped-2cos-slab")
    return Spacetime::warped(Profile::two_plus_cos(), -10.0, 10.0, winding_bound);
  throw ConfigError("unknown metric '" + name +
                    "' (minkowski2, minkowski3, cylinder, warped-cosh, warped-2cos, "
                    "warped-2cos-slab)");
}

}  // namespace lorkam
