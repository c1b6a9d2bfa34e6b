#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <string>
#include <limits>
#include <numbers>

namespace lorkam {

/// Small runtime-sized vectors (dimension 2 or 3) without heap allocation.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A point of the chart. Coordinate 0 is the time function; for periodic
/// spacetimes coordinate 1 is an angle stored as an unwrapped real.
struct ChartPoint {
  Vec coords;

  ChartPoint() = default;
  explicit ChartPoint(Vec c) : coords(std::move(c)) {}
  ChartPoint(std::initializer_list<double> c) : coords(static_cast<Eigen::Index>(c.size())) {
    Eigen::Index i = 0;
    for (double v : c) coords[i++] = v;
  }

  [[nodiscard]] int dim() const { return static_cast<int>(coords.size()); }
  [[nodiscard]] double t() const { return coords[0]; }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }
};

struct TangentVector {
  Vec components;

  TangentVector() = default;
  explicit TangentVector(Vec c) : components(std::move(c)) {}
  TangentVector(std::initializer_list<double> c) : components(static_cast<Eigen::Index>(c.size())) {
    Eigen::Index i = 0;
    for (double v : c) components[i++] = v;
  }

  [[nodiscard]] int dim() const { return static_cast<int>(components.size()); }
  double operator[](int i) const { return components[i]; }
  double& operator[](int i) { return components[i]; }
};

struct Covector {
  Vec components;

  Covector() = default;
  explicit Covector(Vec c) : components(std::move(c)) {}
  Covector(std::initializer_list<double> c) : components(static_cast<Eigen::Index>(c.size())) {
    Eigen::Index i = 0;
    for (double v : c) components[i++] = v;
  }

  [[nodiscard]] int dim() const { return static_cast<int>(components.size()); }
  double operator[](int i) const { return components[i]; }
};

enum class CausalityClass {
  FutureTimelike,
  FutureNull,
  PastTimelike,
  PastNull,
  Spacelike,
  Zero,
};

inline const char* to_string(CausalityClass c) {
  switch (c) {
    case CausalityClass::FutureTimelike: return "future-timelike";
    case CausalityClass::FutureNull: return "future-null";
    case CausalityClass::PastTimelike: return "past-timelike";
    case CausalityClass::PastNull: return "past-null";
    case CausalityClass::Spacelike: return "spacelike";
    case CausalityClass::Zero: return "zero";
  }
  return "?";
}

inline bool is_future_causal(CausalityClass c) {
  return c == CausalityClass::FutureTimelike || c == CausalityClass::FutureNull ||
         c == CausalityClass::Zero;
}

/// Representative of an angle in (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Winding number k with a = wrap_angle(a) + 2 pi k.
inline long winding_of(double a) {
  return std::lround((a - wrap_angle(a)) / kTwoPi);
}

/// Compact %g rendering for messages.
inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace lorkam
