#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace ssir {

/// Fixed-size phase-space point. The tag keeps states of different systems
/// from mixing even when they share a dimension.
template <std::size_t N, class Tag>
struct Point {
  std::array<double, N> v{};

  static constexpr std::size_t size() { return N; }

  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr double operator[](std::size_t i) const { return v[i]; }

  constexpr Point& operator+=(const Point& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  constexpr Point& operator-=(const Point& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] -= o.v[i];
    return *this;
  }
  constexpr Point& operator*=(double s) {
    for (auto& x : v) x *= s;
    return *this;
  }

  friend constexpr Point operator+(Point a, const Point& b) { return a += b; }
  friend constexpr Point operator-(Point a, const Point& b) { return a -= b; }
  friend constexpr Point operator*(Point a, double s) { return a *= s; }
  friend constexpr Point operator*(double s, Point a) { return a *= s; }
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

struct ReducedTag {};
struct FullTag {};
struct ExtendedTag {};

/// (S, I)
using State2 = Point<2, ReducedTag>;
/// (S, I, R)
using State3 = Point<3, FullTag>;
/// (S, I, theta)
using StateExt = Point<3, ExtendedTag>;

inline constexpr std::size_t kS = 0;
inline constexpr std::size_t kI = 1;
inline constexpr std::size_t kR = 2;
inline constexpr std::size_t kTheta = 2;

template <std::size_t N, class Tag>
double norm_inf(const Point<N, Tag>& p) {
  double m = 0.0;
  for (double x : p.v) m = std::max(m, std::abs(x));
  return m;
}

template <std::size_t N, class Tag>
double norm2(const Point<N, Tag>& p) {
  double s = 0.0;
  for (double x : p.v) s += x * x;
  return std::sqrt(s);
}

template <std::size_t N, class Tag>
bool is_finite(const Point<N, Tag>& p) {
  return std::all_of(p.v.begin(), p.v.end(), [](double x) { return std::isfinite(x); });
}

/// Row-major 2x2 real matrix.
struct Mat2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  double frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }

  template <class Tag>
  Point<2, Tag> operator*(const Point<2, Tag>& x) const {
    return {{a11 * x[0] + a12 * x[1], a21 * x[0] + a22 * x[1]}};
  }

  /// Eigenvalues ordered by ascending real part (ties: ascending imaginary).
  std::array<std::complex<double>, 2> eigenvalues() const {
    const double tr = trace();
    const double dt = det();
    const double half = 0.5 * tr;
    const double disc = half * half - dt;
    std::array<std::complex<double>, 2> ev;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      // Larger-magnitude root first, then Vieta for the other one.
      const double big = half + std::copysign(root, half == 0.0 ? 1.0 : half);
      const double small = big != 0.0 ? dt / big : 0.0;
      ev = {std::complex<double>(std::min(big, small)), std::complex<double>(std::max(big, small))};
    } else {
      const double im = std::sqrt(-disc);
      ev = {std::complex<double>(half, -im), std::complex<double>(half, im)};
    }
    return ev;
  }
};

}  // namespace ssir
