#pragma once

// Forward-mode dual numbers, nestable to obtain exact higher derivatives.
//
// Dual<T> carries a value and one infinitesimal part.  Nesting Dual<Dual<...>>
// gives mixed second, third, ... derivatives; the exterior calculus engine
// relies on depth up to D4 so that d(d(pullback)) stays exact.

#include <cmath>
#include <type_traits>

namespace leafsym::ad {

template <class T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(double c) : v(c), d(0.0) {}  // NOLINT: implicit lift of constants
  constexpr Dual(T value, T deriv) : v(value), d(deriv) {}
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Innermost real value of a (possibly nested) dual number.
constexpr double value_of(double x) { return x; }
template <class T>
constexpr double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

/// Seeds x as an independent variable: value x, unit infinitesimal part.
template <class T>
constexpr Dual<T> variable(const T& x) {
  return Dual<T>(x, T(1.0));
}

// ---- arithmetic ------------------------------------------------------------

template <class T>
constexpr Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d - b.d};
}
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = 1.0 / b.v;
  return {a.v * inv, (a.d * b.v - a.v * b.d) * (inv * inv)};
}

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, double b) {
  return {a.v + b, a.d};
}
template <class T>
constexpr Dual<T> operator+(double a, const Dual<T>& b) {
  return {a + b.v, b.d};
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, double b) {
  return {a.v - b, a.d};
}
template <class T>
constexpr Dual<T> operator-(double a, const Dual<T>& b) {
  return {a - b.v, -b.d};
}
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, double b) {
  return {a.v * b, a.d * b};
}
template <class T>
constexpr Dual<T> operator*(double a, const Dual<T>& b) {
  return {a * b.v, a * b.d};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, double b) {
  return {a.v / b, a.d / b};
}
template <class T>
constexpr Dual<T> operator/(double a, const Dual<T>& b) {
  T inv = 1.0 / b.v;
  return {a * inv, -a * b.d * (inv * inv)};
}

template <class T, class U>
constexpr Dual<T>& operator+=(Dual<T>& a, const U& b) {
  return a = a + b;
}
template <class T, class U>
constexpr Dual<T>& operator-=(Dual<T>& a, const U& b) {
  return a = a - b;
}
template <class T, class U>
constexpr Dual<T>& operator*=(Dual<T>& a, const U& b) {
  return a = a * b;
}
template <class T, class U>
constexpr Dual<T>& operator/=(Dual<T>& a, const U& b) {
  return a = a / b;
}

// ---- elementary functions --------------------------------------------------
// Overloads for double forward to <cmath>; generic code calls ad::exp etc.

inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double cosh(double x) { return std::cosh(x); }
inline double sinh(double x) { return std::sinh(x); }
inline double atan2(double y, double x) { return std::atan2(y, x); }

template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, e * a.d};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  return {log(a.v), a.d / a.v};
}
template <class T>
Dual<T> sin(const Dual<T>& a) {
  return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  return {cos(a.v), -sin(a.v) * a.d};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T>
Dual<T> cosh(const Dual<T>& a) {
  return {cosh(a.v), sinh(a.v) * a.d};
}
template <class T>
Dual<T> sinh(const Dual<T>& a) {
  return {sinh(a.v), cosh(a.v) * a.d};
}
template <class T>
Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  T r2 = x.v * x.v + y.v * y.v;
  return {atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}

/// Integer power by repeated squaring.
template <class T>
T ipow(const T& x, int n) {
  if (n == 0) return T(1.0);
  if (n < 0) return T(1.0) / ipow(x, -n);
  T result(1.0);
  T base = x;
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

// ---- smooth step primitive -------------------------------------------------
//
// step(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}) on (0,1), 0 below, 1 above.
// Written as 1 / (1 + e^u) with u = 1/t - 1/(1-t).  Inside the interval the
// derivative is s(1-s)(1/t^2 + 1/(1-t)^2) with s(1-s) = 1/(e^{-u/2}+e^{u/2})^2,
// which stays finite where e^u overflows.  For t closer than kStepFlat to an
// end point every derivative is below 1e-290 and the function is treated as
// locally constant.

inline constexpr double kStepFlat = 1.0 / 700.0;

namespace detail {

template <class T>
T step_interior(const T& t);

template <class T>
T step_slope_interior(const T& t) {
  T u = 1.0 / t - 1.0 / (1.0 - t);
  T half = 0.5 * u;
  T den = exp(-half) + exp(half);
  T s1s = 1.0 / (den * den);
  T a = 1.0 / (t * t);
  T b = 1.0 / ((1.0 - t) * (1.0 - t));
  return s1s * (a + b);
}

template <class T>
T step_interior(const T& t) {
  if constexpr (is_dual_v<T>) {
    return T(step_interior(t.v), step_slope_interior(t.v) * t.d);
  } else {
    double u = 1.0 / t - 1.0 / (1.0 - t);
    return 1.0 / (1.0 + std::exp(u));
  }
}

}  // namespace detail

/// C-infinity monotone step from 0 (t <= 0) to 1 (t >= 1).
template <class T>
T smooth_step(const T& t) {
  double tv = value_of(t);
  if (tv <= kStepFlat) return T(0.0);
  if (tv >= 1.0 - kStepFlat) return T(1.0);
  return detail::step_interior(t);
}

}  // namespace leafsym::ad
