#pragma once

// Complex numbers over an arbitrary real scalar, so that holomorphic
// polynomial code runs unchanged on double and on nested dual numbers.

#include <cmath>

#include "leafsym/dual.hpp"

namespace leafsym {

template <class T>
struct Cx {
  T re{};
  T im{};

  constexpr Cx() = default;
  constexpr Cx(T r, T i) : re(r), im(i) {}
  constexpr Cx(double r) : re(r), im(0.0) {}  // NOLINT: implicit lift of real constants
};

template <class T>
constexpr Cx<T> operator+(const Cx<T>& a, const Cx<T>& b) {
  return {a.re + b.re, a.im + b.im};
}
template <class T>
constexpr Cx<T> operator-(const Cx<T>& a, const Cx<T>& b) {
  return {a.re - b.re, a.im - b.im};
}
template <class T>
constexpr Cx<T> operator-(const Cx<T>& a) {
  return {-a.re, -a.im};
}
template <class T>
constexpr Cx<T> operator*(const Cx<T>& a, const Cx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T>
constexpr Cx<T> operator*(double c, const Cx<T>& a) {
  return {c * a.re, c * a.im};
}
template <class T>
constexpr Cx<T> scale(const T& c, const Cx<T>& a) {
  return {c * a.re, c * a.im};
}
template <class T>
constexpr Cx<T> conj(const Cx<T>& a) {
  return {a.re, -a.im};
}
template <class T>
constexpr T norm2(const Cx<T>& a) {
  return a.re * a.re + a.im * a.im;
}
template <class T>
Cx<T> operator/(const Cx<T>& a, const Cx<T>& b) {
  T inv = 1.0 / norm2(b);
  Cx<T> n = a * conj(b);
  return {n.re * inv, n.im * inv};
}
template <class T>
Cx<T> cpow(const Cx<T>& z, int n) {
  Cx<T> result(1.0);
  Cx<T> base = z;
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

inline double cabs(const Cx<double>& a) { return std::hypot(a.re, a.im); }

/// e^{i t}
inline Cx<double> expi(double t) { return {std::cos(t), std::sin(t)}; }

/// Lifts a double complex number to any scalar type.
template <class T>
Cx<T> lift(const Cx<double>& a) {
  return {T(a.re), T(a.im)};
}

}  // namespace leafsym
