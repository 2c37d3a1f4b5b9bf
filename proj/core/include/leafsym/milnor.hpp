#pragma once

// Weighted-homogeneous surfaces f = w in C^3, their links, and the straight
// normal tubular structure around F_0 used to compare nearby fibres with it.
//
// Real coordinates on C^3 are (x0, y0, x1, y1, x2, y2), Z_j = x_j + i y_j.

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "leafsym/complex.hpp"
#include "leafsym/constants.hpp"
#include "leafsym/exterior.hpp"
#include "leafsym/report.hpp"

namespace leafsym {

struct Monomial {
  double coeff = 1.0;
  std::array<int, 3> exps{};
};

template <class T>
using CxPoint = std::array<Cx<T>, 3>;

struct WeightedPolynomial {
  std::string name;
  std::vector<Monomial> monomials;
  std::array<int, 3> weights{};
  int degree = 0;
  int link_c1 = 0;  // Euler class of the link as a circle bundle

  template <class T>
  Cx<T> eval(const CxPoint<T>& z) const {
    Cx<T> acc(0.0);
    for (const auto& m : monomials) {
      Cx<T> term(m.coeff);
      for (int j = 0; j < 3; ++j) term = term * cpow(z[j], m.exps[j]);
      acc = acc + term;
    }
    return acc;
  }

  /// Holomorphic gradient (df/dZ_0, df/dZ_1, df/dZ_2).
  template <class T>
  CxPoint<T> grad(const CxPoint<T>& z) const {
    CxPoint<T> g{Cx<T>(0.0), Cx<T>(0.0), Cx<T>(0.0)};
    for (const auto& m : monomials) {
      for (int j = 0; j < 3; ++j) {
        if (m.exps[j] == 0) continue;
        Cx<T> term(m.coeff * m.exps[j]);
        for (int k = 0; k < 3; ++k) term = term * cpow(z[k], k == j ? m.exps[k] - 1 : m.exps[k]);
        g[j] = g[j] + term;
      }
    }
    return g;
  }

  /// sum over monomials of |term|, the natural scale for residuals of f.
  double magnitude(const CxPoint<double>& z) const;
};

WeightedPolynomial fermat_e6();  // Z0^3 + Z1^3 + Z2^3, w = (1,1,1), d = 3
WeightedPolynomial e7();         // Z0^4 + Z1^4 + Z2^2, w = (1,1,2), d = 4
WeightedPolynomial e8();         // Z0^6 + Z1^3 + Z2^2, w = (1,2,3), d = 6
/// "E6", "E7" or "E8"; throws DomainError otherwise.
WeightedPolynomial polynomial_by_name(const std::string& name);

// ---------------------------------------------------------------------------
// Points

struct AmbientPoint {
  std::array<double, 6> x{};

  AmbientPoint() = default;
  explicit AmbientPoint(const std::array<double, 6>& v) : x(v) {}
  explicit AmbientPoint(const CxPoint<double>& z);

  Cx<double> z(int j) const { return {x[2 * j], x[2 * j + 1]}; }
  CxPoint<double> complex() const { return {z(0), z(1), z(2)}; }
  Point point() const { return Point(x.begin(), x.end()); }
  double rho() const;
};

double distance(const AmbientPoint& a, const AmbientPoint& b);

/// A point of the product end N x (T, oo): base on the link, tau = 2 log rho.
struct EndPoint {
  AmbientPoint base;
  double tau = 0.0;
};

/// Validates |f(base)| < 1e-10 and ||base| - 1| < 1e-10.
EndPoint make_end_point(const WeightedPolynomial& f, const AmbientPoint& base, double tau);

/// The R^6 chart (x0, y0, x1, y1, x2, y2).
ChartRef ambient_chart();

template <class T>
CxPoint<T> to_complex(std::span<const T> x) {
  return {Cx<T>(x[0], x[1]), Cx<T>(x[2], x[3]), Cx<T>(x[4], x[5])};
}

// ---------------------------------------------------------------------------
// Actions

/// Z_j -> e^{i w_j t} Z_j.  Maps F_w to F_{e^{i d t} w}.
AmbientPoint hopf_action(const WeightedPolynomial& f, double t, const AmbientPoint& z);

/// Z_j -> s^{w_j} Z_j for s > 0.  Maps F_w to F_{s^d w}.
AmbientPoint weighted_scale(const WeightedPolynomial& f, double s, const AmbientPoint& z);

/// The s > 0 with |weighted_scale(f, s, z)| = radius.
double weighted_scale_to_radius(const WeightedPolynomial& f, const AmbientPoint& z,
                                double radius);

// ---------------------------------------------------------------------------
// Fibres and links

/// Samples of the link F_0 cap S^5.  Each sample draws Z0, Z1, solves the pure
/// power of Z2 on a seeded branch, moves to the unit sphere by the weighted
/// action and polishes by Newton.  Points with some |Z_j| < 1e-3 are redrawn;
/// ConvergenceError after the retry budget.
std::vector<AmbientPoint> sample_link(const WeightedPolynomial& f, std::size_t count,
                                      std::uint64_t seed);

/// Samples of F_0 with |Z| uniform in [rho_lo, rho_hi].
std::vector<AmbientPoint> sample_fiber_band(const WeightedPolynomial& f, std::size_t count,
                                            std::uint64_t seed, double rho_lo, double rho_hi);

/// Z <- Z - (f(Z) - w) conj(grad f) / |grad f|^2 until |f - w| <= 1e-12 max(1, scale),
/// scale the monomial magnitude.  DomainError if |grad f| <= 1e-8, ConvergenceError
/// after 50 iterations.
AmbientPoint newton_project_to_fiber(const WeightedPolynomial& f, const AmbientPoint& z,
                                     Cx<double> w);

/// newton_project_to_fiber on any scalar type.  Convergence is judged on the
/// value; a few further iterations settle the derivative parts.
template <class T>
CxPoint<T> newton_project_generic(const WeightedPolynomial& f, CxPoint<T> z, const Cx<T>& w) {
  int extra = -1;
  for (int it = 0; it < 60; ++it) {
    const Cx<T> r = f.eval(z) - w;
    if (extra < 0) {
      CxPoint<double> zv;
      for (int j = 0; j < 3; ++j) zv[j] = {ad::value_of(z[j].re), ad::value_of(z[j].im)};
      const double rv = std::hypot(ad::value_of(r.re), ad::value_of(r.im));
      if (rv <= 1e-14 * std::max(1.0, f.magnitude(zv))) extra = 4;
    } else if (--extra == 0) {
      return z;
    }
    const auto g = f.grad(z);
    const T g2 = norm2(g[0]) + norm2(g[1]) + norm2(g[2]);
    const Cx<T> k = r / Cx<T>(g2, T(0.0));
    for (int j = 0; j < 3; ++j) z[j] = z[j] - k * conj(g[j]);
  }
  throw ConvergenceError("newton_project_generic: no convergence");
}

/// Point of F_{e^{i theta}} over the end point: weighted scaling of the base
/// by e^{tau/2}, then Newton onto the fibre.  Requires tau > -(2/3) log eps.
AmbientPoint end_to_ambient(const WeightedPolynomial& f, const EndPoint& e, double theta,
                            double eps = 0.1);

// ---------------------------------------------------------------------------
// Straight normal tubular structure around F_0
//
// A point near F_0 is written P + s nu(P) with P on F_0, s complex and
// nu(P) = conj(grad f(P)).  Graphs over F_0 and projections onto it use this
// single structure, so the two are exact inverses of each other.

/// The complex s with f(P + s nu(P)) = w, by Newton from s = 0.  Generic in
/// the scalar so that the offset can be differentiated along P.
template <class T>
Cx<T> graph_offset(const WeightedPolynomial& f, const CxPoint<T>& p, const Cx<T>& w) {
  const auto g = f.grad(p);
  const CxPoint<T> nu{conj(g[0]), conj(g[1]), conj(g[2])};
  Cx<T> s(0.0);
  int extra = -1;
  for (int it = 0; it < 60; ++it) {
    CxPoint<T> q;
    for (int j = 0; j < 3; ++j) q[j] = p[j] + s * nu[j];
    const Cx<T> r = f.eval(q) - w;
    const auto gq = f.grad(q);
    const Cx<T> slope = gq[0] * nu[0] + gq[1] * nu[1] + gq[2] * nu[2];
    const Cx<T> step = r / slope;
    s = s - step;
    // Derivative parts converge one order per iteration once the value has.
    if (extra < 0) {
      CxPoint<double> qv;
      for (int j = 0; j < 3; ++j) qv[j] = {ad::value_of(q[j].re), ad::value_of(q[j].im)};
      const double noise = 1e-15 * std::max(1.0, f.magnitude(qv));
      const double sv = std::hypot(ad::value_of(s.re), ad::value_of(s.im));
      const double dv = std::hypot(ad::value_of(step.re), ad::value_of(step.im));
      const double rv = std::hypot(ad::value_of(r.re), ad::value_of(r.im));
      if (dv <= 1e-13 * sv || rv <= noise) extra = 5;
    } else if (--extra == 0) {
      return s;
    }
  }
  throw ConvergenceError("graph_offset: Newton did not converge");
}

/// P + s nu(P) for the double offset above.
AmbientPoint graph_point(const WeightedPolynomial& f, const AmbientPoint& p, Cx<double> w);

struct TubularCoordinates {
  AmbientPoint base;  // on F_0
  Cx<double> offset;  // s with q = base + s nu(base)
};

/// Inverts q = P + s nu(P), f(P) = 0 by an 8 x 8 real Newton iteration.
TubularCoordinates tubular_project(const WeightedPolynomial& f, const AmbientPoint& q);

// ---------------------------------------------------------------------------
// Reports

struct RegularityBand {
  double f_min = 0.0;  // exclusive
  double f_max = 0.1;  // inclusive
};

/// Sphere points with f_min < |f| <= f_max, drawn around the link.
std::vector<AmbientPoint> sample_regularity_band(const WeightedPolynomial& f, RegularityBand band,
                                                 std::size_t count, std::uint64_t seed);

/// |proj_{T S^5} grad arg f| at a point of the unit sphere.
double arg_gradient_norm(const WeightedPolynomial& f, const AmbientPoint& q);

/// min over sphere points with f_min < |f| <= f_max of |proj_{T S^5} grad arg f|;
/// pass iff above floor.
VerificationReport milnor_regularity_check(const WeightedPolynomial& f, RegularityBand band,
                                           std::size_t samples, std::uint64_t seed,
                                           double floor = 1e-4);
/// Same measurement on given sphere points; points outside the band are skipped.
VerificationReport milnor_regularity_check(const WeightedPolynomial& f, RegularityBand band,
                                           const std::vector<AmbientPoint>& points,
                                           double floor = 1e-4);

/// Measured sup displacement |s nu| between the rescaled fibre
/// R^{-1} F_1 = F_{R^{-d}} and F_0 over rho in [1, e^pi], for each R.
struct ConvergenceSeries {
  std::vector<double> scales;
  std::vector<double> displacement;
  double slope = 0.0;
};

ConvergenceSeries convergence_series(const WeightedPolynomial& f, std::size_t samples,
                                     std::uint64_t seed,
                                     const std::vector<double>& scales = {2, 4, 8, 16, 32});

/// Monotone decrease and |slope + d| <= 0.3.
VerificationReport convergence_law_check(const WeightedPolynomial& f, std::size_t samples,
                                         std::uint64_t seed);
VerificationReport convergence_law_check(const WeightedPolynomial& f,
                                         const ConvergenceSeries& series);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace leafsym
