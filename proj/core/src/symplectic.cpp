#include "leafsym/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace leafsym {

namespace {

using ad::D1;
using Vec6 = std::array<double, 6>;

Vec6 realify(const CxPoint<double>& z) {
  return {z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im};
}

CxPoint<double> complexify(const Vec6& v) {
  return {Cx<double>(v[0], v[1]), Cx<double>(v[2], v[3]), Cx<double>(v[4], v[5])};
}

double dot(const Vec6& a, const Vec6& b) {
  double acc = 0.0;
  for (int i = 0; i < 6; ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const Vec6& a) { return std::sqrt(dot(a, a)); }

Cx<double> hermitian(const CxPoint<double>& a, const CxPoint<double>& b) {
  return conj(a[0]) * b[0] + conj(a[1]) * b[1] + conj(a[2]) * b[2];
}

double cnorm(const CxPoint<double>& a) {
  return std::sqrt(norm2(a[0]) + norm2(a[1]) + norm2(a[2]));
}

TangentVector tangent(const AmbientPoint& base, const Vec6& v) {
  return TangentVector(ambient_chart(), base.point(), std::vector<double>(v.begin(), v.end()));
}

// Orthonormal basis of T_P M, M = F_w cap {|Z|^2 = const}: the fibre frame with
// the direction of the fibre Liouville field removed.
std::vector<Vec6> level_frame(const WeightedPolynomial& f, const AmbientPoint& p) {
  const auto frame = fiber_frame(f, p);
  Vec6 xf = realify(fiber_liouville(f, p.complex()));
  const double nx = norm(xf);
  for (auto& c : xf) c /= nx;
  std::vector<Vec6> out;
  for (const auto& tv : frame.vectors) {
    Vec6 v;
    std::copy(tv.components.begin(), tv.components.end(), v.begin());
    const double a = dot(xf, v);
    for (int i = 0; i < 6; ++i) v[i] -= a * xf[i];
    for (const auto& u : out) {
      const double b = dot(u, v);
      for (int i = 0; i < 6; ++i) v[i] -= b * u[i];
    }
    const double n = norm(v);
    if (n < 1e-6) continue;
    for (auto& c : v) c /= n;
    out.push_back(v);
  }
  if (out.size() != 3) throw ConstructionError("level_frame: expected a 3-dimensional tangent space");
  return out;
}

// Orthonormal basis of T N, N = F_0 cap S^5.
std::vector<Vec6> link_frame(const WeightedPolynomial& f, const AmbientPoint& p) {
  const auto frame = fiber_frame(f, p);
  // the radial direction projected to T F_0 (it lies there only when the weights agree)
  Vec6 r{};
  for (const auto& tv : frame.vectors) {
    Vec6 e;
    std::copy(tv.components.begin(), tv.components.end(), e.begin());
    const double a = dot(p.x, e);
    for (int i = 0; i < 6; ++i) r[i] += a * e[i];
  }
  const double nr = norm(r);
  for (auto& c : r) c /= nr;
  std::vector<Vec6> out;
  for (const auto& tv : frame.vectors) {
    Vec6 v;
    std::copy(tv.components.begin(), tv.components.end(), v.begin());
    const double a = dot(r, v);
    for (int i = 0; i < 6; ++i) v[i] -= a * r[i];
    for (const auto& u : out) {
      const double b = dot(u, v);
      for (int i = 0; i < 6; ++i) v[i] -= b * u[i];
    }
    const double n = norm(v);
    if (n < 1e-6) continue;
    for (auto& c : v) c /= n;
    out.push_back(v);
  }
  if (out.size() != 3) throw ConstructionError("link_frame: expected a 3-dimensional tangent space");
  return out;
}

template <class T>
CxPoint<T> rk4_flow(const WeightedPolynomial& f, CxPoint<T> z, const T& h, int steps,
                    const SymplectizationOptions& o, Cx<double> w, int* reprojections) {
  auto field = [&](const CxPoint<T>& p) {
    auto x = fiber_liouville(f, p);
    for (auto& c : x) c = o.field_scale * c;
    return x;
  };
  auto axpy = [](const CxPoint<T>& p, const T& a, const CxPoint<T>& k) {
    CxPoint<T> out;
    for (int j = 0; j < 3; ++j) out[j] = p[j] + scale(a, k[j]);
    return out;
  };
  const T half = 0.5 * h;
  for (int n = 1; n <= steps; ++n) {
    const auto k1 = field(z);
    const auto k2 = field(axpy(z, half, k1));
    const auto k3 = field(axpy(z, half, k2));
    const auto k4 = field(axpy(z, h, k3));
    for (int j = 0; j < 3; ++j) {
      z[j] = z[j] + scale(h / 6.0, k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    if (o.reproject_every > 0 && n % o.reproject_every == 0) {
      CxPoint<double> zv;
      for (int j = 0; j < 3; ++j) zv[j] = {ad::value_of(z[j].re), ad::value_of(z[j].im)};
      if (cabs(f.eval(zv) - w) > o.drift_tolerance * std::max(1.0, cabs(w))) {
        z = newton_project_generic(f, z, lift<T>(w));
        if (reprojections) ++*reprojections;
      }
    }
  }
  return z;
}

// Gauss-Newton onto {f = 1, |Z|^2 = rho_bar}: minimum-norm steps.
AmbientPoint solve_level(const WeightedPolynomial& f, AmbientPoint p, double rho_bar) {
  for (int it = 0; it < 60; ++it) {
    const auto z = p.complex();
    const Cx<double> fv = f.eval(z) - Cx<double>(1.0);
    const double rv = dot(p.x, p.x) - rho_bar;
    if (cabs(fv) <= 1e-14 * std::max(1.0, f.magnitude(z)) && std::abs(rv) <= 1e-14 * rho_bar) {
      return p;
    }
    const auto g = f.grad(z);
    std::array<Vec6, 3> jac{};
    for (int j = 0; j < 3; ++j) {
      jac[0][2 * j] = g[j].re;
      jac[0][2 * j + 1] = -g[j].im;
      jac[1][2 * j] = g[j].im;
      jac[1][2 * j + 1] = g[j].re;
    }
    for (int i = 0; i < 6; ++i) jac[2][i] = 2.0 * p.x[i];
    const std::array<double, 3> r{fv.re, fv.im, rv};
    // (J J^T) y = r, step = J^T y
    std::array<std::array<double, 3>, 3> a{};
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) a[i][k] = dot(jac[i], jac[k]);
    }
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if (det == 0.0) throw ConvergenceError("sample_level_set: singular constraint Jacobian");
    std::array<double, 3> y{};
    for (int c = 0; c < 3; ++c) {
      auto m = a;
      for (int i = 0; i < 3; ++i) m[i][c] = r[i];
      y[c] = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
              m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
              m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) /
             det;
    }
    for (int i = 0; i < 6; ++i) p.x[i] -= y[0] * jac[0][i] + y[1] * jac[1][i] + y[2] * jac[2][i];
  }
  throw ConvergenceError("sample_level_set: Gauss-Newton did not converge");
}

}  // namespace

// ---------------------------------------------------------------------------

const AmbientForm& ambient_form() {
  static const AmbientForm form = [] {
    const auto c = ambient_chart();
    DifferentialForm beta(c, 2);
    DifferentialForm lambda(c, 1);
    for (int j = 0; j < 3; ++j) {
      beta += 2.0 * DifferentialForm::basis(c, {2 * j, 2 * j + 1});
      lambda += ScalarField::coordinate(c, 2 * j) * DifferentialForm::basis(c, {2 * j + 1});
      lambda += (-ScalarField::coordinate(c, 2 * j + 1)) * DifferentialForm::basis(c, {2 * j});
    }
    return AmbientForm{beta, lambda};
  }();
  return form;
}

std::vector<ScalarField> liouville_components() {
  std::vector<ScalarField> out;
  for (int i = 0; i < 6; ++i) out.push_back(0.5 * ScalarField::coordinate(ambient_chart(), i));
  return out;
}

TangentVector liouville_field(const AmbientPoint& z) {
  if (z.rho() == 0.0) throw DomainError("liouville_field: the origin is excluded");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = 0.5 * z.x[i];
  return tangent(z, v);
}

// ---------------------------------------------------------------------------

FiberFrame fiber_frame(const WeightedPolynomial& f, const AmbientPoint& p) {
  const auto z = p.complex();
  const auto g = f.grad(z);
  const CxPoint<double> nu{conj(g[0]), conj(g[1]), conj(g[2])};
  const double g2 = norm2(g[0]) + norm2(g[1]) + norm2(g[2]);
  if (!(g2 > 0.0)) throw ConstructionError("fiber_frame: df vanishes at the base point");
  std::vector<CxPoint<double>> basis;
  for (int k = 0; k < 3 && basis.size() < 2; ++k) {
    CxPoint<double> v{Cx<double>(0.0), Cx<double>(0.0), Cx<double>(0.0)};
    v[k] = Cx<double>(1.0);
    // remove the normal component: v - <nu, v> nu / |nu|^2
    const Cx<double> c = hermitian(nu, v) / Cx<double>(g2);
    for (int j = 0; j < 3; ++j) v[j] = v[j] - c * nu[j];
    const double before = cnorm(v);
    for (const auto& u : basis) {
      const Cx<double> d = hermitian(u, v);
      for (int j = 0; j < 3; ++j) v[j] = v[j] - d * u[j];
    }
    // a second pass keeps the result orthogonal to rounding level
    for (const auto& u : basis) {
      const Cx<double> d = hermitian(u, v);
      for (int j = 0; j < 3; ++j) v[j] = v[j] - d * u[j];
    }
    {
      const Cx<double> c2 = hermitian(nu, v) / Cx<double>(g2);
      for (int j = 0; j < 3; ++j) v[j] = v[j] - c2 * nu[j];
    }
    const double after = cnorm(v);
    if (after <= 1e-3 * before || after == 0.0) continue;
    for (auto& c3 : v) c3 = Cx<double>(1.0 / after) * c3;
    basis.push_back(v);
  }
  if (basis.size() != 2) throw ConstructionError("fiber_frame: could not span the tangent space");
  FiberFrame out{p, nu, {}};
  for (const auto& u : basis) {
    CxPoint<double> iu;
    for (int j = 0; j < 3; ++j) iu[j] = Cx<double>(0.0, 1.0) * u[j];
    out.vectors.push_back(tangent(p, realify(u)));
    out.vectors.push_back(tangent(p, realify(iu)));
  }
  const auto q = frame_quality(out);
  if (q.tangency > 1e-10 || q.orthonormality > 1e-10) {
    throw ConstructionError("fiber_frame: frame failed validation");
  }
  return out;
}

FrameQuality frame_quality(const FiberFrame& frame) {
  FrameQuality q;
  const double nn = cnorm(frame.normal);
  std::vector<Vec6> vs;
  for (const auto& tv : frame.vectors) {
    Vec6 v;
    std::copy(tv.components.begin(), tv.components.end(), v.begin());
    vs.push_back(v);
    // df(v) = <nu, v>
    q.tangency = std::max(q.tangency, cabs(hermitian(frame.normal, complexify(v))) / nn);
  }
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      q.orthonormality = std::max(q.orthonormality, std::abs(dot(vs[i], vs[j]) - target));
    }
  }
  if (vs.size() != 4) q.orthonormality = INFINITY;
  return q;
}

std::array<std::array<double, 4>, 4> restrict_to_fiber(const DifferentialForm& form,
                                                       const FiberFrame& frame) {
  if (form.degree() != 2 || form.chart()->dim() != 6) {
    throw StructuralError("restrict_to_fiber: expects a 2-form on the R^6 chart");
  }
  const auto q = frame_quality(frame);
  if (q.tangency > 1e-10 || q.orthonormality > 1e-10) {
    throw StructuralError("restrict_to_fiber: frame is not an orthonormal frame of the fibre");
  }
  const Point base = frame.base.point();
  std::array<std::array<double, 4>, 4> m{};
  for (const auto& [mask, coeff] : form.terms()) {
    const auto idx = mask_indices(mask);
    const double c = coeff(base);
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        const auto& a = frame.vectors[i].components;
        const auto& b = frame.vectors[j].components;
        m[i][j] += c * (a[idx[0]] * b[idx[1]] - a[idx[1]] * b[idx[0]]);
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < i; ++j) m[i][j] = -m[j][i];
  }
  return m;
}

// ---------------------------------------------------------------------------

VerificationReport liouville_identity_check(std::size_t samples, std::uint64_t seed) {
  return liouville_identity_check(liouville_components(), samples, seed);
}

VerificationReport liouville_identity_check(const std::vector<ScalarField>& field,
                                            std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "symplectic.liouville_identity";
  r.reference = "i_X beta* = lambda* and d(i_X beta*) = beta*";
  r.samples = samples;
  r.threshold = 1e-12;
  const auto& a = ambient_form();
  const auto contraction = interior(field, a.beta);
  const auto dcontraction = exterior_derivative(contraction);
  const auto d_lambda = exterior_derivative(a.lambda);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double contraction_err = 0.0;
  double cartan_err = 0.0;
  double primitive_err = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    Point p(6);
    for (auto& x : p) x = u(gen);
    contraction_err = std::max(contraction_err, max_coefficient_difference(contraction, a.lambda, p));
    cartan_err = std::max(cartan_err, max_coefficient_difference(dcontraction, a.beta, p));
    primitive_err = std::max(primitive_err, max_coefficient_difference(d_lambda, a.beta, p));
  }
  r.measured = std::max({contraction_err, cartan_err, primitive_err});
  r.add("contraction_residual", contraction_err);
  r.add("cartan_residual", cartan_err);
  r.add("primitive_residual", primitive_err);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport fiber_positivity_check(const WeightedPolynomial& f, Cx<double> w,
                                          std::size_t samples, std::uint64_t seed) {
  return fiber_positivity_check(f, w, ambient_form().beta, samples, seed);
}

VerificationReport fiber_positivity_check(const WeightedPolynomial& f, Cx<double> w,
                                          const DifferentialForm& beta, std::size_t samples,
                                          std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "symplectic.fiber_positivity";
  r.reference = "beta* on a unitary frame (u, iu, v, iv) of the complex surface F_w has Pf = 4";
  r.samples = samples;
  r.threshold = 1e-10;
  double min_pf = INFINITY;
  double worst = 0.0;
  for (const auto& p0 : sample_fiber_band(f, samples, seed, 1.0, kEPi)) {
    const auto p = newton_project_to_fiber(f, p0, w);
    const double pf = pfaffian(restrict_to_fiber(beta, fiber_frame(f, p)));
    min_pf = std::min(min_pf, pf);
    worst = std::max(worst, std::abs(pf - 4.0));
  }
  r.measured = worst;
  r.positivity_ok = min_pf > 0.0;
  r.add("polynomial", f.name);
  r.add("min_pfaffian", min_pf);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------

std::vector<AmbientPoint> sample_level_set(const WeightedPolynomial& f, double rho_bar_star,
                                           std::size_t count, std::uint64_t seed) {
  if (!(rho_bar_star > 1.0)) throw DomainError("sample_level_set: rho_bar_star must exceed 1");
  auto pts = sample_link(f, count, seed);
  for (auto& p : pts) {
    p = weighted_scale(f, weighted_scale_to_radius(f, p, std::sqrt(rho_bar_star)), p);
    p = solve_level(f, p, rho_bar_star);
  }
  return pts;
}

FlowResult liouville_flow(const WeightedPolynomial& f, const AmbientPoint& start,
                          const std::vector<std::array<double, 6>>& vectors, double t,
                          const SymplectizationOptions& o) {
  if (!(o.step > 0.0)) throw DomainError("liouville_flow: step must be positive");
  const int steps = t == 0.0 ? 0 : static_cast<int>(std::ceil(std::abs(t) / o.step - 1e-9));
  const double h = steps == 0 ? 0.0 : t / steps;
  const Cx<double> w = f.eval(start.complex());
  FlowResult out;

  const auto zv = rk4_flow<double>(f, start.complex(), h, steps, o, w, &out.reprojections);
  out.end = AmbientPoint(zv);

  for (const auto& v : vectors) {
    CxPoint<D1> z;
    for (int j = 0; j < 3; ++j) {
      z[j] = Cx<D1>(D1(start.x[2 * j], v[2 * j]), D1(start.x[2 * j + 1], v[2 * j + 1]));
    }
    const auto e = rk4_flow<D1>(f, z, D1(h, 0.0), steps, o, w, nullptr);
    std::array<double, 6> pushed{};
    for (int j = 0; j < 3; ++j) {
      pushed[2 * j] = e[j].re.d;
      pushed[2 * j + 1] = e[j].im.d;
    }
    out.pushed.push_back(pushed);
  }

  if (steps > 0) {
    // h = t / steps with t seeded: the derivative in the flow time.
    CxPoint<D1> z;
    for (int j = 0; j < 3; ++j) z[j] = lift<D1>(start.z(j));
    const auto e = rk4_flow<D1>(f, z, D1(h, 1.0 / steps), steps, o, w, nullptr);
    for (int j = 0; j < 3; ++j) {
      out.time_derivative[2 * j] = e[j].re.d;
      out.time_derivative[2 * j + 1] = e[j].im.d;
    }
  } else {
    auto x = fiber_liouville(f, start.complex());
    for (auto& c : x) c = o.field_scale * c;
    out.time_derivative = realify(x);
  }
  return out;
}

SymplectizationError symplectization_error(const WeightedPolynomial& f,
                                           const SymplectizationOptions& o) {
  if (!(o.varrho > 0.0)) throw DomainError("symplectization: varrho must be positive");
  const double t = std::log(o.varrho);
  const auto& lambda = ambient_form().lambda;
  SymplectizationError err;
  for (const auto& p : sample_level_set(f, o.rho_bar_star, o.samples, o.seed)) {
    const auto frame = level_frame(f, p);
    const auto flow = liouville_flow(f, p, frame, t, o);
    err.reprojections += flow.reprojections;
    for (std::size_t k = 0; k < frame.size(); ++k) {
      const TangentVector before[1] = {tangent(p, frame[k])};
      const TangentVector after[1] = {tangent(flow.end, flow.pushed[k])};
      const double lhs = evaluate(lambda, after);
      const double rhs = o.varrho * evaluate(lambda, before);
      err.identity = std::max(err.identity, std::abs(lhs - rhs) / (o.varrho * p.rho()));
    }
    auto x = realify(fiber_liouville(f, flow.end.complex()));
    double diff = 0.0;
    for (int i = 0; i < 6; ++i) diff += std::pow(flow.time_derivative[i] - x[i], 2);
    err.generator = std::max(err.generator, std::sqrt(diff) / norm(x));
  }
  return err;
}

VerificationReport symplectization_identification(const WeightedPolynomial& f,
                                                  const SymplectizationOptions& o) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "symplectic.symplectization";
  r.reference = "Psi^* lambda* = varrho lambda*|_M and Psi_*(varrho d/dvarrho) = X";
  r.samples = o.samples;
  r.threshold = 1e-6;
  const auto e = symplectization_error(f, o);
  r.measured = e.identity;
  r.positivity_ok = e.generator < 1e-6;
  r.add("polynomial", f.name);
  r.add("varrho", o.varrho);
  r.add("rho_bar_star", o.rho_bar_star);
  r.add("step", o.step);
  r.add("generator_error", e.generator);
  r.add("generator_threshold", 1e-6);
  r.add("reprojections", static_cast<long long>(e.reprojections));
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport integrator_order_check(const WeightedPolynomial& f,
                                          SymplectizationOptions o, double coarse_step) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "symplectic.integrator_order";
  r.reference = "symplectization identity error falls by >= 8 when the step halves";
  r.samples = o.samples;
  r.bound = Bound::kAbove;
  r.threshold = 8.0;
  o.reproject_every = 0;
  o.step = coarse_step;
  const double e1 = symplectization_error(f, o).identity;
  o.step = 0.5 * coarse_step;
  const double e2 = symplectization_error(f, o).identity;
  r.measured = e2 > 0.0 ? e1 / e2 : INFINITY;
  r.add("coarse_step", coarse_step);
  r.add("error_coarse", e1);
  r.add("error_half", e2);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------

ChartMap reembedding_graph(const WeightedPolynomial& f, double radius) {
  const auto c = ambient_chart();
  const Cx<double> w(std::pow(radius, -f.degree));
  std::vector<ScalarField> comps;
  for (int i = 0; i < 6; ++i) {
    comps.push_back(ScalarField::from(c, [f, w, i](auto x) {
      using T = std::decay_t<decltype(x[0])>;
      const auto z = to_complex<T>(x);
      const auto g = f.grad(z);
      const Cx<T> s = graph_offset(f, z, lift<T>(w));
      T rho2(0.0);
      for (int k = 0; k < 6; ++k) rho2 = rho2 + x[k] * x[k];
      const T psi = reembedding_cutoff(ad::sqrt(rho2));
      const int j = i / 2;
      const Cx<T> shift = scale(psi, s * conj(g[j]));
      return (i % 2 == 0) ? T(x[i] + shift.re) : T(x[i] + shift.im);
    }));
  }
  return ChartMap(c, c, std::move(comps));
}

ChartMap weighted_scale_map(const WeightedPolynomial& f, double radius) {
  const auto c = ambient_chart();
  std::vector<ScalarField> comps;
  for (int i = 0; i < 6; ++i) {
    comps.push_back(std::pow(radius, f.weights[i / 2]) * ScalarField::coordinate(c, i));
  }
  return ChartMap(c, c, std::move(comps));
}

VerificationReport reembedding_check(const WeightedPolynomial& f, double scale,
                                     const ChartMap& graph, const ReembeddingOptions& o) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "symplectic.reembedding";
  r.reference = "the interpolated graph e_1(F_1) is a symplectic submanifold of (C^3, beta*)";
  r.samples = o.samples;
  r.bound = Bound::kAbove;
  r.threshold = 0.0;
  const Cx<double> w(std::pow(scale, -f.degree));
  const auto points = sample_fiber_band(f, o.samples, o.seed, 1.0, kEPi);

  double displacement = 0.0;
  for (const auto& p : points) {
    const auto z = p.complex();
    const auto g = f.grad(z);
    displacement = std::max(displacement, cabs(graph_offset(f, z, w)) *
                                              std::sqrt(norm2(g[0]) + norm2(g[1]) + norm2(g[2])));
  }

  double min_pf = INFINITY;
  std::string failing = "none";
  if (displacement < o.displacement_threshold) {
    const auto pulled = pullback(compose(weighted_scale_map(f, scale), graph), ambient_form().beta);
    for (const auto& p : points) {
      const double pf = pfaffian(restrict_to_fiber(pulled, fiber_frame(f, p)));
      if (pf < min_pf) {
        min_pf = pf;
        if (pf <= 0.0) {
          failing = fmt::format("({})", fmt::join(p.x, ", "));
        }
      }
    }
  }

  // Overlaps, compared after undoing the homothety.
  double agree_core = 0.0;
  for (const auto& p0 : sample_fiber_band(f, o.samples, o.seed + 1, 1.0, 1.95)) {
    const auto q = graph_point(f, p0, w);
    const auto base = tubular_project(f, q).base;
    const Point g = graph(base.point());
    std::array<double, 6> gv{};
    std::copy(g.begin(), g.end(), gv.begin());
    agree_core = std::max(agree_core, distance(AmbientPoint(gv), q));
  }
  double agree_end = 0.0;
  for (const auto& p0 : sample_fiber_band(f, o.samples, o.seed + 2, 3.05, kEPi)) {
    const auto q = graph_point(f, p0, w);
    const auto base = tubular_project(f, q).base;
    const Point g = graph(base.point());
    std::array<double, 6> gv{};
    std::copy(g.begin(), g.end(), gv.begin());
    agree_end = std::max(agree_end, distance(AmbientPoint(gv), base));
  }

  double equivariance = 0.0;
  const double t = kTwoPi / f.degree;
  for (const auto& p : points) {
    const Point a = graph(hopf_action(f, t, p).point());
    const Point b0 = graph(p.point());
    std::array<double, 6> av{}, bv{};
    std::copy(a.begin(), a.end(), av.begin());
    std::copy(b0.begin(), b0.end(), bv.begin());
    equivariance = std::max(equivariance, distance(AmbientPoint(av), hopf_action(f, t, AmbientPoint(bv))));
  }

  r.measured = std::isfinite(min_pf) ? min_pf : 0.0;
  const bool displacement_ok = displacement < o.displacement_threshold;
  r.positivity_ok = displacement_ok && agree_core < 1e-10 && agree_end < 1e-10 &&
                    equivariance < 1e-10;
  r.add("polynomial", f.name);
  r.add("scale", scale);
  r.add("displacement", displacement);
  r.add("displacement_threshold", o.displacement_threshold);
  r.add("overlap_core_discrepancy", agree_core);
  r.add("overlap_end_discrepancy", agree_end);
  r.add("overlap_threshold", 1e-10);
  r.add("hopf_equivariance", equivariance);
  r.add("failing_sample", failing);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

ReembeddingResult reembedding_form(const WeightedPolynomial& f, const ReembeddingOptions& o) {
  Stopwatch clock;
  ReembeddingResult out;
  std::string tried;
  for (double scale : o.scales) {
    out.report = reembedding_check(f, scale, reembedding_graph(f, scale), o);
    tried += (tried.empty() ? "" : " ") + format_real(scale);
    if (out.report.pass) {
      out.found = true;
      out.scale = scale;
      break;
    }
  }
  out.report.add("scales_tried", tried);
  out.report.wall_time = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Newton correction delta with f(z + delta) = w, accumulated on its own so that
// it keeps full relative precision when z is large.
template <class T>
CxPoint<T> newton_correction(const WeightedPolynomial& f, const CxPoint<T>& z, const Cx<T>& w) {
  CxPoint<T> delta{Cx<T>(0.0), Cx<T>(0.0), Cx<T>(0.0)};
  int extra = -1;
  for (int it = 0; it < 60; ++it) {
    CxPoint<T> q;
    for (int j = 0; j < 3; ++j) q[j] = z[j] + delta[j];
    const Cx<T> r = f.eval(q) - w;
    if (extra < 0) {
      CxPoint<double> qv;
      for (int j = 0; j < 3; ++j) qv[j] = {ad::value_of(q[j].re), ad::value_of(q[j].im)};
      const double rv = std::hypot(ad::value_of(r.re), ad::value_of(r.im));
      if (rv <= 1e-14 * std::max(1.0, f.magnitude(qv))) extra = 4;
    } else if (--extra == 0) {
      return delta;
    }
    const auto g = f.grad(q);
    const T g2 = norm2(g[0]) + norm2(g[1]) + norm2(g[2]);
    const Cx<T> k = r / Cx<T>(g2, T(0.0));
    for (int j = 0; j < 3; ++j) delta[j] = delta[j] - k * conj(g[j]);
  }
  throw ConvergenceError("newton_correction: no convergence");
}

// Components of delta(P) = E_tau(P) - S_tau(P) on the R^6 chart.
std::vector<ScalarField> end_correction(const WeightedPolynomial& f, double tau) {
  const auto c = ambient_chart();
  const double s = std::exp(0.5 * tau);
  std::vector<ScalarField> comps;
  for (int i = 0; i < 6; ++i) {
    comps.push_back(ScalarField::from(c, [f, s, i](auto x) {
      using T = std::decay_t<decltype(x[0])>;
      CxPoint<T> z = to_complex<T>(x);
      for (int j = 0; j < 3; ++j) z[j] = std::pow(s, f.weights[j]) * z[j];
      const auto d = newton_correction(f, z, Cx<T>(1.0));
      return (i % 2 == 0) ? d[i / 2].re : d[i / 2].im;
    }));
  }
  return comps;
}

// sum_j (a_x db_y - a_y db_x): lambda* is bilinear in (point, vector).
DifferentialForm lambda_pair(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b) {
  DifferentialForm out(ambient_chart(), 1);
  for (int j = 0; j < 3; ++j) {
    out += a[2 * j] * exterior_derivative(DifferentialForm::scalar(b[2 * j + 1]));
    out += (-a[2 * j + 1]) * exterior_derivative(DifferentialForm::scalar(b[2 * j]));
  }
  return out;
}

}  // namespace

ContactClosenessSeries contact_closeness_series(const WeightedPolynomial& f,
                                                const std::vector<double>& taus,
                                                std::size_t samples, std::uint64_t seed) {
  ContactClosenessSeries out;
  out.taus = taus;
  const auto link = sample_link(f, samples, seed);
  std::vector<std::vector<Vec6>> frames;
  for (const auto& p : link) frames.push_back(link_frame(f, p));
  for (double tau : taus) {
    const double k = std::exp(-tau);
    // E^* lambda* - S^* lambda* = pair(S, delta) + pair(delta, S) + pair(delta, delta),
    // which avoids subtracting two large forms.
    const auto scaled = weighted_scale_map(f, std::exp(0.5 * tau)).components();
    const auto delta = end_correction(f, tau);
    const auto diff = k * (lambda_pair(scaled, delta) + lambda_pair(delta, scaled) +
                           lambda_pair(delta, delta));
    const auto ddiff = exterior_derivative(diff);
    double c0 = 0.0;
    double c1 = 0.0;
    for (std::size_t n = 0; n < link.size(); ++n) {
      const auto& fr = frames[n];
      for (std::size_t a = 0; a < fr.size(); ++a) {
        const TangentVector one[1] = {tangent(link[n], fr[a])};
        c0 = std::max(c0, std::abs(evaluate(diff, one)));
        for (std::size_t b = a + 1; b < fr.size(); ++b) {
          const TangentVector two[2] = {tangent(link[n], fr[a]), tangent(link[n], fr[b])};
          c1 = std::max(c1, std::abs(evaluate(ddiff, two)));
        }
      }
    }
    out.c0.push_back(c0);
    out.c1.push_back(c1);
  }
  return out;
}

VerificationReport contact_closeness_check(const WeightedPolynomial& f,
                                           const ContactClosenessSeries& series) {
  VerificationReport r;
  r.check = "symplectic.contact_closeness";
  r.reference = "contact forms induced on the link by F_1 approach those of F_0 in C^1 as tau grows";
  r.samples = series.taus.size();
  r.bound = Bound::kBelow;
  bool decreasing = true;
  for (std::size_t i = 1; i < series.taus.size(); ++i) {
    decreasing = decreasing && series.c0[i] < series.c0[i - 1] && series.c1[i] < series.c1[i - 1];
  }
  // measured: the last C^1 distance relative to the first; threshold 1.
  const double first = std::max(series.c0.front(), series.c1.front());
  const double last = std::max(series.c0.back(), series.c1.back());
  r.measured = first > 0.0 ? last / first : 0.0;
  r.threshold = 1.0;
  r.positivity_ok = decreasing;
  r.add("polynomial", f.name);
  for (std::size_t i = 0; i < series.taus.size(); ++i) {
    r.add(fmt::format("c0_tau{}", format_real(series.taus[i])), series.c0[i]);
    r.add(fmt::format("c1_tau{}", format_real(series.taus[i])), series.c1[i]);
  }
  r.finalize();
  return r;
}

}  // namespace leafsym
