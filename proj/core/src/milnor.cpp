#include "leafsym/milnor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace leafsym {

namespace {

constexpr int kRetryBudget = 64;

CxPoint<double> sub(const CxPoint<double>& a, const CxPoint<double>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

double cnorm(const CxPoint<double>& z) {
  return std::sqrt(norm2(z[0]) + norm2(z[1]) + norm2(z[2]));
}

CxPoint<double> normal(const WeightedPolynomial& f, const CxPoint<double>& p) {
  auto g = f.grad(p);
  return {conj(g[0]), conj(g[1]), conj(g[2])};
}

// Index of the variable that appears only as a pure power c Z_j^n, and n.
std::pair<int, int> pure_power_variable(const WeightedPolynomial& f) {
  for (int j = 2; j >= 0; --j) {
    int power = 0;
    bool clean = true;
    for (const auto& m : f.monomials) {
      if (m.exps[j] == 0) continue;
      const bool pure = m.exps[(j + 1) % 3] == 0 && m.exps[(j + 2) % 3] == 0;
      if (!pure || power != 0) clean = false;
      power = m.exps[j];
    }
    if (clean && power > 0) return {j, power};
  }
  throw StructuralError(f.name + ": no variable occurs as a lone pure power");
}

// Dense Gaussian elimination with partial pivoting, n <= 8.
bool solve_linear(std::array<std::array<double, 8>, 8> a, std::array<double, 8> b, int n,
                  std::array<double, 8>& x) {
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (a[piv][c] == 0.0) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (int r = c + 1; r < n; ++r) {
      const double k = a[r][c] / a[c][c];
      for (int j = c; j < n; ++j) a[r][j] -= k * a[c][j];
      b[r] -= k * b[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int j = r + 1; j < n; ++j) acc -= a[r][j] * x[j];
    x[r] = acc / a[r][r];
  }
  return true;
}

}  // namespace

double WeightedPolynomial::magnitude(const CxPoint<double>& z) const {
  double acc = 0.0;
  for (const auto& m : monomials) {
    double term = std::abs(m.coeff);
    for (int j = 0; j < 3; ++j) term *= std::pow(std::sqrt(norm2(z[j])), m.exps[j]);
    acc += term;
  }
  return acc;
}

WeightedPolynomial fermat_e6() {
  return {"E6", {{1.0, {3, 0, 0}}, {1.0, {0, 3, 0}}, {1.0, {0, 0, 3}}}, {1, 1, 1}, 3, -3};
}

WeightedPolynomial e7() {
  return {"E7", {{1.0, {4, 0, 0}}, {1.0, {0, 4, 0}}, {1.0, {0, 0, 2}}}, {1, 1, 2}, 4, -2};
}

WeightedPolynomial e8() {
  return {"E8", {{1.0, {6, 0, 0}}, {1.0, {0, 3, 0}}, {1.0, {0, 0, 2}}}, {1, 2, 3}, 6, -1};
}

WeightedPolynomial polynomial_by_name(const std::string& name) {
  if (name == "E6") return fermat_e6();
  if (name == "E7") return e7();
  if (name == "E8") return e8();
  throw DomainError("unknown polynomial '" + name + "' (expected E6, E7 or E8)");
}

// ---------------------------------------------------------------------------

AmbientPoint::AmbientPoint(const CxPoint<double>& z) {
  for (int j = 0; j < 3; ++j) {
    x[2 * j] = z[j].re;
    x[2 * j + 1] = z[j].im;
  }
}

double AmbientPoint::rho() const {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

double distance(const AmbientPoint& a, const AmbientPoint& b) {
  double acc = 0.0;
  for (int i = 0; i < 6; ++i) acc += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
  return std::sqrt(acc);
}

EndPoint make_end_point(const WeightedPolynomial& f, const AmbientPoint& base, double tau) {
  if (cabs(f.eval(base.complex())) >= 1e-10 || std::abs(base.rho() - 1.0) >= 1e-10) {
    throw DomainError("make_end_point: base is not on the link");
  }
  return {base, tau};
}

ChartRef ambient_chart() {
  static const ChartRef chart = make_chart("C3", {"x0", "y0", "x1", "y1", "x2", "y2"});
  return chart;
}

AmbientPoint hopf_action(const WeightedPolynomial& f, double t, const AmbientPoint& z) {
  CxPoint<double> out;
  for (int j = 0; j < 3; ++j) out[j] = expi(f.weights[j] * t) * z.z(j);
  return AmbientPoint(out);
}

AmbientPoint weighted_scale(const WeightedPolynomial& f, double s, const AmbientPoint& z) {
  CxPoint<double> out;
  for (int j = 0; j < 3; ++j) out[j] = std::pow(s, f.weights[j]) * z.z(j);
  return AmbientPoint(out);
}

double weighted_scale_to_radius(const WeightedPolynomial& f, const AmbientPoint& z,
                                double radius) {
  if (!(radius > 0.0) || z.rho() == 0.0) {
    throw DomainError("weighted_scale_to_radius: needs a nonzero point and positive radius");
  }
  // phi(u) = log sum_j e^{2 w_j u} |Z_j|^2 - 2 log radius is increasing and
  // convex in u = log s, with slope between 2 min w and 2 max w.
  const double target = 2.0 * std::log(radius);
  double u = (target - 2.0 * std::log(z.rho())) / 2.0;
  for (int it = 0; it < 100; ++it) {
    double sum = 0.0;
    double dsum = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double a = std::exp(2.0 * f.weights[j] * u) * norm2(z.z(j));
      sum += a;
      dsum += 2.0 * f.weights[j] * a;
    }
    const double phi = std::log(sum) - target;
    const double step = phi / (dsum / sum);
    u -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(u))) break;
  }
  return std::exp(u);
}

// ---------------------------------------------------------------------------

AmbientPoint newton_project_to_fiber(const WeightedPolynomial& f, const AmbientPoint& z,
                                     Cx<double> w) {
  CxPoint<double> p = z.complex();
  for (int it = 0; it <= 50; ++it) {
    const Cx<double> r = f.eval(p) - w;
    const double tol = 1e-12 * std::max(1.0, f.magnitude(p));
    if (cabs(r) <= tol) return AmbientPoint(p);
    if (it == 50) break;
    const auto g = f.grad(p);
    const double g2 = norm2(g[0]) + norm2(g[1]) + norm2(g[2]);
    if (std::sqrt(g2) <= 1e-8) {
      throw DomainError("newton_project_to_fiber: gradient vanishes (near the origin)");
    }
    const Cx<double> k = r / Cx<double>(g2);
    for (int j = 0; j < 3; ++j) p[j] = p[j] - k * conj(g[j]);
  }
  throw ConvergenceError("newton_project_to_fiber: no convergence in 50 iterations");
}

std::vector<AmbientPoint> sample_link(const WeightedPolynomial& f, std::size_t count,
                                      std::uint64_t seed) {
  if (count == 0) throw DomainError("sample_link: count must be positive");
  const auto [solved, power] = pure_power_variable(f);
  double lead = 0.0;
  for (const auto& m : f.monomials) {
    if (m.exps[solved] != 0) lead = m.coeff;
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal01;
  std::uniform_int_distribution<int> branch(0, power - 1);
  std::vector<AmbientPoint> out;
  out.reserve(count);
  std::size_t failures = 0;
  while (out.size() < count) {
    if (failures > kRetryBudget * count + kRetryBudget) {
      throw ConvergenceError("sample_link: retry budget exhausted for " + f.name);
    }
    CxPoint<double> z{Cx<double>(0.0), Cx<double>(0.0), Cx<double>(0.0)};
    for (int j = 0; j < 3; ++j) {
      if (j == solved) continue;
      z[j] = {normal01(gen), normal01(gen)};
    }
    const int k = branch(gen);
    // lead Z^n = -rest
    const Cx<double> rest = f.eval(z);
    const Cx<double> rhs = Cx<double>(-1.0 / lead) * rest;
    const double mod = std::pow(cabs(rhs), 1.0 / power);
    const double arg = (std::atan2(rhs.im, rhs.re) + kTwoPi * k) / power;
    z[solved] = Cx<double>(mod) * expi(arg);
    AmbientPoint p(z);
    bool ok = true;
    try {
      for (int pass = 0; pass < 4; ++pass) {
        p = weighted_scale(f, weighted_scale_to_radius(f, p, 1.0), p);
        p = newton_project_to_fiber(f, p, Cx<double>(0.0));
      }
      p = weighted_scale(f, weighted_scale_to_radius(f, p, 1.0), p);
    } catch (const std::exception&) {
      ok = false;
    }
    if (ok) {
      for (int j = 0; j < 3; ++j) ok = ok && cabs(p.z(j)) >= 1e-3;
      ok = ok && cabs(f.eval(p.complex())) < 1e-12 && std::abs(p.rho() - 1.0) < 1e-12;
    }
    if (ok) {
      out.push_back(p);
    } else {
      ++failures;
    }
  }
  return out;
}

std::vector<AmbientPoint> sample_fiber_band(const WeightedPolynomial& f, std::size_t count,
                                            std::uint64_t seed, double rho_lo, double rho_hi) {
  auto base = sample_link(f, count, seed);
  std::mt19937_64 gen(seed ^ 0xa5a5a5a5deadbeefULL);
  std::uniform_real_distribution<double> radius(rho_lo, rho_hi);
  for (auto& p : base) {
    const double r = radius(gen);
    p = weighted_scale(f, weighted_scale_to_radius(f, p, r), p);
  }
  return base;
}

AmbientPoint end_to_ambient(const WeightedPolynomial& f, const EndPoint& e, double theta,
                            double eps) {
  const double tau_min = -(2.0 / 3.0) * std::log(eps);
  if (!(e.tau > tau_min)) {
    throw DomainError(fmt::format("end_to_ambient: tau = {} must exceed {}", e.tau, tau_min));
  }
  const AmbientPoint scaled = weighted_scale(f, std::exp(0.5 * e.tau), e.base);
  return newton_project_to_fiber(f, scaled, expi(theta));
}

// ---------------------------------------------------------------------------

AmbientPoint graph_point(const WeightedPolynomial& f, const AmbientPoint& p, Cx<double> w) {
  const auto z = p.complex();
  const Cx<double> s = graph_offset(f, z, w);
  const auto nu = normal(f, z);
  return AmbientPoint(CxPoint<double>{z[0] + s * nu[0], z[1] + s * nu[1], z[2] + s * nu[2]});
}

TubularCoordinates tubular_project(const WeightedPolynomial& f, const AmbientPoint& q) {
  using ad::D1;
  const auto qz = q.complex();
  const AmbientPoint p0 = newton_project_to_fiber(f, q, Cx<double>(0.0));
  const auto pz = p0.complex();
  const auto nu0 = normal(f, pz);
  const auto diff = sub(qz, pz);
  Cx<double> s0(0.0);
  for (int j = 0; j < 3; ++j) s0 = s0 + conj(nu0[j]) * diff[j];
  s0 = s0 / Cx<double>(norm2(nu0[0]) + norm2(nu0[1]) + norm2(nu0[2]));

  std::array<double, 8> u{};
  for (int i = 0; i < 6; ++i) u[i] = p0.x[i];
  u[6] = s0.re;
  u[7] = s0.im;

  auto residual = [&](const auto& v) {
    using T = std::decay_t<decltype(v[0])>;
    CxPoint<T> p{Cx<T>(v[0], v[1]), Cx<T>(v[2], v[3]), Cx<T>(v[4], v[5])};
    Cx<T> s(v[6], v[7]);
    auto g = f.grad(p);
    std::array<T, 8> r;
    for (int j = 0; j < 3; ++j) {
      Cx<T> e = p[j] + s * conj(g[j]) - lift<T>(qz[j]);
      r[2 * j] = e.re;
      r[2 * j + 1] = e.im;
    }
    Cx<T> fv = f.eval(p);
    r[6] = fv.re;
    r[7] = fv.im;
    return r;
  };

  const double scale = std::max(1.0, q.rho());
  for (int it = 0; it < 50; ++it) {
    std::array<std::array<double, 8>, 8> jac{};
    std::array<double, 8> r0{};
    for (int c = 0; c < 8; ++c) {
      std::array<D1, 8> v;
      for (int i = 0; i < 8; ++i) v[i] = D1(u[i], i == c ? 1.0 : 0.0);
      auto r = residual(v);
      for (int i = 0; i < 8; ++i) {
        jac[i][c] = r[i].d;
        r0[i] = r[i].v;
      }
    }
    std::array<double, 8> delta{};
    if (!solve_linear(jac, r0, 8, delta)) {
      throw ConvergenceError("tubular_project: singular Jacobian");
    }
    double dn = 0.0;
    for (int i = 0; i < 8; ++i) {
      u[i] -= delta[i];
      dn = std::max(dn, std::abs(delta[i]));
    }
    if (dn <= 1e-15 * scale) {
      std::array<double, 6> base{};
      std::copy_n(u.begin(), 6, base.begin());
      return {AmbientPoint(base), Cx<double>(u[6], u[7])};
    }
  }
  throw ConvergenceError("tubular_project: no convergence in 50 iterations");
}

// ---------------------------------------------------------------------------

std::vector<AmbientPoint> sample_regularity_band(const WeightedPolynomial& f, RegularityBand band,
                                                 std::size_t count, std::uint64_t seed) {
  if (!(band.f_max > band.f_min) || band.f_min < 0.0) {
    throw DomainError("regularity band must satisfy 0 <= f_min < f_max");
  }
  const auto link = sample_link(f, count, seed);
  std::mt19937_64 gen(seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal01;
  std::vector<AmbientPoint> out;
  out.reserve(count);
  std::size_t attempts = 0;
  for (std::size_t i = 0; out.size() < count; i = (i + 1) % link.size()) {
    if (++attempts > kRetryBudget * count) {
      throw ConvergenceError("sample_regularity_band: retry budget exhausted");
    }
    const auto p = link[i].complex();
    const auto nu = normal(f, p);
    const double nn = cnorm(nu);
    // Offset along the normal sized to land inside the band, plus tangential noise.
    const double target = band.f_min + (band.f_max - band.f_min) * unit(gen);
    const Cx<double> phase = expi(kTwoPi * unit(gen));
    const Cx<double> s = Cx<double>(target / (nn * nn)) * phase;
    CxPoint<double> q;
    for (int j = 0; j < 3; ++j) {
      q[j] = p[j] + s * nu[j] + Cx<double>(0.01 * target * normal01(gen), 0.01 * target * normal01(gen));
    }
    const double r = cnorm(q);
    for (auto& c : q) c = Cx<double>(1.0 / r) * c;
    const double fv = cabs(f.eval(q));
    if (fv > band.f_min && fv <= band.f_max) out.emplace_back(q);
  }
  return out;
}

double arg_gradient_norm(const WeightedPolynomial& f, const AmbientPoint& q) {
  const auto z = q.complex();
  const Cx<double> fv = f.eval(z);
  const auto g = f.grad(z);
  // d arg f = Im(df / f) = sum_j Im(g_j) dx_j + Re(g_j) dy_j,  g = grad f / f.
  std::array<double, 6> v{};
  for (int j = 0; j < 3; ++j) {
    const Cx<double> h = g[j] / fv;
    v[2 * j] = h.im;
    v[2 * j + 1] = h.re;
  }
  const double r = q.rho();
  double radial = 0.0;
  for (int i = 0; i < 6; ++i) radial += v[i] * q.x[i] / r;
  double acc = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double t = v[i] - radial * q.x[i] / r;
    acc += t * t;
  }
  return std::sqrt(acc);
}

VerificationReport milnor_regularity_check(const WeightedPolynomial& f, RegularityBand band,
                                           std::size_t samples, std::uint64_t seed,
                                           double floor) {
  Stopwatch clock;
  auto r = milnor_regularity_check(f, band, sample_regularity_band(f, band, samples, seed), floor);
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport milnor_regularity_check(const WeightedPolynomial& f, RegularityBand band,
                                           const std::vector<AmbientPoint>& points,
                                           double floor) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "milnor.regularity";
  r.reference = "arg f restricted to S^5 has no critical points in the tube around the link";
  r.bound = Bound::kAbove;
  r.threshold = floor;
  double lo = INFINITY;
  std::size_t used = 0;
  for (const auto& q : points) {
    const double fv = cabs(f.eval(q.complex()));
    if (!(fv > band.f_min && fv <= band.f_max)) continue;
    lo = std::min(lo, arg_gradient_norm(f, q));
    ++used;
  }
  r.samples = used;
  r.measured = used > 0 ? lo : 0.0;
  r.positivity_ok = used > 0;
  r.add("polynomial", f.name);
  r.add("band_f_min", band.f_min);
  r.add("band_f_max", band.f_max);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceSeries convergence_series(const WeightedPolynomial& f, std::size_t samples,
                                     std::uint64_t seed, const std::vector<double>& scales) {
  const auto points = sample_fiber_band(f, samples, seed, 1.0, kEPi);
  ConvergenceSeries out;
  out.scales = scales;
  for (double scale : scales) {
    const Cx<double> w(std::pow(scale, -f.degree));
    double sup = 0.0;
    for (const auto& p : points) {
      const auto z = p.complex();
      const Cx<double> s = graph_offset(f, z, w);
      sup = std::max(sup, cabs(s) * cnorm(normal(f, z)));
    }
    out.displacement.push_back(sup);
  }
  out.slope = loglog_slope(out.scales, out.displacement);
  return out;
}

VerificationReport convergence_law_check(const WeightedPolynomial& f, std::size_t samples,
                                         std::uint64_t seed) {
  Stopwatch clock;
  auto r = convergence_law_check(f, convergence_series(f, samples, seed));
  r.samples = samples;
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport convergence_law_check(const WeightedPolynomial& f,
                                         const ConvergenceSeries& series) {
  VerificationReport r;
  r.check = "milnor.convergence_law";
  r.reference = "R^{-1} F_1(R) converges to F_0 over [1, e^pi] like R^{-d}";
  r.threshold = 0.3;
  bool monotone = true;
  for (std::size_t i = 1; i < series.displacement.size(); ++i) {
    monotone = monotone && series.displacement[i] < series.displacement[i - 1];
  }
  r.positivity_ok = monotone;
  r.measured = std::abs(series.slope + f.degree);
  r.add("polynomial", f.name);
  r.add("expected_slope", static_cast<double>(-f.degree));
  r.add("slope", series.slope);
  for (std::size_t i = 0; i < series.scales.size(); ++i) {
    r.add(fmt::format("displacement_R{}", series.scales[i]), series.displacement[i]);
  }
  r.finalize();
  return r;
}

}  // namespace leafsym
