#include "leafsym/endperiodic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace leafsym {

namespace {

constexpr int kT = 0, kX = 1, kY = 2, kZ = 3;

// Strict sign conditions are asserted on [a + 5%, b - 5%] of each open interval.
constexpr double kShrink = 0.05;

std::vector<double> grid(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return out;
}

double eval1(const ScalarField& f, double t) {
  const double p[1] = {t};
  return f(p);
}

double deriv1(const ScalarField& f, double t) {
  const double p[1] = {t};
  return f.partial(p, 0);
}

// Golden-section search for a max of phi on [a, b].
template <class F>
double golden_max(F phi, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = phi(c), fd = phi(d);
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = phi(d);
    }
  }
  return std::max(fc, fd);
}

Point end_point(double tau, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  return {tau, u(gen), u(gen), u(gen)};
}

std::vector<TangentVector> coordinate_frame4(const ChartRef& c, const Point& p) {
  return coordinate_frame(c, p);
}

}  // namespace

ChartRef tau_line() {
  static const ChartRef c = make_chart("tau", {"tau"});
  return c;
}

ChartRef r_line() {
  static const ChartRef c = make_chart("r", {"r"});
  return c;
}

double volume_constant(int c1) { return -static_cast<double>(c1) / std::numbers::pi; }

double CutoffPair::k_at(double tau) const { return eval1(k, tau); }
double CutoffPair::k_prime_at(double tau) const { return deriv1(k, tau); }
double CutoffPair::l_at(double tau) const { return eval1(l, tau); }

VerificationReport cutoff_certificate_check(const CutoffPair& pair) {
  VerificationReport r;
  r.check = "endperiodic.cutoffs";
  r.reference = "k, l satisfy the regime table and lambda clears the scanned bound by 5%";
  r.bound = Bound::kAbove;
  r.threshold = 0.05 - 1e-12;
  r.samples = 40000;
  r.measured = (pair.lambda - pair.scanned_max) / std::max(pair.scanned_max, 1.0);
  r.positivity_ok = pair.certified;
  r.add("mu", pair.mu);
  r.add("lambda", pair.lambda);
  r.add("lambda_bound", pair.scanned_max);
  r.add("volume_constant", volume_constant(pair.c1));
  r.finalize();
  return r;
}

double scan_lambda_bound(const ScalarField& k, double t2, double t3, double constant, double mu) {
  auto phi = [&](double t) { return -constant * deriv1(k, t) * eval1(k, t) / (2.0 * mu); };
  const auto g = grid(t2, t3, 10000);
  std::size_t best = 0;
  double best_value = -INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = phi(g[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = g[best == 0 ? 0 : best - 1];
  const double hi = g[std::min(best + 1, g.size() - 1)];
  return std::max(best_value, golden_max(phi, lo, hi));
}

CutoffPair build_cutoffs(double mu, const std::array<double, 4>& t, int c1) {
  if (!(mu > 0.0)) throw DomainError("build_cutoffs: mu must be positive");
  if (!(t[0] < t[1] && t[1] < t[2] && t[2] < t[3])) {
    throw DomainError("build_cutoffs: breakpoints must satisfy T0 < T1 < T2 < T3");
  }
  const auto line = tau_line();
  CutoffPair pair;
  pair.breakpoints = t;
  pair.mu = mu;
  pair.c1 = c1;
  const double t2 = t[2], w23 = t[3] - t[2];
  pair.k = ScalarField::from(line, [t2, w23](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    return T(ad::exp(x[0]) * (1.0 - ad::smooth_step((x[0] - t2) / w23)));
  });
  pair.scanned_max = scan_lambda_bound(pair.k, t[2], t[3], volume_constant(c1), mu);
  pair.lambda = 1.05 * std::max(pair.scanned_max, 1.0);
  const double t1 = t[1], w12 = t[2] - t[1], lambda = pair.lambda;
  pair.l = ScalarField::from(line, [t1, w12, lambda](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    return T(lambda * ad::smooth_step((x[0] - t1) / w12));
  });

  auto fail = [](const std::string& where, double tau) {
    throw ConstructionError(fmt::format("build_cutoffs: sign condition violated on {} at tau = {}",
                                        where, format_real(tau)));
  };
  for (double tau : grid(t[0], t[1], 10000)) {
    if (std::abs(pair.k_at(tau) - std::exp(tau)) > 1e-12 * std::exp(tau)) fail("[T0, T1] (k = e^tau)", tau);
    if (pair.l_at(tau) != 0.0) fail("[T0, T1] (l = 0)", tau);
  }
  const double s12 = kShrink * (t[2] - t[1]);
  for (double tau : grid(t[1] + s12, t[2] - s12, 10000)) {
    if (!(pair.k_prime_at(tau) > 0.0)) fail("(T1, T2) (k' > 0)", tau);
    if (!(pair.l_at(tau) > 0.0)) fail("(T1, T2) (l > 0)", tau);
  }
  const double s23 = kShrink * (t[3] - t[2]);
  for (double tau : grid(t[2], t[3] - s23, 10000)) {
    if (!(pair.k_at(tau) > 0.0)) fail("[T2, T3] (k > 0)", tau);
    if (pair.l_at(tau) != lambda) fail("[T2, T3] (l = lambda)", tau);
  }
  for (double tau : grid(t[3], t[3] + kTauPeriod, 10000)) {
    if (pair.k_at(tau) != 0.0) fail("[T3, oo) (k = 0)", tau);
    if (pair.l_at(tau) != lambda) fail("[T3, oo) (l = lambda)", tau);
  }
  if (!(pair.lambda >= 1.05 * pair.scanned_max)) fail("[T2, T3] (lambda inequality)", t[2]);
  pair.certified = true;
  return pair;
}

ScalarField on_end(const KTChart& kt, const ScalarField& cutoff) {
  const ChartMap to_tau(kt.chart, tau_line(), {ScalarField::coordinate(kt.chart, kT)});
  return compose(cutoff, to_tau);
}

DifferentialForm end_form(const CutoffPair& pair, const KTChart& kt) {
  if (!pair.certified) throw StructuralError("end_form: cutoff pair is not certified");
  if (kt.nil.c1 != pair.c1) throw StructuralError("end_form: chart and cutoffs disagree on c1");
  const auto zeta = connection_form(kt);
  const auto k = on_end(kt, pair.k);
  const auto l = on_end(kt, pair.l);
  return exterior_derivative(k * zeta) + l * DifferentialForm::basis(kt.chart, {kT, kX}) +
         pair.mu * wedge(DifferentialForm::basis(kt.chart, {kY}), zeta);
}

double volume_coefficient(const CutoffPair& pair, double tau) {
  return volume_constant(pair.c1) * pair.k_prime_at(tau) * pair.k_at(tau) +
         2.0 * pair.l_at(tau) * pair.mu;
}

std::vector<Point> sample_end(const CutoffPair& pair, std::size_t count, std::uint64_t seed,
                              double gap) {
  const auto& t = pair.breakpoints;
  const std::array<std::array<double, 2>, 5> regimes{{{t[0] - gap, t[0]},
                                                       {t[0], t[1]},
                                                       {t[1], t[2]},
                                                       {t[2], t[3]},
                                                       {t[3], t[3] + kTwoPi}}};
  std::mt19937_64 gen(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = regimes[i % 5];
    std::uniform_real_distribution<double> u(r[0], r[1]);
    const double tau = u(gen);
    out.push_back(end_point(tau, gen));
  }
  return out;
}

VerificationReport volume_identity_check(const CutoffPair& pair, const KTChart& kt,
                                         std::size_t samples, std::uint64_t seed) {
  return volume_identity_check(pair, kt, end_form(pair, kt), samples, seed);
}

VerificationReport volume_identity_check(const CutoffPair& pair, const KTChart& kt,
                                         const DifferentialForm& beta, std::size_t samples,
                                         std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "endperiodic.volume_identity";
  r.reference = "beta'^2 = (2a k' k + 2 l mu) dtau ^ dx ^ dy ^ zeta, 2a = -c1/pi";
  r.samples = samples;
  r.threshold = 1e-9;
  const auto square = wedge(beta, beta);
  const auto volume = wedge(DifferentialForm::basis(kt.chart, {kT, kX, kY}), connection_form(kt));
  double worst = 0.0;
  double min_coeff = INFINITY;
  double min_coeff_23 = INFINITY;
  for (const auto& p : sample_end(pair, samples, seed)) {
    const auto frame = coordinate_frame4(kt.chart, p);
    const double coeff = volume_coefficient(pair, p[kT]);
    const double measured = evaluate(square, frame);
    worst = std::max(worst, std::abs(measured - coeff * evaluate(volume, frame)));
    min_coeff = std::min(min_coeff, coeff);
    if (p[kT] >= pair.breakpoints[2] && p[kT] <= pair.breakpoints[3]) {
      min_coeff_23 = std::min(min_coeff_23, coeff);
    }
  }
  const double lambda_margin = (pair.lambda - pair.scanned_max) / std::max(pair.scanned_max, 1.0);
  r.measured = worst;
  r.positivity_ok = min_coeff > 0.0 && lambda_margin >= 0.05 - 1e-12;
  r.add("c1", static_cast<long long>(pair.c1));
  r.add("volume_constant", volume_constant(pair.c1));
  r.add("mu", pair.mu);
  r.add("lambda", pair.lambda);
  r.add("lambda_bound", pair.scanned_max);
  r.add("lambda_margin", lambda_margin);
  r.add("min_coefficient", min_coeff);
  r.add("min_coefficient_T2_T3", min_coeff_23);
  r.add("certified_floor_T2_T3", 2.0 * pair.mu * (pair.lambda - pair.scanned_max));
  r.assumptions.push_back(kappa_assumption());
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

std::vector<VolumeProfileRow> volume_profile(const CutoffPair& pair, const KTChart& kt,
                                             std::size_t points, double gap) {
  const auto beta = end_form(pair, kt);
  const auto square = wedge(beta, beta);
  const auto& t = pair.breakpoints;
  std::vector<VolumeProfileRow> rows;
  for (double tau : grid(t[0] - gap, t[3] + kTwoPi, std::max<std::size_t>(points, 2))) {
    const Point p{tau, 1.0, 2.0, 3.0};
    const auto frame = coordinate_frame4(kt.chart, p);
    VolumeProfileRow row{};
    row.tau = tau;
    row.k = pair.k_at(tau);
    row.k_prime = pair.k_prime_at(tau);
    row.l = pair.l_at(tau);
    row.coefficient = volume_coefficient(pair, tau);
    row.wedge_value = evaluate(square, frame);
    row.discrepancy = std::abs(row.wedge_value - row.coefficient);
    rows.push_back(row);
  }
  return rows;
}

VerificationReport end_closedness_check(const CutoffPair& pair, const KTChart& kt,
                                        const DifferentialForm& beta, std::size_t samples,
                                        std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "endperiodic.closedness";
  r.reference = "d beta' = 0 on the end chart";
  r.samples = samples;
  r.threshold = 1e-8;
  if (beta.chart() != kt.chart) throw StructuralError("end_closedness_check: form is on the wrong chart");
  const auto d = exterior_derivative(beta);
  double worst = 0.0;
  for (const auto& p : sample_end(pair, samples, seed)) worst = std::max(worst, max_abs_coefficient(d, p));
  r.measured = worst;
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport end_periodicity_check(const CutoffPair& pair, const KTChart& kt,
                                         const DifferentialForm& beta, std::size_t samples,
                                         std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "endperiodic.periodicity";
  r.reference = "on tau >= T3 the end form is invariant under tau shifts and the Hopf flow";
  r.samples = samples;
  r.threshold = 1e-10;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> tau(pair.breakpoints[3], pair.breakpoints[3] + kTwoPi);
  std::uniform_real_distribution<double> shift(-kTwoPi, kTwoPi);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t0 = tau(gen);
    pts.push_back(end_point(t0, gen));
  }
  double tau_err = 0.0;
  for (double s : {std::numbers::pi, kTauPeriod}) {
    const auto moved = pullback(kt.tau_shift(s), beta);
    for (const auto& p : pts) tau_err = std::max(tau_err, max_coefficient_difference(moved, beta, p));
  }
  double hopf_err = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto moved = pullback(kt.hopf_shift(shift(gen)), beta);
    for (const auto& p : pts) hopf_err = std::max(hopf_err, max_coefficient_difference(moved, beta, p));
  }
  r.measured = std::max(tau_err, hopf_err);
  r.positivity_ok = tau_err < 1e-12;
  r.add("tau_shift_error", tau_err);
  r.add("tau_shift_threshold", 1e-12);
  r.add("hopf_shift_error", hopf_err);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------

TurbulizationField make_turbulization(double r0, double r1, double r2, double r_star) {
  if (!(0.0 < r0 && r0 < r1 && r1 < r2 && r2 < r_star)) {
    throw DomainError("make_turbulization: radii must satisfy 0 < r0 < r1 < r2 < r*");
  }
  TurbulizationField f;
  f.r0 = r0;
  f.r1 = r1;
  f.r2 = r2;
  f.r_star = r_star;
  f.c = std::log(std::numbers::pi) / 3.0;
  const double c = f.c;
  f.g = ScalarField::from(r_line(), [c, r0, r1](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    return T(-c * x[0] * ad::smooth_step((x[0] - r0) / (r1 - r0)));
  });
  f.h = ScalarField::from(r_line(), [r1, r2](auto x) {
    using T = std::decay_t<decltype(x[0])>;
    return T(1.0 - ad::smooth_step((x[0] - r1) / (r2 - r1)));
  });
  const auto report = turbulization_sign_check(f);
  if (!report.pass) {
    throw ConstructionError("make_turbulization: sign conditions fail on the grid");
  }
  return f;
}

VerificationReport turbulization_sign_check(const TurbulizationField& f, std::size_t n) {
  VerificationReport r;
  r.check = "endperiodic.turbulization_signs";
  r.reference = "g = 0 (r <= r0), h = 1 (r <= r1), g = -c r (r >= r1), h = 0 (r >= r2), g' < 0, h' < 0";
  r.samples = n;
  r.bound = Bound::kAbove;
  r.threshold = 0.0;
  bool equalities = true;
  for (double x : grid(1e-6, f.r_star * (1.0 - 1e-9), n)) {
    const double g = eval1(f.g, x), h = eval1(f.h, x);
    if (x <= f.r0 && g != 0.0) equalities = false;
    if (x <= f.r1 && h != 1.0) equalities = false;
    if (x >= f.r1 && std::abs(g + f.c * x) > 1e-15) equalities = false;
    if (x >= f.r2 && h != 0.0) equalities = false;
  }
  double g_margin = INFINITY, h_margin = INFINITY;
  const double sg = kShrink * (f.r_star - f.r0);
  for (double x : grid(f.r0 + sg, f.r_star - sg, n)) g_margin = std::min(g_margin, -deriv1(f.g, x));
  const double sh = kShrink * (f.r2 - f.r1);
  for (double x : grid(f.r1 + sh, f.r2 - sh, n)) h_margin = std::min(h_margin, -deriv1(f.h, x));
  r.measured = std::min(g_margin, h_margin);
  r.positivity_ok = equalities;
  r.add("g_prime_margin", g_margin);
  r.add("h_prime_margin", h_margin);
  r.add("c", f.c);
  r.finalize();
  return r;
}

PolarPoint turbulization_flow(const TurbulizationField& f, PolarPoint p, double time, double step) {
  auto inside = [&](double r) { return r > 0.0 && r < f.r_star; };
  if (!inside(p.r)) throw DomainError("turbulization_flow: start radius outside (0, r*)");
  if (time == 0.0) return p;
  const int n = static_cast<int>(std::ceil(std::abs(time) / step - 1e-9));
  const double h = time / n;
  auto rhs = [&](double r) { return std::array<double, 2>{eval1(f.g, r), eval1(f.h, r)}; };
  for (int i = 0; i < n; ++i) {
    const auto k1 = rhs(p.r);
    const auto k2 = rhs(p.r + 0.5 * h * k1[0]);
    const auto k3 = rhs(p.r + 0.5 * h * k2[0]);
    const auto k4 = rhs(p.r + h * k3[0]);
    p.r += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    p.theta += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    if (!inside(p.r)) throw DomainError("turbulization_flow: trajectory left (0, r*)");
  }
  return p;
}

double paired_tau(const TurbulizationField& f, double r, double tau2) {
  return tau2 + std::log(f.r2 / r) / f.c;
}

double measure_c0(const TurbulizationField& f, double t) {
  const auto p = turbulization_flow(f, {f.r2, 0.0}, t);
  return paired_tau(f, p.r, 0.0) - t;
}

VerificationReport leaf_identification_check(const WeightedPolynomial& poly,
                                             const TurbulizationField& f, double tau2, double c0,
                                             std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "endperiodic.leaf_identification";
  r.reference = "the time-t image of (P, r2, 0) is the end point (P, tau2 + t + c0)";
  r.samples = samples;
  r.threshold = 1e-8;
  // stay where g = -c r, i.e. above r1
  const double t_max = std::log(f.r2 / f.r1) / f.c;
  const auto link = sample_link(poly, samples, seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < link.size(); ++i) {
    const double t = t_max * static_cast<double>(i + 1) / (link.size() + 1);
    const auto img = turbulization_flow(f, {f.r2, 0.0}, t);
    const auto a = end_to_ambient(poly, make_end_point(poly, link[i], paired_tau(f, img.r, tau2)), img.theta);
    const auto b = end_to_ambient(poly, make_end_point(poly, link[i], tau2 + t + c0), img.theta);
    worst = std::max(worst, distance(a, b) / std::max(1.0, a.rho()));
  }
  r.measured = worst;
  r.add("c0", c0);
  r.add("tau2", tau2);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------

Collar make_collar(const KTChart& kt, double eps) {
  if (!(eps > 0.0)) throw DomainError("make_collar: eps must be positive");
  auto chart = make_chart(kt.chart->name + "_collar", {"tau", "x", "y", "z", "s"});
  std::vector<ScalarField> comps;
  for (int i = 0; i < 4; ++i) comps.push_back(ScalarField::coordinate(chart, i));
  return Collar{chart, ChartMap(chart, kt.chart, std::move(comps)), eps};
}

VerificationReport tameness_check(const KTChart& kt, const Collar& collar,
                                  const DifferentialForm& boundary_form,
                                  const DifferentialForm& collar_form, double tau_lo,
                                  double tau_hi, std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "endperiodic.tameness";
  r.reference = "on the collar, beta restricted to leaves is the pullback of beta on the boundary leaf";
  r.samples = samples;
  r.threshold = 1e-10;
  if (boundary_form.chart() != kt.chart || collar_form.chart() != collar.chart) {
    throw StructuralError("tameness_check: forms are on the wrong charts");
  }
  const auto pulled = pullback(collar.projection, boundary_form);
  const Mask ds = mask_of({4});
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> tau(tau_lo, tau_hi);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  std::uniform_real_distribution<double> s(0.0, collar.eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Point p{tau(gen), ang(gen), ang(gen), ang(gen), s(gen)};
    std::map<Mask, double> diff;
    for (const auto& [m, c] : collar_form.terms()) {
      if (!(m & ds)) diff[m] += c(p);
    }
    for (const auto& [m, c] : pulled.terms()) diff[m] -= c(p);
    for (const auto& [m, v] : diff) worst = std::max(worst, std::abs(v));
  }
  r.measured = worst;
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

ChartMap gluing_map(const KTChart& kt, double theta, int k, double c0) {
  return compose(kt.hopf_shift((theta + kTwoPi * k) / 3.0), kt.tau_shift(c0 + theta));
}

VerificationReport gluing_compatibility_check(const CutoffPair& pair, const KTChart& kt, double c0,
                                              std::size_t samples, std::uint64_t seed) {
  return gluing_compatibility_check(pair, kt, c0, pair.mu, samples, seed);
}

VerificationReport gluing_compatibility_check(const CutoffPair& pair, const KTChart& kt, double c0,
                                              double mu_boundary, std::size_t samples,
                                              std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "endperiodic.gluing";
  r.reference = "the twelve identifications pull beta_K back to the end form on tau >= T3";
  r.samples = samples;
  r.threshold = 1e-9;
  const auto beta = end_form(pair, kt);
  const auto boundary = kt_symplectic_form(kt, pair.lambda, mu_boundary);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> tau(pair.breakpoints[3], pair.breakpoints[3] + kTwoPi);
  double worst = 0.0;
  int maps = 0;
  for (double theta : {0.0, kTwoPi / 3.0, std::numbers::pi, 1.5 * std::numbers::pi}) {
    for (int k = 0; k < 3; ++k) {
      const auto pulled = pullback(gluing_map(kt, theta, k, c0), boundary);
      for (std::size_t i = 0; i < samples; ++i) {
        const double t0 = tau(gen);
        worst = std::max(worst, max_coefficient_difference(pulled, beta, end_point(t0, gen)));
      }
      ++maps;
    }
  }
  r.measured = worst;
  r.add("maps", static_cast<long long>(maps));
  r.add("c0", c0);
  r.add("lambda", pair.lambda);
  r.add("mu", pair.mu);
  r.add("mu_boundary", mu_boundary);
  r.assumptions.push_back(kappa_assumption());
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

std::string kappa_assumption() {
  return "kappa: a closed 2-form on the compact core extending dy ^ zeta on the end exists "
         "(cohomological extension); only the end trace is computed";
}

}  // namespace leafsym
