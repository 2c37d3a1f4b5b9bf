#include "leafsym/nil.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace leafsym {

namespace {

constexpr int kT = 0;  // KT chart indices
constexpr int kX = 1;
constexpr int kY = 2;
constexpr int kZ = 3;

// gamma1 on the cover.  Derivation of the shear s in z -> z + s y:
//   gamma1^* zeta = d(z + s y) + a (x + 2pi) dy = dz + a x dy + (s + 2 pi a) dy,
// invariant iff s = -2 pi a = c1.
ChartMap gamma1(const ChartRef& c, int c1, int offset) {
  std::vector<ScalarField> comps;
  for (int i = 0; i < c->dim(); ++i) comps.push_back(ScalarField::coordinate(c, i));
  comps[offset] = comps[offset] + ScalarField::constant(c, kTwoPi);
  comps[offset + 2] = comps[offset + 2] + static_cast<double>(c1) * comps[offset + 1];
  return ChartMap(c, c, std::move(comps));
}

std::vector<double> unit_offset(int dim, int index, double amount) {
  std::vector<double> v(dim, 0.0);
  v[index] = amount;
  return v;
}

DifferentialForm zeta_on(const ChartRef& c, double a, int x, int y, int z) {
  return DifferentialForm::basis(c, {z}) +
         (a * ScalarField::coordinate(c, x)) * DifferentialForm::basis(c, {y});
}

std::vector<double> fixed_sample_vector(std::mt19937_64& gen, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = u(gen);
  return v;
}

}  // namespace

NilChart make_nil_chart(int c1) {
  NilChart n;
  n.c1 = c1;
  n.chart = make_chart(fmt::format("nil({})", c1), {"x", "y", "z"});
  n.deck.push_back(gamma1(n.chart, c1, 0));
  n.deck.push_back(ChartMap::translation(n.chart, unit_offset(3, 1, kTwoPi)));
  n.deck.push_back(ChartMap::translation(n.chart, unit_offset(3, 2, kTwoPi)));
  return n;
}

ChartMap KTChart::hopf_shift(double t) const {
  return ChartMap::translation(chart, unit_offset(4, kZ, t));
}

ChartMap KTChart::tau_shift(double t) const {
  return ChartMap::translation(chart, unit_offset(4, kT, t));
}

KTChart make_kt_chart(int c1) {
  KTChart k;
  k.nil = make_nil_chart(c1);
  k.chart = make_chart(fmt::format("kt({})", c1), {"tau", "x", "y", "z"});
  k.deck.push_back(k.tau_shift(kTauPeriod));
  k.deck.push_back(gamma1(k.chart, c1, kX));
  k.deck.push_back(ChartMap::translation(k.chart, unit_offset(4, kY, kTwoPi)));
  k.deck.push_back(ChartMap::translation(k.chart, unit_offset(4, kZ, kTwoPi)));
  return k;
}

DifferentialForm connection_form(const NilChart& n) { return zeta_on(n.chart, n.twist(), 0, 1, 2); }

DifferentialForm connection_form(const KTChart& k) {
  return zeta_on(k.chart, k.nil.twist(), kX, kY, kZ);
}

DifferentialForm kt_symplectic_form(const KTChart& k, double lambda, double mu) {
  if (lambda == 0.0 || mu == 0.0) {
    throw DomainError("kt_symplectic_form: lambda and mu must be nonzero");
  }
  return lambda * DifferentialForm::basis(k.chart, {kT, kX}) +
         mu * wedge(DifferentialForm::basis(k.chart, {kY}), connection_form(k));
}

double euler_class_integral(const NilChart& n, int grid) {
  return euler_class_integral(exterior_derivative(connection_form(n)), grid);
}

double euler_class_integral(const DifferentialForm& dzeta, int grid) {
  if (dzeta.degree() != 2 || dzeta.chart()->dim() != 3) {
    throw StructuralError("euler_class_integral: expects a 2-form on a 3-dimensional chart");
  }
  if (grid <= 0) throw DomainError("euler_class_integral: grid must be positive");
  const double h = kTwoPi / grid;
  const Mask dxdy = mask_of({0, 1});
  double sum = 0.0;
  Point p(3, 0.0);
  for (int i = 0; i < grid; ++i) {
    p[0] = (i + 0.5) * h;
    double row = 0.0;
    for (int j = 0; j < grid; ++j) {
      p[1] = (j + 0.5) * h;
      row += dzeta.coefficient_at(dxdy, p);
    }
    sum += row;
  }
  return sum * h * h / (-kTwoPi);
}

std::vector<Point> sample_nil_domain(int dim, std::size_t count, std::uint64_t seed,
                                     double tau_lo, double tau_hi) {
  if (dim != 3 && dim != 4) throw StructuralError("sample_nil_domain: dim must be 3 or 4");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> tau(tau_lo, tau_hi);
  std::vector<Point> out(count, Point(dim));
  for (auto& p : out) {
    int i = 0;
    if (dim == 4) p[i++] = tau(gen);
    for (; i < dim; ++i) p[i] = angle(gen);
  }
  return out;
}

// ---- reports ---------------------------------------------------------------

VerificationReport structure_equation_check(const NilChart& n, std::size_t samples,
                                            std::uint64_t seed) {
  return structure_equation_check(n, connection_form(n), samples, seed);
}

VerificationReport structure_equation_check(const NilChart& n, const DifferentialForm& zeta,
                                            std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "nil.structure_equation";
  r.reference = "dzeta(d/dx, d/dy) = -c1/(2 pi) on Nil(c1)";
  r.samples = samples;
  r.threshold = 1e-10;
  const auto dz = exterior_derivative(zeta);
  const double expected = n.twist();
  double worst = 0.0;
  for (const auto& p : sample_nil_domain(3, samples, seed)) {
    auto frame = coordinate_frame(n.chart, p);
    const TangentVector pair[2] = {frame[0], frame[1]};
    worst = std::max(worst, std::abs(evaluate(dz, pair) - expected));
  }
  r.measured = worst;
  r.add("c1", static_cast<long long>(n.c1));
  r.add("expected", expected);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport euler_class_check(const NilChart& n) {
  return euler_class_check(n, exterior_derivative(connection_form(n)));
}

VerificationReport euler_class_check(const NilChart& n, const DifferentialForm& dzeta) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "nil.euler_class";
  r.reference = "integral of dzeta / (-2 pi) over the base torus equals c1";
  const int grid = 512;
  r.samples = static_cast<std::size_t>(grid) * grid;
  r.threshold = 1e-6;
  const double value = euler_class_integral(dzeta, grid);
  r.measured = std::abs(value - n.c1);
  r.add("c1", static_cast<long long>(n.c1));
  r.add("integral", value);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport contact_check(const NilChart& n, std::size_t samples, std::uint64_t seed) {
  return contact_check(n, connection_form(n), samples, seed);
}

VerificationReport contact_check(const NilChart& n, const DifferentialForm& zeta,
                                 std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "nil.contact";
  r.reference = "zeta ^ dzeta is a nowhere-vanishing 3-form of constant sign";
  r.samples = samples;
  r.bound = Bound::kAbove;
  r.threshold = 0.0;
  const auto vol = wedge(zeta, exterior_derivative(zeta));
  double lo = INFINITY;
  double hi = -INFINITY;
  double min_abs = INFINITY;
  for (const auto& p : sample_nil_domain(3, samples, seed)) {
    const double v = evaluate(vol, coordinate_frame(n.chart, p));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    min_abs = std::min(min_abs, std::abs(v));
  }
  const bool fixed_sign = (lo > 0.0 && hi > 0.0) || (lo < 0.0 && hi < 0.0);
  const double spread = hi - lo;
  r.measured = min_abs;
  r.positivity_ok = fixed_sign && spread < 1e-10;
  r.add("c1", static_cast<long long>(n.c1));
  r.add("min_value", lo);
  r.add("max_value", hi);
  r.add("spread", spread);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport kt_closedness_check(const KTChart& k, const DifferentialForm& beta,
                                       std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "nil.kt_closedness";
  r.reference = "d beta = 0 for beta = lambda dtau^dx + mu dy^zeta";
  r.samples = samples;
  r.threshold = 1e-8;
  const auto d = exterior_derivative(beta);
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  double worst = 0.0;
  for (const auto& p : sample_nil_domain(4, samples, seed)) {
    std::vector<TangentVector> frame;
    for (int i = 0; i < 3; ++i) frame.emplace_back(k.chart, p, fixed_sample_vector(gen, 4));
    worst = std::max(worst, std::abs(evaluate(d, frame)));
  }
  r.measured = worst;
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport kt_nondegeneracy_check(const KTChart& k, const DifferentialForm& beta,
                                          double lambda, double mu, std::size_t samples,
                                          std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "nil.kt_nondegeneracy";
  r.reference = "Pf(beta) on (d/dtau, d/dx, d/dy, d/dz) is constant, equal to lambda mu";
  r.samples = samples;
  r.bound = Bound::kAbove;
  // Frame (d/dtau, d/dx, d/dy, d/dz): zeta(d/dz) = 1, so the frame constant is 1.
  const double floor = 0.9 * std::abs(lambda * mu);
  r.threshold = floor;
  double lo = INFINITY;
  double hi = -INFINITY;
  double min_abs = INFINITY;
  for (const auto& p : sample_nil_domain(4, samples, seed)) {
    const double v = pfaffian4(beta, p, coordinate_frame(k.chart, p));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    min_abs = std::min(min_abs, std::abs(v));
  }
  r.measured = min_abs;
  r.positivity_ok = (hi - lo) < 1e-10 && ((lo > 0.0) == (hi > 0.0)) && lo != 0.0;
  r.add("lambda_mu", lambda * mu);
  r.add("min_pfaffian", lo);
  r.add("max_pfaffian", hi);
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

VerificationReport kt_invariance_check(const KTChart& k, const DifferentialForm& beta,
                                       std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerificationReport r;
  r.check = "nil.kt_invariance";
  r.reference = "beta is invariant under the deck group and the Hopf flow";
  r.samples = samples;
  r.threshold = 1e-10;
  std::vector<ChartMap> maps = k.deck;
  for (double t : {0.3, 1.0, -2.5}) maps.push_back(k.hopf_shift(t));
  std::vector<DifferentialForm> pulled;
  for (const auto& m : maps) pulled.push_back(pullback(m, beta));
  double worst = 0.0;
  for (const auto& p : sample_nil_domain(4, samples, seed)) {
    for (const auto& q : pulled) worst = std::max(worst, max_coefficient_difference(q, beta, p));
  }
  r.measured = worst;
  r.add("maps", static_cast<long long>(maps.size()));
  r.finalize();
  r.wall_time = clock.seconds();
  return r;
}

}  // namespace leafsym
