#include <cmath>
#include <numbers>

#include "doctest.h"
#include "leafsym/exterior.hpp"
#include "test_support.hpp"

using namespace leafsym;
using leafsym::testing::max_coefficient_difference;
using leafsym::testing::random_form;
using leafsym::testing::random_frame;
using leafsym::testing::random_point;

namespace {

constexpr double kPi = std::numbers::pi;

ChartRef end_chart() { return make_chart("end", {"tau", "x", "y", "z"}); }

// zeta_N = dz + (3/2pi) x dy on (tau, x, y, z)
DifferentialForm zeta_n(const ChartRef& c) {
  DifferentialForm z = DifferentialForm::basis(c, {3});
  z += (3.0 / (2.0 * kPi) * ScalarField::coordinate(c, 1)) * DifferentialForm::basis(c, {2});
  return z;
}

ScalarField exp_tau(const ChartRef& c) {
  return ScalarField::from(c, [](auto x) { return leafsym::ad::exp(x[0]); });
}

}  // namespace

TEST_CASE("wedge: repeated index vanishes") {
  auto c = make_chart("R2", {"x", "y"});
  auto dx = DifferentialForm::basis(c, {0});
  CHECK(wedge(dx, dx).is_zero());
  CHECK(DifferentialForm::basis(c, {1, 1}).is_zero());
}

TEST_CASE("wedge: square of lambda dtau^dx + mu dy^zeta is 2 lambda mu vol") {
  auto c = make_chart("tau-x-y-zeta", {"tau", "x", "y", "zeta"});
  const double lambda = 1.7, mu = -0.3;
  auto beta = lambda * DifferentialForm::basis(c, {0, 1}) + mu * DifferentialForm::basis(c, {2, 3});
  auto sq = wedge(beta, beta);
  REQUIRE(sq.terms().size() == 1);
  Point p{0.1, 0.2, 0.3, 0.4};
  CHECK(sq.coefficient_at(mask_of({0, 1, 2, 3}), p) == doctest::Approx(2 * lambda * mu));
}

TEST_CASE("wedge: d(e^tau zeta_N) does not interact with dy^zeta_N") {
  auto c = end_chart();
  auto z = zeta_n(c);
  auto beta = exp_tau(c) * wedge(DifferentialForm::basis(c, {0}), z) +
              (3.0 / (2.0 * kPi) * exp_tau(c)) * DifferentialForm::basis(c, {1, 2});
  auto product = wedge(beta, wedge(DifferentialForm::basis(c, {2}), z));
  auto gen = leafsym::testing::rng(3);
  for (int i = 0; i < 200; ++i) {
    auto p = random_point(gen, 4);
    CHECK(std::abs(product.coefficient_at(mask_of({0, 1, 2, 3}), p)) < 1e-12);
  }
}

TEST_CASE("exterior derivative: constants and the Heisenberg structure equation") {
  auto c = make_chart("heis", {"xb", "yb", "zb"});
  CHECK(exterior_derivative(DifferentialForm::scalar(ScalarField::constant(c, 4.0))).is_zero());

  // d(dz + x dy) = dx ^ dy
  auto zeta = DifferentialForm::basis(c, {2}) +
              ScalarField::coordinate(c, 0) * DifferentialForm::basis(c, {1});
  auto dz = exterior_derivative(zeta);
  REQUIRE(dz.terms().size() == 1);
  auto coeff = dz.coefficient(mask_of({0, 1}));
  REQUIRE(coeff.has_value());
  REQUIRE(coeff->constant_value().has_value());
  CHECK(*coeff->constant_value() == 1.0);
}

TEST_CASE("exterior derivative: d(e^tau zeta_N) on the end chart") {
  auto c = end_chart();
  auto z = zeta_n(c);
  auto lhs = exterior_derivative(exp_tau(c) * z);
  auto rhs = exp_tau(c) * wedge(DifferentialForm::basis(c, {0}), z) +
             (3.0 / (2.0 * kPi) * exp_tau(c)) * DifferentialForm::basis(c, {1, 2});
  auto gen = leafsym::testing::rng(11);
  for (int i = 0; i < 500; ++i) {
    auto p = random_point(gen, 4);
    CHECK(max_coefficient_difference(lhs, rhs, p) < 1e-12 * std::exp(std::abs(p[0])) * 10);
  }
}

TEST_CASE("pullback: identity and tau translation") {
  auto c = end_chart();
  auto z = zeta_n(c);
  const double lambda = 10.0, mu = 0.05;
  auto beta = lambda * DifferentialForm::basis(c, {0, 1}) + mu * wedge(DifferentialForm::basis(c, {2}), z);
  auto id = pullback(ChartMap::identity(c), beta);
  auto shifted = pullback(ChartMap::translation(c, {0.83, 0.0, 0.0, 0.0}), beta);
  auto gen = leafsym::testing::rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto p = random_point(gen, 4);
    CHECK(max_coefficient_difference(id, beta, p) == 0.0);
    CHECK(max_coefficient_difference(shifted, beta, p) < 1e-14);
  }
}

TEST_CASE("pullback: Heisenberg lattice generator preserves the invariant form") {
  // (xb, yb, zb) -> (xb + 1, yb, zb - yb); pullback of dz + x dy is dz - dy + (x+1) dy.
  auto c = make_chart("heis", {"xb", "yb", "zb"});
  auto x = ScalarField::coordinate(c, 0);
  auto y = ScalarField::coordinate(c, 1);
  auto z = ScalarField::coordinate(c, 2);
  auto one = ScalarField::constant(c, 1.0);
  ChartMap gamma1(c, c, {x + one, y, z - y});
  auto zeta = DifferentialForm::basis(c, {2}) + x * DifferentialForm::basis(c, {1});
  auto pulled = pullback(gamma1, zeta);
  auto gen = leafsym::testing::rng(9);
  for (int i = 0; i < 1000; ++i) {
    auto p = random_point(gen, 3, -5.0, 5.0);
    CHECK(max_coefficient_difference(pulled, zeta, p) < 1e-13);
  }
}

TEST_CASE("evaluate: basic values and antisymmetry") {
  auto c = make_chart("R2", {"x", "y"});
  Point p{0.3, -0.2};
  auto ex = TangentVector::coordinate(c, p, 0);
  auto ey = TangentVector::coordinate(c, p, 1);
  const TangentVector one[1] = {ex};
  CHECK(evaluate(DifferentialForm::basis(c, {0}), one) == 1.0);
  const TangentVector swapped[2] = {ey, ex};
  CHECK(evaluate(DifferentialForm::basis(c, {0, 1}), swapped) == -1.0);

  auto e = end_chart();
  auto dzeta = exterior_derivative(zeta_n(e));
  Point q{0.0, 1.0, 2.0, 3.0};
  const TangentVector xy[2] = {TangentVector::coordinate(e, q, 1), TangentVector::coordinate(e, q, 2)};
  CHECK(evaluate(dzeta, xy) == doctest::Approx(3.0 / (2.0 * kPi)).epsilon(1e-15));
}

TEST_CASE("evaluate: structural errors") {
  auto c = make_chart("R2", {"x", "y"});
  auto other = make_chart("R2b", {"u", "v"});
  const TangentVector mismatch[2] = {TangentVector::coordinate(c, {0.0, 0.0}, 0),
                                     TangentVector::coordinate(c, {1.0, 0.0}, 1)};
  CHECK_THROWS_AS(evaluate(DifferentialForm::basis(c, {0, 1}), mismatch), StructuralError);
  CHECK_THROWS_AS(wedge(DifferentialForm::basis(c, {0}), DifferentialForm::basis(other, {0})),
                  StructuralError);
  CHECK_THROWS_AS(pullback(ChartMap::identity(other), DifferentialForm::basis(c, {0})),
                  StructuralError);
  CHECK_THROWS_AS(make_chart("dup", {"x", "x"}), StructuralError);
  auto half = make_chart("half", {"t"}, [](std::span<const double> p) { return p[0] > 0.0; });
  CHECK_THROWS_AS(TangentVector::coordinate(half, {-1.0}, 0), DomainError);
}

TEST_CASE("pfaffian4: standard, block and degenerate forms") {
  auto c2 = make_chart("C2", {"x0", "y0", "x1", "y1"});
  auto beta = 2.0 * DifferentialForm::basis(c2, {0, 1}) + 2.0 * DifferentialForm::basis(c2, {2, 3});
  Point p{0.1, 0.2, 0.3, 0.4};
  auto frame = coordinate_frame(c2, p);
  CHECK(pfaffian4(beta, p, frame) == doctest::Approx(4.0));

  auto e = end_chart();
  const double lambda = 3.0, mu = 0.25;
  auto kt = lambda * DifferentialForm::basis(e, {0, 1}) +
            mu * wedge(DifferentialForm::basis(e, {2}), zeta_n(e));
  Point q{0.5, 1.5, -0.4, 2.0};
  // (d/dtau, d/dx, d/dy, Reeb = d/dz)
  CHECK(pfaffian4(kt, q, coordinate_frame(e, q)) == doctest::Approx(lambda * mu));
  CHECK(pfaffian4(DifferentialForm::basis(e, {0, 1}), q, coordinate_frame(e, q)) == 0.0);
}

TEST_CASE("property: d o d = 0 on random forms and on pullbacks") {
  auto gen = leafsym::testing::rng(21);
  auto c = make_chart("R4", {"a", "b", "c", "d"});
  for (int degree = 0; degree <= 2; ++degree) {
    auto form = random_form(gen, c, degree);
    auto dd = exterior_derivative(exterior_derivative(form));
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      auto p = random_point(gen, 4, -1.0, 1.0);
      auto frame = random_frame(gen, c, p, degree + 2);
      worst = std::max(worst, std::abs(evaluate(dd, frame)));
    }
    CHECK(worst < 1e-8);
  }

  // pullback along a nonlinear map R3 -> R4 then d o d
  auto src = make_chart("R3", {"u", "v", "w"});
  std::vector<ScalarField> comps;
  for (int j = 0; j < 4; ++j) comps.push_back(leafsym::testing::random_field(gen, src));
  ChartMap phi(src, c, comps);
  auto one_form = random_form(gen, c, 1);
  auto dd = exterior_derivative(exterior_derivative(pullback(phi, one_form)));
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto p = random_point(gen, 3, -1.0, 1.0);
    auto frame = random_frame(gen, src, p, 3);
    worst = std::max(worst, std::abs(evaluate(dd, frame)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("property: wedge is graded-commutative and associative") {
  auto gen = leafsym::testing::rng(33);
  auto c = make_chart("R5", {"a", "b", "c", "d", "e"});
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_form(gen, c, 1, true);
    auto b = random_form(gen, c, 2, true);
    auto e = random_form(gen, c, 1, true);
    auto ab = wedge(a, b);
    auto ba = wedge(b, a);  // (-1)^{1*2} = +1
    auto ae = wedge(a, e);
    auto ea = wedge(e, a);  // (-1)^{1*1} = -1
    auto left = wedge(wedge(a, b), e);
    auto right = wedge(a, wedge(b, e));
    for (int i = 0; i < 200; ++i) {
      auto p = random_point(gen, 5, -1.0, 1.0);
      CHECK(max_coefficient_difference(ab, ba, p) < 1e-12);
      CHECK(max_coefficient_difference(ae, -1.0 * ea, p) < 1e-12);
      CHECK(max_coefficient_difference(left, right, p) < 1e-12);
    }
  }
}

TEST_CASE("property: pullback is functorial and commutes with d") {
  auto gen = leafsym::testing::rng(44);
  auto r3 = make_chart("R3", {"u", "v", "w"});
  auto r4 = make_chart("R4", {"a", "b", "c", "d"});
  auto r2 = make_chart("R2", {"s", "t"});
  std::vector<ScalarField> phi_c, psi_c;
  for (int j = 0; j < 3; ++j) phi_c.push_back(leafsym::testing::random_field(gen, r2));
  for (int j = 0; j < 4; ++j) psi_c.push_back(leafsym::testing::random_field(gen, r3));
  ChartMap phi(r2, r3, phi_c);
  ChartMap psi(r3, r4, psi_c);
  auto form = random_form(gen, r4, 1);
  auto two = random_form(gen, r4, 2);

  auto direct = pullback(compose(psi, phi), two);
  auto staged = pullback(phi, pullback(psi, two));
  auto d_then_pull = pullback(psi, exterior_derivative(form));
  auto pull_then_d = exterior_derivative(pullback(psi, form));
  for (int i = 0; i < 300; ++i) {
    auto p2 = random_point(gen, 2, -1.0, 1.0);
    auto p3 = random_point(gen, 3, -1.0, 1.0);
    CHECK(max_coefficient_difference(direct, staged, p2) < 1e-8);
    CHECK(max_coefficient_difference(d_then_pull, pull_then_d, p3) < 1e-8);
  }
}

TEST_CASE("property: exact partials agree with central differences") {
  auto gen = leafsym::testing::rng(55);
  auto c = make_chart("R3", {"u", "v", "w"});
  for (int trial = 0; trial < 20; ++trial) {
    auto f = leafsym::testing::random_field(gen, c);
    auto p = random_point(gen, 3, -1.0, 1.0);
    for (int i = 0; i < 3; ++i) {
      auto q1 = p, q2 = p;
      q1[i] += 1e-5;
      q2[i] -= 1e-5;
      const double fd = (f(q1) - f(q2)) / 2e-5;
      const double exact = f.partial(p, i);
      CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}
