#include <cmath>
#include <random>

#include "doctest.h"
#include "leafsym/dual.hpp"

namespace ad = leafsym::ad;
using ad::D1;
using ad::D2;
using ad::D3;
using ad::ipow;
using ad::smooth_step;
using ad::variable;

namespace {

template <class T>
T composite(const T& x) {
  return ad::exp(ad::sin(x) * x) / (2.0 + ad::cos(3.0 * x)) + ad::log(1.5 + x * x) * ad::sqrt(2.0 + x);
}

template <class T>
T bumpy(const T& x) {
  return smooth_step(T(0.5 * (x + 1.0))) * ad::exp(x) + smooth_step(x);
}

double central_difference(double (*f)(const double&), double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("dual arithmetic follows the product and quotient rules") {
  D1 x = variable(2.0);
  D1 y = x * x * x - 4.0 / x;
  CHECK(y.v == doctest::Approx(8.0 - 2.0));
  CHECK(y.d == doctest::Approx(12.0 + 1.0));
}

TEST_CASE("dual derivatives agree with central differences") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen);
    const double exact = composite(variable(x)).d;
    const double fd = central_difference(&composite<double>, x);
    CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("nested duals give exact second derivatives") {
  // d^2/dx^2 of x^3 e^x = (x^3 + 6x^2 + 6x) e^x
  const double x0 = 0.7;
  D2 x(D1(x0, 1.0), D1(1.0, 0.0));
  D2 y = ipow(x, 3) * ad::exp(x);
  const double expected = (x0 * x0 * x0 + 6 * x0 * x0 + 6 * x0) * std::exp(x0);
  CHECK(y.d.d == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("smooth step: limits, symmetry and monotonicity") {
  CHECK(smooth_step(-0.5) == 0.0);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(1.7) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  double prev = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double t = i / 1000.0;
    const double s = smooth_step(t);
    CHECK(s >= prev);
    CHECK(s + smooth_step(1.0 - t) == doctest::Approx(1.0).epsilon(1e-14));
    prev = s;
  }
}

TEST_CASE("smooth step dual rule agrees with central differences away from gluing points") {
  for (int i = 1; i < 400; ++i) {
    const double x = -0.99 + i * (1.98 / 400.0);
    if (std::abs(x) < 0.02 || std::abs(x - 1.0) < 0.02 || std::abs(x + 1.0) < 0.02) continue;
    const double exact = bumpy(variable(x)).d;
    const double fd = central_difference(&bumpy<double>, x);
    CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("smooth step derivatives stay finite near the flat region") {
  for (double t : {1e-3, 2e-3, 0.01, 0.99, 0.998}) {
    D3 x(D2(D1(t, 1.0), D1(1.0, 0.0)), D2(D1(1.0, 0.0), D1(0.0, 0.0)));
    D3 y = smooth_step(x);
    CHECK(std::isfinite(y.v.v.v));
    CHECK(std::isfinite(y.d.v.v));
    CHECK(std::isfinite(y.d.d.v));
    CHECK(std::isfinite(y.d.d.d));
  }
}
