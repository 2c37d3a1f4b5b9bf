#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "leafsym/milnor.hpp"

using namespace leafsym;

namespace {

// Independent oracle: std::complex evaluation of the three polynomials.
std::complex<double> oracle_f(const std::string& name, const AmbientPoint& p) {
  std::complex<double> z0(p.x[0], p.x[1]), z1(p.x[2], p.x[3]), z2(p.x[4], p.x[5]);
  if (name == "E6") return std::pow(z0, 3) + std::pow(z1, 3) + std::pow(z2, 3);
  if (name == "E7") return std::pow(z0, 4) + std::pow(z1, 4) + std::pow(z2, 2);
  return std::pow(z0, 6) + std::pow(z1, 3) + std::pow(z2, 2);
}

AmbientPoint random_ambient(std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n;
  std::array<double, 6> x{};
  for (auto& v : x) v = scale * n(gen);
  return AmbientPoint(x);
}

std::vector<WeightedPolynomial> all_polys() { return {fermat_e6(), e7(), e8()}; }

}  // namespace

TEST_CASE("polynomials agree with std::complex evaluation") {
  std::mt19937_64 gen(1);
  for (const auto& f : all_polys()) {
    for (int i = 0; i < 200; ++i) {
      auto p = random_ambient(gen);
      auto v = f.eval(p.complex());
      auto o = oracle_f(f.name, p);
      CHECK(std::abs(std::complex<double>(v.re, v.im) - o) <= 1e-13 * (1 + std::abs(o)));
    }
  }
}

TEST_CASE("weighted homogeneity f(lambda . Z) = lambda^d f(Z)") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& f : all_polys()) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      auto p = random_ambient(gen);
      std::complex<double> lam(u(gen) + 1.5, u(gen));
      CxPoint<double> q;
      for (int j = 0; j < 3; ++j) {
        auto lw = std::pow(lam, f.weights[j]);
        q[j] = Cx<double>(lw.real(), lw.imag()) * p.z(j);
      }
      auto lhs = f.eval(q);
      auto fz = f.eval(p.complex());
      auto rhs = std::pow(lam, f.degree) * std::complex<double>(fz.re, fz.im);
      worst = std::max(worst, std::abs(std::complex<double>(lhs.re, lhs.im) - rhs) /
                                  (std::abs(rhs) + 1e-300));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("holomorphic gradient agrees with finite differences") {
  std::mt19937_64 gen(3);
  for (const auto& f : all_polys()) {
    auto p = random_ambient(gen);
    auto g = f.grad(p.complex());
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      auto a = p, b = p;
      a.x[2 * j] += h;
      b.x[2 * j] -= h;
      auto fd = (oracle_f(f.name, a) - oracle_f(f.name, b)) / (2 * h);
      CHECK(std::abs(fd - std::complex<double>(g[j].re, g[j].im)) < 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST_CASE("link sampling") {
  const double r = 1.0 / std::sqrt(2.0);
  AmbientPoint q(std::array<double, 6>{r, 0, -r, 0, 0, 0});
  CHECK(cabs(fermat_e6().eval(q.complex())) < 1e-15);
  CHECK(std::abs(q.rho() - 1.0) < 1e-15);

  for (const auto& f : all_polys()) {
    auto pts = sample_link(f, 1000, 42);
    REQUIRE(pts.size() == 1000);
    for (const auto& p : pts) {
      CHECK(std::abs(oracle_f(f.name, p)) < 1e-12);
      CHECK(std::abs(p.rho() - 1.0) < 1e-12);
      for (int j = 0; j < 3; ++j) CHECK(cabs(p.z(j)) >= 1e-3);
    }
    auto again = sample_link(f, 1000, 42);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i].x == again[i].x);
  }
  CHECK_THROWS_AS(sample_link(fermat_e6(), 0, 1), DomainError);
}

TEST_CASE("Newton projection") {
  auto f = fermat_e6();
  AmbientPoint e0(std::array<double, 6>{1, 0, 0, 0, 0, 0});
  auto same = newton_project_to_fiber(f, e0, Cx<double>(1.0));
  CHECK(same.x == e0.x);

  std::mt19937_64 gen(5);
  for (int i = 0; i < 200; ++i) {
    auto p = random_ambient(gen);
    const Cx<double> w(0.3, -0.2);
    auto q = newton_project_to_fiber(f, p, w);
    CHECK(cabs(f.eval(q.complex()) - w) < 1e-12 * std::max(1.0, f.magnitude(q.complex())));
    auto q2 = newton_project_to_fiber(f, q, w);
    CHECK(distance(q, q2) < 1e-10);
  }
  AmbientPoint origin;
  CHECK_THROWS_AS(newton_project_to_fiber(f, origin, Cx<double>(1.0)), DomainError);
}

TEST_CASE("Newton correction from F_0 to F_1 decays like rho^-2") {
  auto f = fermat_e6();
  auto link = sample_link(f, 50, 9);
  std::vector<double> radii{10, 20, 40, 80}, corr;
  for (double rho : radii) {
    double worst = 0.0;
    for (const auto& p : link) {
      AmbientPoint z = weighted_scale(f, rho, p);
      worst = std::max(worst, distance(z, newton_project_to_fiber(f, z, Cx<double>(1.0))));
    }
    corr.push_back(worst);
  }
  CHECK(loglog_slope(radii, corr) == doctest::Approx(-2.0).epsilon(0.02));
}

TEST_CASE("Hopf action") {
  std::mt19937_64 gen(6);
  for (const auto& f : all_polys()) {
    auto p = random_ambient(gen);
    CHECK(distance(hopf_action(f, kTwoPi, p), p) < 1e-13);
    auto a = hopf_action(f, 0.4, hopf_action(f, 1.1, p));
    CHECK(distance(a, hopf_action(f, 1.5, p)) < 1e-12);
    CHECK(std::abs(hopf_action(f, 0.9, p).rho() - p.rho()) < 1e-13);
    // monodromy: t = 2 pi / d preserves each fibre
    auto q = newton_project_to_fiber(f, p, Cx<double>(1.0));
    auto fq = f.eval(hopf_action(f, kTwoPi / f.degree, q).complex());
    CHECK(cabs(fq - Cx<double>(1.0)) < 1e-11 * f.magnitude(q.complex()));
    // general t: F_w -> F_{e^{idt} w}
    auto ft = f.eval(hopf_action(f, 0.7, q).complex());
    CHECK(cabs(ft - expi(0.7 * f.degree)) < 1e-11 * f.magnitude(q.complex()));
  }
}

TEST_CASE("end_to_ambient") {
  auto f = fermat_e6();
  auto link = sample_link(f, 100, 12);
  for (const auto& b : link) {
    auto e = make_end_point(f, b, 4.0);
    auto a0 = end_to_ambient(f, e, 0.0);
    auto a1 = end_to_ambient(f, e, kTwoPi);
    CHECK(distance(a0, a1) < 1e-12 * a0.rho());
    const double theta = 0.8;
    auto z = end_to_ambient(f, e, theta);
    const double rho = z.rho();
    CHECK(cabs(f.eval(z.complex()) - expi(theta)) / (rho * rho * rho) < 1e-10);
    // Z/3 equivariance
    auto h = hopf_action(f, kTwoPi / 3, b);
    auto lhs = end_to_ambient(f, make_end_point(f, h, 4.0), theta);
    auto rhs = hopf_action(f, kTwoPi / 3, z);
    CHECK(distance(lhs, rhs) < 1e-12 * rho);
  }
  CHECK_THROWS_AS(end_to_ambient(f, make_end_point(f, link[0], 1.0), 0.0), DomainError);
}

TEST_CASE("graph offset and tubular projection are inverse") {
  for (const auto& f : all_polys()) {
    auto pts = sample_fiber_band(f, 100, 21, 1.0, kEPi);
    const Cx<double> w(std::pow(4.0, -f.degree), 0.0);
    for (const auto& p : pts) {
      CHECK(std::abs(p.rho() - 1.0) >= -1e-12);
      auto q = graph_point(f, p, w);
      CHECK(cabs(f.eval(q.complex()) - w) < 1e-15 * std::max(1.0, f.magnitude(q.complex())) * 10);
      auto tc = tubular_project(f, q);
      CHECK(distance(tc.base, p) < 1e-12 * p.rho());
    }
  }
}

TEST_CASE("graph offset derivative by duals agrees with finite differences") {
  using ad::D1;
  auto f = fermat_e6();
  auto p = sample_fiber_band(f, 1, 3, 1.5, 1.5)[0];
  const Cx<double> w(1.0 / 64, 0.0);
  for (int i = 0; i < 6; ++i) {
    std::array<D1, 6> x;
    for (int k = 0; k < 6; ++k) x[k] = D1(p.x[k], k == i ? 1.0 : 0.0);
    auto s = graph_offset(f, to_complex<D1>(std::span<const D1>(x.data(), 6)), lift<D1>(w));
    const double h = 1e-6;
    auto a = p, b = p;
    a.x[i] += h;
    b.x[i] -= h;
    auto sa = graph_offset(f, a.complex(), w);
    auto sb = graph_offset(f, b.complex(), w);
    CHECK(s.re.d == doctest::Approx((sa.re - sb.re) / (2 * h)).epsilon(1e-5));
    CHECK(s.im.d == doctest::Approx((sa.im - sb.im) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("Milnor regularity in the tube for all three polynomials") {
  for (const auto& f : all_polys()) {
    auto r = milnor_regularity_check(f, {}, 10000, 8);
    CHECK(r.pass);
    CHECK(r.samples == 10000);
    // d arg f along the weighted Hopf direction is d, so the norm is at least d / max w.
    CHECK(r.measured >= f.degree / 3.0 - 1e-12);
  }
}

TEST_CASE("Milnor regularity fault: a fibre value shifted to create a critical point") {
  // arg(f - c) with c = sqrt(1 + 1e-6): at Q = (e^{i phi}, 0, 0), grad f is
  // complex-radial, and cos(3 phi) = 1/c makes d arg(f - c) vanish along the
  // Hopf direction as well, with |f - c| = 1e-3 inside the band.
  auto f = fermat_e6();
  const double c = std::sqrt(1.0 + 1e-6);
  f.monomials.push_back({-c, {0, 0, 0}});
  const double phi = std::acos(1.0 / c) / 3.0;
  AmbientPoint q(std::array<double, 6>{std::cos(phi), std::sin(phi), 0, 0, 0, 0});
  CHECK(cabs(f.eval(q.complex())) == doctest::Approx(1e-3).epsilon(1e-6));
  auto r = milnor_regularity_check(f, {}, std::vector<AmbientPoint>{q}, 1e-4);
  CHECK(r.samples == 1);
  CHECK_FALSE(r.pass);
  CHECK(r.measured < 1e-6);
}

TEST_CASE("convergence law") {
  auto f = fermat_e6();
  auto series = convergence_series(f, 1000, 17);
  CHECK(series.slope == doctest::Approx(-3.0).epsilon(0.1));
  auto r = convergence_law_check(f, series);
  CHECK(r.pass);
  for (const auto& g : {e7(), e8()}) CHECK(convergence_law_check(g, 200, 4).pass);

  auto bad = series;
  bad.displacement[2] *= 1.0 + 1e-6;
  bad.displacement[3] = bad.displacement[2] * (1 + 1e-6);
  CHECK_FALSE(convergence_law_check(f, bad).pass);
}
