#pragma once

// Heisenberg nil-manifolds Nil^3(c1) on their universal cover, and the
// Kodaira-Thurston manifold K = N x S^1 with its leafwise symplectic form.
//
// Conventions (fixed once, tested everywhere):
//   zeta   = dz + a x dy,          a = -c1 / (2 pi)
//   d zeta = a dx ^ dy
//   gamma1 : (x, y, z) -> (x + 2 pi, y, z + c1 y)
//   gamma2 : (x, y, z) -> (x, y + 2 pi, z)
//   gamma3 : (x, y, z) -> (x, y, z + 2 pi)
// The shear in gamma1 is forced: gamma1^* zeta = dz + c1 dy + a (x + 2 pi) dy,
// which equals zeta iff c1 + 2 pi a = 0.

#include <cstdint>
#include <numbers>

#include "leafsym/constants.hpp"
#include "leafsym/exterior.hpp"
#include "leafsym/report.hpp"

namespace leafsym {

/// tau-period of K = F0/(P ~ e^{n pi} P) in tau = 2 log rho.
inline constexpr double kTauPeriod = kTwoPi;

struct NilChart {
  int c1 = 0;
  ChartRef chart;  // (x, y, z)
  std::vector<ChartMap> deck;  // gamma1, gamma2, gamma3

  double twist() const { return -static_cast<double>(c1) / kTwoPi; }
};

NilChart make_nil_chart(int c1);

struct KTChart {
  NilChart nil;
  ChartRef chart;  // (tau, x, y, z)
  std::vector<ChartMap> deck;  // tau -> tau + kTauPeriod, then the lifted nil generators

  /// Fibre rotation by angle t of the Hopf flow: z -> z + t.
  ChartMap hopf_shift(double t) const;
  /// tau -> tau + t.
  ChartMap tau_shift(double t) const;
};

KTChart make_kt_chart(int c1);

/// zeta on the (x, y, z) chart.
DifferentialForm connection_form(const NilChart& n);
/// zeta lifted to the (tau, x, y, z) chart.
DifferentialForm connection_form(const KTChart& k);

/// lambda dtau ^ dx + mu dy ^ zeta.  Throws DomainError for lambda or mu zero.
DifferentialForm kt_symplectic_form(const KTChart& k, double lambda, double mu);

/// (1 / (-2 pi)) * integral of the dx^dy coefficient of dzeta over [0, 2pi)^2,
/// midpoint rule on a grid x grid mesh (z fixed at 0).
double euler_class_integral(const NilChart& n, int grid = 512);
double euler_class_integral(const DifferentialForm& dzeta, int grid = 512);

/// Uniform samples of the fundamental domain [0, 2pi)^3 (and tau in
/// [tau_lo, tau_hi] for 4-dimensional charts).
std::vector<Point> sample_nil_domain(int dim, std::size_t count, std::uint64_t seed,
                                     double tau_lo = -4.0, double tau_hi = 4.0);

// ---- reports ---------------------------------------------------------------

/// dzeta(d/dx, d/dy) = -c1/(2pi) at every sample, absolute 1e-10.
VerificationReport structure_equation_check(const NilChart& n, std::size_t samples,
                                            std::uint64_t seed);
VerificationReport structure_equation_check(const NilChart& n, const DifferentialForm& zeta,
                                            std::size_t samples, std::uint64_t seed);

/// euler_class_integral equals c1 within 1e-6.
VerificationReport euler_class_check(const NilChart& n);
VerificationReport euler_class_check(const NilChart& n, const DifferentialForm& dzeta);

/// zeta ^ dzeta on (d/dx, d/dy, d/dz) is a nonzero constant of fixed sign.
VerificationReport contact_check(const NilChart& n, std::size_t samples, std::uint64_t seed);
VerificationReport contact_check(const NilChart& n, const DifferentialForm& zeta,
                                 std::size_t samples, std::uint64_t seed);

/// d beta = 0, residual below 1e-8 on random 3-frames.
VerificationReport kt_closedness_check(const KTChart& k, const DifferentialForm& beta,
                                       std::size_t samples, std::uint64_t seed);

/// Pf(beta) on (d/dtau, d/dx, d/dy, d/dz) is constant (1e-10) and
/// |Pf| >= 0.9 |lambda mu|.
VerificationReport kt_nondegeneracy_check(const KTChart& k, const DifferentialForm& beta,
                                          double lambda, double mu, std::size_t samples,
                                          std::uint64_t seed);

/// Pullback under every deck generator and under z-translations equals the
/// form, coefficientwise 1e-10.
VerificationReport kt_invariance_check(const KTChart& k, const DifferentialForm& beta,
                                       std::size_t samples, std::uint64_t seed);

}  // namespace leafsym
