#pragma once

// The end-periodic leafwise form on the product end N' x (T, oo) of a leaf:
//   beta' = d(k(tau) zeta) + l(tau) dtau ^ dx + mu dy ^ zeta,
// the turbulization field near the boundary leaf, and the tameness and
// gluing checks that tie the end to the Kodaira-Thurston form on K.
//
// With zeta = dz + a x dy (a = -c1 / 2 pi) a hand expansion gives
//   beta'^2 = 2 (a k' k + l mu) dtau ^ dx ^ dy ^ zeta,
// so the k' k constant is 2a (= 9/pi on Nil(-9)).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "leafsym/exterior.hpp"
#include "leafsym/milnor.hpp"
#include "leafsym/nil.hpp"
#include "leafsym/report.hpp"

namespace leafsym {

/// The tau line as a one-dimensional chart.
ChartRef tau_line();

/// The k' k constant of the volume identity, 2a = -c1 / pi.
double volume_constant(int c1);

struct CutoffPair {
  ScalarField k = ScalarField::constant(tau_line(), 0.0);
  ScalarField l = ScalarField::constant(tau_line(), 0.0);
  std::array<double, 4> breakpoints{};  // T0 < T1 < T2 < T3
  double mu = 0.0;
  double lambda = 0.0;
  int c1 = 0;               // Euler number of the end's nil-manifold
  double scanned_max = 0.0;  // max of -C k' k / (2 mu) on [T2, T3], C = volume_constant(c1)
  bool certified = false;

  double k_at(double tau) const;
  double k_prime_at(double tau) const;
  double l_at(double tau) const;
};

/// k = e^tau (1 - step((tau - T2)/(T3 - T2))), l = lambda step((tau - T1)/(T2 - T1)),
/// lambda = 1.05 max(scan, 1).  The sign conditions are asserted on a 10^4 grid
/// (strict ones on intervals shrunk by 5% at each end); ConstructionError names
/// the failing interval.  DomainError for mu <= 0 or unordered breakpoints.
CutoffPair build_cutoffs(double mu, const std::array<double, 4>& breakpoints, int c1 = -9);

/// lambda against the scanned bound: measured (lambda - scan) / max(scan, 1),
/// pass iff >= 5% and the pair is certified.
VerificationReport cutoff_certificate_check(const CutoffPair& pair);

/// max of -C k' k / (2 mu) over [T2, T3]: 10^4 grid then golden-section refinement.
double scan_lambda_bound(const ScalarField& k, double t2, double t3, double constant, double mu);

/// The cutoff fields pulled back to the (tau, x, y, z) chart.
ScalarField on_end(const KTChart& kt, const ScalarField& cutoff);

/// d(k zeta) + l dtau ^ dx + mu dy ^ zeta on kt.chart.  StructuralError if the
/// pair is not certified or kt has a different Euler number.
DifferentialForm end_form(const CutoffPair& pair, const KTChart& kt);

/// 2a k' k + 2 l mu.
double volume_coefficient(const CutoffPair& pair, double tau);

/// Samples of the end chart stratified over the five tau regimes
/// [T0 - gap, T0], [T0, T1], [T1, T2], [T2, T3], [T3, T3 + 2 pi].
std::vector<Point> sample_end(const CutoffPair& pair, std::size_t count, std::uint64_t seed,
                              double gap = 1.0);

/// beta'^2 on (d/dtau, d/dx, d/dy, d/dz) against the closed-form coefficient.
/// Pass iff discrepancy < 1e-9, min coefficient > 0 and the certified lambda
/// clears the scanned bound by >= 5%.
VerificationReport volume_identity_check(const CutoffPair& pair, const KTChart& kt,
                                         std::size_t samples, std::uint64_t seed);
VerificationReport volume_identity_check(const CutoffPair& pair, const KTChart& kt,
                                         const DifferentialForm& beta, std::size_t samples,
                                         std::uint64_t seed);

struct VolumeProfileRow {
  double tau, k, k_prime, l, coefficient, wedge_value, discrepancy;
};
std::vector<VolumeProfileRow> volume_profile(const CutoffPair& pair, const KTChart& kt,
                                             std::size_t points, double gap = 1.0);

/// |d beta'| at stratified samples; pass iff < 1e-8.
VerificationReport end_closedness_check(const CutoffPair& pair, const KTChart& kt,
                                        const DifferentialForm& beta, std::size_t samples,
                                        std::uint64_t seed);

/// On {tau >= T3}: pullback under tau -> tau + pi and tau -> tau + kTauPeriod
/// (1e-12) and under z -> z + t for 10 seeded t (1e-10).
VerificationReport end_periodicity_check(const CutoffPair& pair, const KTChart& kt,
                                         const DifferentialForm& beta, std::size_t samples,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Turbulization

ChartRef r_line();

struct TurbulizationField {
  ScalarField g = ScalarField::constant(r_line(), 0.0);
  ScalarField h = ScalarField::constant(r_line(), 0.0);
  double r0 = 0.01, r1 = 0.02, r2 = 0.03, r_star = 0.05;
  double c = 0.0;  // log(pi) / 3
};

/// g = -c r step((r - r0)/(r1 - r0)), h = 1 - step((r - r1)/(r2 - r1)).
/// Sign conditions asserted on a 10^4 grid; ConstructionError otherwise.
TurbulizationField make_turbulization(double r0 = 0.01, double r1 = 0.02, double r2 = 0.03,
                                      double r_star = 0.05);

/// Grid report of the sign conditions; measured is the smallest strict margin.
VerificationReport turbulization_sign_check(const TurbulizationField& field,
                                            std::size_t grid = 10000);

struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;
};

/// RK4 for (r', theta') = (g(r), h(r)), step 1e-3.  DomainError if r leaves (0, r*).
PolarPoint turbulization_flow(const TurbulizationField& field, PolarPoint start, double time,
                              double step = 1e-3);

/// The end parameter paired with a collar radius: tau(r) = tau2 + log(r2 / r) / c.
double paired_tau(const TurbulizationField& field, double r, double tau2);

/// c0 in tau(r(t)) = tau2 + t + c0 for the flow from (r2, 0), measured at t.
double measure_c0(const TurbulizationField& field, double t = 1.0);

/// Frozen value of c0 (measured once with the default field).
inline constexpr double kFrozenC0 = 0.0;

/// For t on [0, t_max], compares end_to_ambient at the paired tau of the flow
/// image with end_to_ambient at (P, tau2 + t + c0), same angle.  Pass iff < 1e-8.
VerificationReport leaf_identification_check(const WeightedPolynomial& f,
                                             const TurbulizationField& field, double tau2,
                                             double c0, std::size_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Tameness and gluing

/// K x [0, eps) with coordinates (tau, x, y, z, s) and the projection to K.
struct Collar {
  ChartRef chart;
  ChartMap projection;
  double eps = 0.0;
};
Collar make_collar(const KTChart& kt, double eps);

/// Compares the leaf restriction (no ds terms) of collar_form with
/// Pr^* boundary_form at samples with tau in [tau_lo, tau_hi], s in [0, eps).
/// Pass iff < 1e-10.
VerificationReport tameness_check(const KTChart& kt, const Collar& collar,
                                  const DifferentialForm& boundary_form,
                                  const DifferentialForm& collar_form, double tau_lo,
                                  double tau_hi, std::size_t samples, std::uint64_t seed);

/// (tau, x, y, z) -> (tau + c0 + theta, x, y, z + (theta + 2 k pi) / 3).
ChartMap gluing_map(const KTChart& kt, double theta, int k, double c0);

/// For theta in {0, 2pi/3, pi, 3pi/2} and k in {0, 1, 2}: pullback of
/// beta_K(lambda, mu_k) under gluing_map equals the end form on {tau >= T3}.
/// Pass iff < 1e-9.
VerificationReport gluing_compatibility_check(const CutoffPair& pair, const KTChart& kt,
                                              double c0, std::size_t samples, std::uint64_t seed);
VerificationReport gluing_compatibility_check(const CutoffPair& pair, const KTChart& kt,
                                              double c0, double mu_boundary, std::size_t samples,
                                              std::uint64_t seed);

/// Assumption carried by the end reports: the class kappa is only represented
/// by its end trace dy ^ zeta.
std::string kappa_assumption();

}  // namespace leafsym
