#pragma once

// The convex symplectic structure of C^3 and of the fibres F_w:
//   beta*   = 2 sum_j dx_j ^ dy_j
//   lambda* = sum_j (x_j dy_j - y_j dx_j),      d lambda* = beta*
//   X       = (1/2) sum_j (x_j d/dx_j + y_j d/dy_j),   i_X beta* = lambda*
// On a fibre the Liouville field is the Hermitian projection of X onto T F_w:
// T F_w is complex, so its beta*-orthogonal is its Hermitian orthogonal.

#include <array>
#include <cstdint>
#include <vector>

#include "leafsym/exterior.hpp"
#include "leafsym/milnor.hpp"
#include "leafsym/report.hpp"

namespace leafsym {

struct AmbientForm {
  DifferentialForm beta;    // beta*
  DifferentialForm lambda;  // lambda*
};

/// beta* and lambda* on ambient_chart().
const AmbientForm& ambient_form();

/// Components of X as fields on ambient_chart().
std::vector<ScalarField> liouville_components();

/// X(Z) = Z / 2 as a tangent vector; DomainError at the origin.
TangentVector liouville_field(const AmbientPoint& z);

/// Hermitian projection of X onto T F_w at z:
///   X - (sum_j df/dZ_j Z_j / 2) conj(grad f) / |grad f|^2.
template <class T>
CxPoint<T> fiber_liouville(const WeightedPolynomial& f, const CxPoint<T>& z) {
  const auto g = f.grad(z);
  const T g2 = norm2(g[0]) + norm2(g[1]) + norm2(g[2]);
  const Cx<T> pair = 0.5 * (g[0] * z[0] + g[1] * z[1] + g[2] * z[2]);
  const Cx<T> k = pair / Cx<T>(g2, T(0.0));
  CxPoint<T> out;
  for (int j = 0; j < 3; ++j) out[j] = 0.5 * z[j] - k * conj(g[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Frames of T F_w

struct FiberFrame {
  AmbientPoint base;
  CxPoint<double> normal;  // conj(grad f(base)); T F_w is its Hermitian orthogonal
  std::vector<TangentVector> vectors;  // (u, iu, v, iv), orthonormal
};

/// Projects the complex coordinate frame onto ker df in the order Z0, Z1, Z2,
/// keeps the first two that survive Gram-Schmidt with residual above 1e-3 of
/// their length, and realifies.  ConstructionError if the frame fails its
/// own validation.
FiberFrame fiber_frame(const WeightedPolynomial& f, const AmbientPoint& p);

/// max_i |df(v_i)| / |grad f| and max |G - I| over the Gram matrix.
struct FrameQuality {
  double tangency = 0.0;
  double orthonormality = 0.0;
};
FrameQuality frame_quality(const FiberFrame& frame);

/// M_ij = form(v_i, v_j).  StructuralError if the frame is not tangent
/// (1e-10) or not orthonormal (1e-10).
std::array<std::array<double, 4>, 4> restrict_to_fiber(const DifferentialForm& form,
                                                       const FiberFrame& frame);

// ---------------------------------------------------------------------------
// Reports

/// i_X beta* = lambda* and d(i_X beta*) = beta* coefficientwise at random points.
VerificationReport liouville_identity_check(std::size_t samples, std::uint64_t seed);
VerificationReport liouville_identity_check(const std::vector<ScalarField>& field,
                                            std::size_t samples, std::uint64_t seed);

/// Pf(beta* restricted to a FiberFrame of F_w) > 0 at sample points of F_w.
VerificationReport fiber_positivity_check(const WeightedPolynomial& f, Cx<double> w,
                                          std::size_t samples, std::uint64_t seed);
VerificationReport fiber_positivity_check(const WeightedPolynomial& f, Cx<double> w,
                                          const DifferentialForm& beta, std::size_t samples,
                                          std::uint64_t seed);

struct SymplectizationOptions {
  double rho_bar_star = 4.0;  // level rho_bar = |Z|^2 of M
  double varrho = 2.718281828459045;
  double step = 1e-3;
  int reproject_every = 10;
  double drift_tolerance = 1e-8;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  double field_scale = 1.0;  // multiplies the fibre Liouville field; 1 for the real check
};

/// Points of M = F_1 cap {|Z|^2 = rho_bar_star}.
std::vector<AmbientPoint> sample_level_set(const WeightedPolynomial& f, double rho_bar_star,
                                           std::size_t count, std::uint64_t seed);

struct FlowResult {
  AmbientPoint end;
  std::vector<std::array<double, 6>> pushed;  // d Phi applied to each input vector
  std::array<double, 6> time_derivative{};    // d/dt of the integrated endpoint
  int reprojections = 0;
};

/// RK4 flow of the fibre Liouville field for time t in dual arithmetic, so that
/// the tangent map and the derivative in t are those of the discrete flow.
FlowResult liouville_flow(const WeightedPolynomial& f, const AmbientPoint& start,
                          const std::vector<std::array<double, 6>>& vectors, double t,
                          const SymplectizationOptions& options);

/// Max relative error of lambda*(dPsi v) = varrho lambda*(v) over T M, and of
/// Psi_*(varrho d/dvarrho) = X along the trajectories.
struct SymplectizationError {
  double identity = 0.0;
  double generator = 0.0;
  int reprojections = 0;
};
SymplectizationError symplectization_error(const WeightedPolynomial& f,
                                           const SymplectizationOptions& options);

VerificationReport symplectization_identification(const WeightedPolynomial& f,
                                                  const SymplectizationOptions& options);

/// Identity error at step h and h/2 with no reprojection; pass iff the ratio is >= 8.
VerificationReport integrator_order_check(const WeightedPolynomial& f,
                                          SymplectizationOptions options, double coarse_step);

// ---------------------------------------------------------------------------
// Re-embedding of the fibre

/// psi(rho) = 1 - step(rho - 2): 1 for rho <= 2, 0 for rho >= 3.
template <class T>
T reembedding_cutoff(const T& rho) {
  return 1.0 - ad::smooth_step(rho - 2.0);
}

/// G(P) = P + psi(|P|) s(P) nu(P), s the graph offset to F_{R^{-d}}, as a map
/// of the R^6 chart.  On F_0 it parametrises the interpolated graph.
ChartMap reembedding_graph(const WeightedPolynomial& f, double scale);

/// Z_j -> R^{w_j} Z_j on the R^6 chart.
ChartMap weighted_scale_map(const WeightedPolynomial& f, double scale);

struct ReembeddingOptions {
  std::vector<double> scales{2, 4, 8, 16, 32};
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  double displacement_threshold = 0.05;  // sup |s nu| over F_0(1) before positivity is tried
};

struct ReembeddingResult {
  bool found = false;
  double scale = 0.0;
  VerificationReport report;
};

/// Certifies one R with the given graph map: displacement below threshold,
/// Pf of (R G)^* beta* on F_0 frames positive, three pieces agree on the
/// overlaps to 1e-10, Z/d Hopf equivariance to 1e-10.
VerificationReport reembedding_check(const WeightedPolynomial& f, double scale,
                                     const ChartMap& graph, const ReembeddingOptions& options);

/// Tries the scales in order and returns the first certified one.
ReembeddingResult reembedding_form(const WeightedPolynomial& f, const ReembeddingOptions& options);

// ---------------------------------------------------------------------------
// Contact closeness (hypothesis of the stability argument)

struct ContactClosenessSeries {
  std::vector<double> taus;
  std::vector<double> c0;  // sup |(alpha_tau - alpha0_tau)(v)|
  std::vector<double> c1;  // sup |d(alpha_tau - alpha0_tau)(v, w)|
};

/// alpha_tau = e^{-tau} E_tau^* lambda* with E_tau the map from the link to F_1
/// (weighted scaling by e^{tau/2} then Newton), alpha0_tau the same without
/// Newton.  Sampled on unit frames of T N.
ContactClosenessSeries contact_closeness_series(const WeightedPolynomial& f,
                                                const std::vector<double>& taus,
                                                std::size_t samples, std::uint64_t seed);

/// Pass iff both sequences decrease strictly.
VerificationReport contact_closeness_check(const WeightedPolynomial& f,
                                           const ContactClosenessSeries& series);

}  // namespace leafsym
