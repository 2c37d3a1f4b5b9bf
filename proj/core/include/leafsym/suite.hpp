#pragma once

// Deterministic runner for every check, configured by a flat key = value file.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "leafsym/endperiodic.hpp"
#include "leafsym/report.hpp"

namespace leafsym {

struct SuiteConfig {
  std::string polynomial = "E6";
  std::uint64_t seed = 1;

  // Kodaira-Thurston form on K and the end nil-manifold
  double kt_lambda = 10.0;
  double kt_mu = 0.05;
  int end_c1 = -9;

  // cutoffs and end
  double mu = 0.05;
  std::array<double, 4> breakpoints{0, 1, 2, 3};
  double ts_gap = 1.0;
  double c0 = kFrozenC0;

  // turbulization and tube
  double r0 = 0.01, r1 = 0.02, r2 = 0.03, r_star = 0.05;
  double eps = 0.1;

  // symplectic
  double rho_bar_star = 4.0;
  double varrho = 2.718281828459045;
  double flow_step = 1e-3;
  double order_coarse_step = 0.1;
  double displacement_threshold = 0.05;
  std::vector<double> closeness_taus{2, 3, 4, 5, 6};

  // Milnor
  double regularity_floor = 1e-4;
  double regularity_band = 0.1;

  // sample budgets
  std::size_t nil_samples = 1000;
  std::size_t kt_samples = 10000;
  std::size_t regularity_samples = 10000;
  std::size_t liouville_samples = 1000;
  std::size_t positivity_samples = 1000;
  std::size_t symplectization_samples = 100;
  std::size_t order_samples = 20;
  std::size_t closeness_samples = 20;
  std::size_t convergence_samples = 1000;
  std::size_t reembedding_samples = 1000;
  std::size_t volume_samples = 10000;
  std::size_t closedness_samples = 10000;
  std::size_t periodicity_samples = 200;
  std::size_t tameness_samples = 1000;
  std::size_t identification_samples = 20;
  std::size_t gluing_samples = 1000;
  std::size_t profile_points = 1000;

  std::string output_dir = ".";
};

/// Parses flat "key = value" text; '#' starts a comment.  Every key has a
/// default; unknown keys, malformed values and failed validation throw ConfigError.
SuiteConfig parse_config(const std::string& text);

/// Reads a file, or a preset when the argument names one (default_e6/e7/e8).
SuiteConfig load_config(const std::string& path_or_preset);

/// Presets: "default_e6", "default_e7", "default_e8".  ConfigError otherwise.
SuiteConfig preset(const std::string& name);

/// The config rendered back to key = value text in a fixed order.
std::string render_config(const SuiteConfig& config);

/// Throws ConfigError on the first violated constraint.
void validate(const SuiteConfig& config);

struct SuiteCheck {
  std::string name;
  std::function<VerificationReport()> run;
};

/// The checks in suite order.  A check whose prerequisites failed reports
/// failure with the reason instead of running.
std::vector<SuiteCheck> suite_checks(const SuiteConfig& config);

struct SuiteResult {
  std::vector<VerificationReport> reports;
  bool all_pass = false;
  double wall_time = 0.0;
};

struct RunOptions {
  std::string only;       // run checks whose name starts with this; empty for all
  bool parallel = false;  // per-check threads, capped by LEAFSYM_THREADS
};

SuiteResult run_suite(const SuiteConfig& config, const RunOptions& options = {});

/// The report file: a header with the config, then each report; no timings.
std::string render_bundle(const SuiteConfig& config, const SuiteResult& result);

/// CSV with header tau,k,k_prime,l,coefficient,wedge_value,discrepancy, %.17g.
std::string render_volume_csv(const std::vector<VolumeProfileRow>& rows);
std::vector<VolumeProfileRow> profile_volume(const SuiteConfig& config);

/// Thread cap from LEAFSYM_THREADS (default hardware concurrency, at least 1).
unsigned thread_cap();

}  // namespace leafsym
