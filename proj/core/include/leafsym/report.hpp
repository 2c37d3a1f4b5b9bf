#pragma once

// Per-check verification record shared by every module.

#include <chrono>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace leafsym {

enum class Bound {
  kBelow,  // pass iff measured < threshold (residuals, discrepancies)
  kAbove,  // pass iff measured > threshold (floors, minimum norms)
};

struct VerificationReport {
  std::string check;
  std::string reference;  // the identity or property being certified
  std::size_t samples = 0;
  double measured = 0.0;
  double threshold = 0.0;
  Bound bound = Bound::kBelow;
  double margin = 0.0;  // relative distance to the threshold, signed
  bool positivity_ok = true;
  bool pass = false;
  double wall_time = 0.0;  // seconds; excluded from the deterministic report file
  std::vector<std::pair<std::string, std::string>> details;
  std::vector<std::string> assumptions;  // cited, not computed

  /// Sets margin and pass from measured/threshold/bound/positivity_ok.
  void finalize();

  void add(std::string key, double value);
  void add(std::string key, long long value);
  void add(std::string key, std::string value);
};

/// %.17g formatting used by all machine-readable output.
std::string format_real(double v);

/// Flat `key = value` block for one report, stable key order.
std::string render(const VerificationReport& r);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace leafsym
