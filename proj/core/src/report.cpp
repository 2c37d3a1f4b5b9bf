#include "leafsym/report.hpp"

#include <cmath>

#include <fmt/format.h>

namespace leafsym {

void VerificationReport::finalize() {
  const bool finite = std::isfinite(measured);
  const double scale = threshold != 0.0 ? std::abs(threshold) : 1.0;
  if (bound == Bound::kBelow) {
    margin = (threshold - measured) / scale;
    pass = finite && measured < threshold && positivity_ok;
  } else {
    margin = (measured - threshold) / scale;
    pass = finite && measured > threshold && positivity_ok;
  }
}

void VerificationReport::add(std::string key, double value) {
  details.emplace_back(std::move(key), format_real(value));
}

void VerificationReport::add(std::string key, long long value) {
  details.emplace_back(std::move(key), std::to_string(value));
}

void VerificationReport::add(std::string key, std::string value) {
  details.emplace_back(std::move(key), std::move(value));
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::string render(const VerificationReport& r) {
  std::string out;
  out += fmt::format("[{}]\n", r.check);
  out += fmt::format("reference = {}\n", r.reference);
  out += fmt::format("samples = {}\n", r.samples);
  out += fmt::format("measured = {}\n", format_real(r.measured));
  out += fmt::format("bound = {}\n", r.bound == Bound::kBelow ? "below" : "above");
  out += fmt::format("threshold = {}\n", format_real(r.threshold));
  out += fmt::format("margin = {}\n", format_real(r.margin));
  out += fmt::format("positivity = {}\n", r.positivity_ok ? "ok" : "violated");
  out += fmt::format("pass = {}\n", r.pass ? "true" : "false");
  for (const auto& [k, v] : r.details) out += fmt::format("{} = {}\n", k, v);
  for (const auto& a : r.assumptions) out += fmt::format("assumed = {}\n", a);
  return out;
}

}  // namespace leafsym
