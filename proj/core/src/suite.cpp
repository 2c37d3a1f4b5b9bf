#include "leafsym/suite.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "leafsym/milnor.hpp"
#include "leafsym/nil.hpp"
#include "leafsym/symplectic.hpp"

namespace leafsym {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("{}: not a number: '{}'", key, v));
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("{}: not an integer: '{}'", key, v));
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_real(v[i]);
  return out;
}

struct Key {
  std::string name;
  std::function<void(SuiteConfig&, const std::string&)> set;
  std::function<std::string(const SuiteConfig&)> get;
};

Key real_key(std::string name, double SuiteConfig::*m) {
  return {name, [m, name](SuiteConfig& c, const std::string& v) { c.*m = to_double(name, v); },
          [m](const SuiteConfig& c) { return format_real(c.*m); }};
}

Key count_key(std::string name, std::size_t SuiteConfig::*m) {
  return {name,
          [m, name](SuiteConfig& c, const std::string& v) {
            const auto n = to_int(name, v);
            if (n <= 0) throw ConfigError(fmt::format("{}: must be a positive integer", name));
            c.*m = static_cast<std::size_t>(n);
          },
          [m](const SuiteConfig& c) { return std::to_string(c.*m); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"polynomial", [](SuiteConfig& c, const std::string& v) { c.polynomial = v; },
                 [](const SuiteConfig& c) { return c.polynomial; }});
    k.push_back({"seed",
                 [](SuiteConfig& c, const std::string& v) {
                   const auto n = to_int("seed", v);
                   if (n < 0) throw ConfigError("seed: must be non-negative");
                   c.seed = static_cast<std::uint64_t>(n);
                 },
                 [](const SuiteConfig& c) { return std::to_string(c.seed); }});
    k.push_back(real_key("kt_lambda", &SuiteConfig::kt_lambda));
    k.push_back(real_key("kt_mu", &SuiteConfig::kt_mu));
    k.push_back({"end_c1",
                 [](SuiteConfig& c, const std::string& v) { c.end_c1 = static_cast<int>(to_int("end_c1", v)); },
                 [](const SuiteConfig& c) { return std::to_string(c.end_c1); }});
    k.push_back(real_key("mu", &SuiteConfig::mu));
    k.push_back({"breakpoints",
                 [](SuiteConfig& c, const std::string& v) {
                   const auto l = to_list("breakpoints", v);
                   if (l.size() != 4) throw ConfigError("breakpoints: expected four values T0, T1, T2, T3");
                   std::copy(l.begin(), l.end(), c.breakpoints.begin());
                 },
                 [](const SuiteConfig& c) {
                   return list_text({c.breakpoints.begin(), c.breakpoints.end()});
                 }});
    k.push_back(real_key("ts_gap", &SuiteConfig::ts_gap));
    k.push_back(real_key("c0", &SuiteConfig::c0));
    k.push_back(real_key("r0", &SuiteConfig::r0));
    k.push_back(real_key("r1", &SuiteConfig::r1));
    k.push_back(real_key("r2", &SuiteConfig::r2));
    k.push_back(real_key("r_star", &SuiteConfig::r_star));
    k.push_back(real_key("eps", &SuiteConfig::eps));
    k.push_back(real_key("rho_bar_star", &SuiteConfig::rho_bar_star));
    k.push_back(real_key("varrho", &SuiteConfig::varrho));
    k.push_back(real_key("flow_step", &SuiteConfig::flow_step));
    k.push_back(real_key("order_coarse_step", &SuiteConfig::order_coarse_step));
    k.push_back(real_key("displacement_threshold", &SuiteConfig::displacement_threshold));
    k.push_back({"closeness_taus",
                 [](SuiteConfig& c, const std::string& v) { c.closeness_taus = to_list("closeness_taus", v); },
                 [](const SuiteConfig& c) { return list_text(c.closeness_taus); }});
    k.push_back(real_key("regularity_floor", &SuiteConfig::regularity_floor));
    k.push_back(real_key("regularity_band", &SuiteConfig::regularity_band));
    k.push_back(count_key("nil_samples", &SuiteConfig::nil_samples));
    k.push_back(count_key("kt_samples", &SuiteConfig::kt_samples));
    k.push_back(count_key("regularity_samples", &SuiteConfig::regularity_samples));
    k.push_back(count_key("liouville_samples", &SuiteConfig::liouville_samples));
    k.push_back(count_key("positivity_samples", &SuiteConfig::positivity_samples));
    k.push_back(count_key("symplectization_samples", &SuiteConfig::symplectization_samples));
    k.push_back(count_key("order_samples", &SuiteConfig::order_samples));
    k.push_back(count_key("closeness_samples", &SuiteConfig::closeness_samples));
    k.push_back(count_key("convergence_samples", &SuiteConfig::convergence_samples));
    k.push_back(count_key("reembedding_samples", &SuiteConfig::reembedding_samples));
    k.push_back(count_key("volume_samples", &SuiteConfig::volume_samples));
    k.push_back(count_key("closedness_samples", &SuiteConfig::closedness_samples));
    k.push_back(count_key("periodicity_samples", &SuiteConfig::periodicity_samples));
    k.push_back(count_key("tameness_samples", &SuiteConfig::tameness_samples));
    k.push_back(count_key("identification_samples", &SuiteConfig::identification_samples));
    k.push_back(count_key("gluing_samples", &SuiteConfig::gluing_samples));
    k.push_back(count_key("profile_points", &SuiteConfig::profile_points));
    k.push_back({"output_dir", [](SuiteConfig& c, const std::string& v) { c.output_dir = v; },
                 [](const SuiteConfig& c) { return c.output_dir; }});
    return k;
  }();
  return table;
}

VerificationReport failed(const std::string& name, const std::string& why) {
  VerificationReport r;
  r.check = name;
  r.reference = "not evaluated";
  r.measured = NAN;
  r.positivity_ok = false;
  r.add("error", why);
  r.finalize();
  return r;
}

// Runs a check, turning exceptions into failed reports.
VerificationReport guarded(const SuiteCheck& c) {
  Stopwatch clock;
  VerificationReport r;
  try {
    r = c.run();
  } catch (const std::exception& e) {
    r = failed(c.name, e.what());
  }
  r.check = c.name;
  r.wall_time = clock.seconds();
  return r;
}

// Shared, lazily built objects of the end; construction failure is recorded once.
struct EndContext {
  SuiteConfig config;
  KTChart kt;
  std::optional<CutoffPair> pair;
  std::optional<DifferentialForm> beta;
  std::string error;

  explicit EndContext(const SuiteConfig& c) : config(c), kt(make_kt_chart(c.end_c1)) {
    try {
      pair = build_cutoffs(c.mu, c.breakpoints, c.end_c1);
      beta = end_form(*pair, kt);
    } catch (const std::exception& e) {
      error = e.what();
    }
  }

  const CutoffPair& cutoffs() const {
    if (!pair) throw ConstructionError("cutoffs not certified: " + error);
    return *pair;
  }
  const DifferentialForm& form() const {
    cutoffs();
    return *beta;
  }
};

}  // namespace

// ---------------------------------------------------------------------------

SuiteConfig parse_config(const std::string& text) {
  SuiteConfig c;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", number));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ConfigError(fmt::format("line {}: unknown key '{}'", number, key));
    it->set(c, value);
  }
  validate(c);
  return c;
}

void validate(const SuiteConfig& c) {
  try {
    polynomial_by_name(c.polynomial);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("polynomial: unknown '{}' (E6, E7 or E8)", c.polynomial));
  }
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("{}: must be positive", name));
  };
  positive("mu", c.mu);
  positive("kt_lambda", c.kt_lambda);
  positive("kt_mu", c.kt_mu);
  positive("ts_gap", c.ts_gap);
  positive("eps", c.eps);
  positive("flow_step", c.flow_step);
  positive("order_coarse_step", c.order_coarse_step);
  positive("displacement_threshold", c.displacement_threshold);
  positive("regularity_floor", c.regularity_floor);
  positive("regularity_band", c.regularity_band);
  if (!(c.varrho > 1.0)) throw ConfigError("varrho: must exceed 1");
  if (!(c.rho_bar_star > 1.0)) throw ConfigError("rho_bar_star: must exceed 1");
  const auto& t = c.breakpoints;
  if (!(t[0] < t[1] && t[1] < t[2] && t[2] < t[3])) {
    throw ConfigError("breakpoints: must satisfy T0 < T1 < T2 < T3");
  }
  if (!(0.0 < c.r0 && c.r0 < c.r1 && c.r1 < c.r2 && c.r2 < c.r_star)) {
    throw ConfigError("radii: must satisfy 0 < r0 < r1 < r2 < r_star");
  }
  if (c.end_c1 == 0) throw ConfigError("end_c1: must be nonzero");
  if (!std::is_sorted(c.closeness_taus.begin(), c.closeness_taus.end()) || c.closeness_taus.size() < 2) {
    throw ConfigError("closeness_taus: need at least two increasing values");
  }
  if (c.closeness_taus.front() <= -2.0 / 3.0 * std::log(c.eps)) {
    throw ConfigError("closeness_taus: must exceed -(2/3) log eps");
  }
}

SuiteConfig preset(const std::string& name) {
  SuiteConfig c;
  if (name == "default_e6") {
    c.polynomial = "E6";
  } else if (name == "default_e7") {
    c.polynomial = "E7";
  } else if (name == "default_e8") {
    c.polynomial = "E8";
  } else {
    throw ConfigError(fmt::format("unknown preset '{}'", name));
  }
  return c;
}

SuiteConfig load_config(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
  }
  if (arg.rfind("default_", 0) == 0) return preset(arg);
  throw ConfigError(fmt::format("config '{}' is neither a file nor a preset", arg));
}

std::string render_config(const SuiteConfig& c) {
  std::string out;
  for (const auto& k : keys()) out += fmt::format("{} = {}\n", k.name, k.get(c));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<SuiteCheck> suite_checks(const SuiteConfig& c) {
  const auto f = polynomial_by_name(c.polynomial);
  const auto seed = c.seed;
  auto end = std::make_shared<EndContext>(c);
  auto link_kt = std::make_shared<KTChart>(make_kt_chart(f.link_c1));
  std::vector<SuiteCheck> out;

  // nil structure
  out.push_back({"nil.structure_equation",
                 [=] { return structure_equation_check(link_kt->nil, c.nil_samples, seed); }});
  out.push_back({"nil.euler_class", [=] { return euler_class_check(link_kt->nil); }});
  out.push_back({"nil.euler_class_end", [=] { return euler_class_check(end->kt.nil); }});
  out.push_back({"nil.contact", [=] { return contact_check(link_kt->nil, c.nil_samples, seed); }});
  out.push_back({"nil.kt_closedness", [=] {
                   return kt_closedness_check(*link_kt, kt_symplectic_form(*link_kt, c.kt_lambda, c.kt_mu),
                                              c.kt_samples, seed);
                 }});
  out.push_back({"nil.kt_nondegeneracy", [=] {
                   return kt_nondegeneracy_check(*link_kt,
                                                 kt_symplectic_form(*link_kt, c.kt_lambda, c.kt_mu),
                                                 c.kt_lambda, c.kt_mu, c.kt_samples, seed);
                 }});
  out.push_back({"nil.kt_invariance", [=] {
                   return kt_invariance_check(*link_kt, kt_symplectic_form(*link_kt, c.kt_lambda, c.kt_mu),
                                              c.kt_samples, seed);
                 }});

  // Milnor regularity
  out.push_back({"milnor.regularity", [=] {
                   return milnor_regularity_check(f, RegularityBand{0.0, c.regularity_band},
                                                  c.regularity_samples, seed, c.regularity_floor);
                 }});

  // Liouville and symplectization
  SymplectizationOptions so;
  so.rho_bar_star = c.rho_bar_star;
  so.varrho = c.varrho;
  so.step = c.flow_step;
  so.samples = c.symplectization_samples;
  so.seed = seed;
  out.push_back({"symplectic.liouville_identity",
                 [=] { return liouville_identity_check(c.liouville_samples, seed); }});
  out.push_back({"symplectic.fiber_positivity",
                 [=] { return fiber_positivity_check(f, Cx<double>(1.0), c.positivity_samples, seed); }});
  out.push_back({"symplectic.symplectization", [=] { return symplectization_identification(f, so); }});
  out.push_back({"symplectic.integrator_order", [=] {
                   auto o = so;
                   o.samples = c.order_samples;
                   return integrator_order_check(f, o, c.order_coarse_step);
                 }});
  out.push_back({"symplectic.contact_closeness", [=] {
                   return contact_closeness_check(
                       f, contact_closeness_series(f, c.closeness_taus, c.closeness_samples, seed));
                 }});

  // convergence law
  out.push_back({"milnor.convergence_law",
                 [=] { return convergence_law_check(f, c.convergence_samples, seed); }});

  // re-embedding
  out.push_back({"symplectic.reembedding", [=] {
                   ReembeddingOptions ro;
                   ro.samples = c.reembedding_samples;
                   ro.seed = seed;
                   ro.displacement_threshold = c.displacement_threshold;
                   const auto found = reembedding_form(f, ro);
                   auto r = found.report;
                   r.add("certified_scale", found.found ? format_real(found.scale) : std::string("none"));
                   return r;
                 }});

  // cutoffs
  out.push_back({"endperiodic.cutoffs", [=] { return cutoff_certificate_check(end->cutoffs()); }});
  out.push_back({"endperiodic.turbulization_signs", [=] {
                   return turbulization_sign_check(make_turbulization(c.r0, c.r1, c.r2, c.r_star));
                 }});

  // volume identity and the end form
  out.push_back({"endperiodic.volume_identity", [=] {
                   return volume_identity_check(end->cutoffs(), end->kt, end->form(), c.volume_samples, seed);
                 }});
  out.push_back({"endperiodic.closedness", [=] {
                   return end_closedness_check(end->cutoffs(), end->kt, end->form(), c.closedness_samples, seed);
                 }});
  out.push_back({"endperiodic.periodicity", [=] {
                   return end_periodicity_check(end->cutoffs(), end->kt, end->form(), c.periodicity_samples,
                                                seed);
                 }});

  // tameness
  out.push_back({"endperiodic.tameness", [=] {
                   const auto& p = end->cutoffs();
                   const auto collar = make_collar(end->kt, c.eps);
                   const auto boundary = kt_symplectic_form(end->kt, p.lambda, p.mu);
                   return tameness_check(end->kt, collar, boundary, pullback(collar.projection, end->form()),
                                         p.breakpoints[3], p.breakpoints[3] + kTwoPi, c.tameness_samples,
                                         seed);
                 }});
  out.push_back({"endperiodic.leaf_identification", [=] {
                   const auto field = make_turbulization(c.r0, c.r1, c.r2, c.r_star);
                   const double tau2 = std::max(c.breakpoints[2], 1.0 - 2.0 / 3.0 * std::log(c.eps));
                   auto r = leaf_identification_check(f, field, tau2, c.c0, c.identification_samples, seed);
                   r.add("c0_measured", measure_c0(field));
                   return r;
                 }});

  // gluing
  out.push_back({"endperiodic.gluing", [=] {
                   return gluing_compatibility_check(end->cutoffs(), end->kt, c.c0, c.gluing_samples, seed);
                 }});
  return out;
}

unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LEAFSYM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) cap = static_cast<unsigned>(v);
  }
  return cap;
}

SuiteResult run_suite(const SuiteConfig& config, const RunOptions& options) {
  validate(config);
  Stopwatch clock;
  std::vector<SuiteCheck> checks;
  for (auto& c : suite_checks(config)) {
    if (options.only.empty() || c.name.rfind(options.only, 0) == 0) checks.push_back(std::move(c));
  }
  SuiteResult result;
  result.reports.resize(checks.size());
  if (options.parallel && checks.size() > 1) {
    std::atomic<std::size_t> next{0};
    const unsigned n = std::min<unsigned>(thread_cap(), static_cast<unsigned>(checks.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < checks.size(); k = next++) result.reports[k] = guarded(checks[k]);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t k = 0; k < checks.size(); ++k) result.reports[k] = guarded(checks[k]);
  }
  result.all_pass = !result.reports.empty() &&
                    std::all_of(result.reports.begin(), result.reports.end(),
                                [](const VerificationReport& r) { return r.pass; });
  result.wall_time = clock.seconds();
  return result;
}

std::string render_bundle(const SuiteConfig& config, const SuiteResult& result) {
  std::string out = "[suite]\n";
  // output_dir is where the bundle goes, not an input of any check
  for (const auto& k : keys()) {
    if (k.name != "output_dir") out += fmt::format("{} = {}\n", k.name, k.get(config));
  }
  std::size_t passed = 0;
  for (const auto& r : result.reports) passed += r.pass ? 1 : 0;
  out += fmt::format("checks = {}\npassed = {}\nall_pass = {}\n", result.reports.size(), passed,
                     result.all_pass ? "true" : "false");
  // the k'k constant is re-derived for end_c1; it differs from the 3/(2 pi) printed for Nil(-3)
  out += fmt::format("volume_constant = {}\n", format_real(volume_constant(config.end_c1)));
  out += "volume_constant_note = hand-derived 2a = -c1/pi under zeta = dz + a x dy; "
         "the printed 3/(2 pi) is not reproduced for this convention\n";
  for (const auto& r : result.reports) out += "\n" + render(r);
  return out;
}

std::vector<VolumeProfileRow> profile_volume(const SuiteConfig& c) {
  validate(c);
  const auto kt = make_kt_chart(c.end_c1);
  const auto pair = build_cutoffs(c.mu, c.breakpoints, c.end_c1);
  return volume_profile(pair, kt, c.profile_points, c.ts_gap);
}

std::string render_volume_csv(const std::vector<VolumeProfileRow>& rows) {
  std::string out = "tau,k,k_prime,l,coefficient,wedge_value,discrepancy\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.tau, r.k, r.k_prime,
                       r.l, r.coefficient, r.wedge_value, r.discrepancy);
  }
  return out;
}

}  // namespace leafsym
