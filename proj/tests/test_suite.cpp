#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "leafsym/suite.hpp"

using namespace leafsym;

namespace {

// Small budgets so that the whole suite runs in about a second.
SuiteConfig small(const std::string& poly) {
  auto c = preset("default_" + std::string(1, static_cast<char>(std::tolower(poly[0]))) + poly.substr(1));
  c.nil_samples = 50;
  c.kt_samples = 200;
  c.regularity_samples = 500;
  c.liouville_samples = 20;
  c.positivity_samples = 50;
  c.symplectization_samples = 5;
  c.order_samples = 5;
  c.closeness_samples = 5;
  c.convergence_samples = 100;
  c.reembedding_samples = 100;
  c.volume_samples = 500;
  c.closedness_samples = 500;
  c.periodicity_samples = 20;
  c.tameness_samples = 100;
  c.identification_samples = 5;
  c.gluing_samples = 20;
  c.profile_points = 50;
  return c;
}

}  // namespace

TEST_CASE("config: defaults, round trip and presets") {
  const auto c = parse_config("");
  CHECK(c.polynomial == "E6");
  CHECK(c.mu == 0.05);
  const auto e8 = preset("default_e8");
  const auto back = parse_config(render_config(e8));
  CHECK(render_config(back) == render_config(e8));
  CHECK_THROWS_AS(preset("default_e9"), ConfigError);
}

TEST_CASE("config: comments, spacing and lists") {
  const auto c = parse_config("# header\n  polynomial = E7   # trailing\n\nbreakpoints = -1, 0.5, 2, 4\nseed=7\n");
  CHECK(c.polynomial == "E7");
  CHECK(c.seed == 7);
  CHECK(c.breakpoints == std::array<double, 4>{-1, 0.5, 2, 4});
}

TEST_CASE("config: rejected inputs") {
  CHECK_THROWS_AS(parse_config("mu = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mu = -0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("unknown_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mu 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mu = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("polynomial = E5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("breakpoints = 0, 2, 1, 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("breakpoints = 0, 1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("r1 = 0.005\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("volume_samples = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("closeness_taus = 1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/file.conf"), ConfigError);
}

TEST_CASE("config files in configs/ match the presets") {
  for (const char* name : {"default_e6", "default_e7", "default_e8"}) {
    auto from_file = load_config(std::string(LEAFSYM_SOURCE_DIR) + "/configs/" + name + ".conf");
    auto p = preset(name);
    from_file.output_dir = p.output_dir;
    CHECK(render_config(from_file) == render_config(p));
  }
}

TEST_CASE("suite order and names") {
  const auto checks = suite_checks(preset("default_e6"));
  std::vector<std::string> names;
  for (const auto& c : checks) names.push_back(c.name);
  auto index = [&](const std::string& n) {
    return std::find(names.begin(), names.end(), n) - names.begin();
  };
  CHECK(index("nil.structure_equation") < index("milnor.regularity"));
  CHECK(index("milnor.regularity") < index("symplectic.symplectization"));
  CHECK(index("symplectic.symplectization") < index("milnor.convergence_law"));
  CHECK(index("milnor.convergence_law") < index("symplectic.reembedding"));
  CHECK(index("symplectic.reembedding") < index("endperiodic.cutoffs"));
  CHECK(index("endperiodic.cutoffs") < index("endperiodic.volume_identity"));
  CHECK(index("endperiodic.volume_identity") < index("endperiodic.tameness"));
  CHECK(index("endperiodic.tameness") < index("endperiodic.gluing"));
  CHECK(index("endperiodic.gluing") == static_cast<long>(names.size()) - 1);
}

TEST_CASE("small suites pass for all three polynomials") {
  for (const char* p : {"E6", "E7", "E8"}) {
    const auto r = run_suite(small(p));
    CHECK(r.all_pass);
    for (const auto& rep : r.reports) CHECK_MESSAGE(rep.pass, rep.check);
  }
}

TEST_CASE("bundle is deterministic, sequential or parallel") {
  const auto c = small("E6");
  const auto a = render_bundle(c, run_suite(c));
  const auto b = render_bundle(c, run_suite(c, {"", true}));
  CHECK(a == b);
  CHECK(a.find("wall") == std::string::npos);
  auto moved = c;
  moved.output_dir = "/elsewhere";
  CHECK(render_bundle(moved, run_suite(moved)) == a);
}

TEST_CASE("only filters by prefix") {
  const auto r = run_suite(small("E6"), {"nil.", false});
  CHECK(r.reports.size() == 7);
  for (const auto& rep : r.reports) CHECK(rep.check.rfind("nil.", 0) == 0);
  CHECK(run_suite(small("E6"), {"nothing", false}).reports.empty());
  CHECK_FALSE(run_suite(small("E6"), {"nothing", false}).all_pass);
}

TEST_CASE("failures are collected and the bundle still lists every check") {
  auto c = small("E6");
  c.end_c1 = 9;  // flips the sign of d zeta, so e^tau growth gives a negative volume
  const auto r = run_suite(c, {"endperiodic.", false});
  CHECK_FALSE(r.all_pass);
  const auto vol = std::find_if(r.reports.begin(), r.reports.end(),
                                [](const auto& x) { return x.check == "endperiodic.volume_identity"; });
  REQUIRE(vol != r.reports.end());
  CHECK_FALSE(vol->pass);
  CHECK_FALSE(vol->positivity_ok);
  CHECK(render_bundle(c, r).find("[endperiodic.gluing]") != std::string::npos);
}

TEST_CASE("CSV profile format") {
  auto c = small("E6");
  const auto rows = profile_volume(c);
  const auto csv = render_volume_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "tau,k,k_prime,l,coefficient,wedge_value,discrepancy");
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(n == static_cast<int>(c.profile_points));
  for (const auto& r : rows) CHECK(r.discrepancy < 1e-9);
}
