// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "leafsym/endperiodic.hpp"
#include "leafsym/errors.hpp"
#include "leafsym/milnor.hpp"
#include "leafsym/nil.hpp"
#include "leafsym/suite.hpp"
#include "leafsym/symplectic.hpp"

using namespace leafsym;

namespace {

constexpr std::uint64_t kSeed = 20261016;
constexpr std::array<double, 4> kBreaks{0, 1, 2, 3};

struct Outcome {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note += (note.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void info(const std::string& s) { note += (note.empty() ? "" : "; ") + s; }
};

double detail_value(const VerificationReport& r, const std::string& key) {
  for (const auto& [k, v] : r.details) {
    if (k == key) return std::stod(v);
  }
  throw std::runtime_error("missing detail " + key + " in " + r.check);
}

std::string g(double v) { return fmt::format("{:.3g}", v); }

int failures = 0;

// limit <= 0 means no runtime bound was set for the criterion
void criterion(int id, const char* title, double limit, const std::function<Outcome()>& body) {
  Stopwatch sw;
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.note = std::string("exception: ") + e.what();
  }
  const double t = sw.seconds();
  if (limit > 0 && t >= limit) out.require(false, fmt::format("runtime {:.2f} s >= {} s", t, limit));
  if (!out.pass) ++failures;
  const std::string budget = limit > 0 ? fmt::format(" / {:g} s", limit) : "";
  fmt::print("{} [{:2}] {} ({:.2f} s{}) {}\n", out.pass ? "PASS" : "FAIL", id, title, t, budget,
             out.note);
  std::fflush(stdout);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  criterion(1, "structure equation and Euler classes", 5.0, [] {
    Outcome o;
    const auto n = make_nil_chart(-3);
    const auto r = structure_equation_check(n, 1000, kSeed);
    o.require(r.pass && r.measured < 1e-10, "structure_equation_check " + g(r.measured));
    // direct evaluation against the quoted constant 3/(2 pi)
    const auto dzeta = exterior_derivative(connection_form(n));
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Point p{u(rng), u(rng), u(rng)};
      const auto frame = coordinate_frame(n.chart, p);
      const std::vector<TangentVector> xy{frame[0], frame[1]};
      worst = std::max(worst, std::abs(evaluate(dzeta, xy) - 0.477464829275686));
    }
    o.require(worst < 1e-10, "d zeta(dx, dy) - 0.4774648... = " + g(worst));
    for (int c1 : {-3, -9, -2, -1}) {
      const double e = euler_class_integral(make_nil_chart(c1));
      o.require(std::abs(e - c1) < 1e-6, fmt::format("euler class {} gave {}", c1, e));
    }
    o.info("max error " + g(std::max(r.measured, worst)));
    return o;
  });

  criterion(2, "Kodaira-Thurston form (10, 0.05)", 10.0, [] {
    Outcome o;
    const auto k = make_kt_chart(-3);
    const auto beta = kt_symplectic_form(k, 10.0, 0.05);
    const auto closed = kt_closedness_check(k, beta, 10000, kSeed);
    const auto nondeg = kt_nondegeneracy_check(k, beta, 10.0, 0.05, 10000, kSeed);
    const auto inv = kt_invariance_check(k, beta, 10000, kSeed);
    o.require(closed.pass && closed.measured < 1e-8, "closedness " + g(closed.measured));
    o.require(nondeg.pass, "constant nonzero Pfaffian " + g(nondeg.measured));
    o.require(inv.pass && inv.measured < 1e-10, "invariance " + g(inv.measured));
    o.info(fmt::format("d beta {}, invariance {}", g(closed.measured), g(inv.measured)));
    return o;
  });

  criterion(3, "Liouville identity, symplectization, RK4 order", 60.0, [] {
    Outcome o;
    const auto li = liouville_identity_check(1000, kSeed);
    o.require(li.pass && li.measured < 1e-12, "Liouville identity " + g(li.measured));
    const auto f = polynomial_by_name("E6");
    SymplectizationOptions so;
    so.varrho = std::exp(1.0);
    so.samples = 100;
    so.seed = kSeed;
    const auto sy = symplectization_identification(f, so);
    o.require(sy.pass && sy.measured < 1e-6, "symplectization " + g(sy.measured));
    so.samples = 20;
    const auto ord = integrator_order_check(f, so, 0.1);
    o.require(ord.pass && ord.measured >= 8.0, "order ratio " + g(ord.measured));
    o.info(fmt::format("identity {}, symplectization {}, ratio {}", g(li.measured),
                       g(sy.measured), g(ord.measured)));
    return o;
  });

  criterion(4, "convergence law slope -3", 60.0, [] {
    Outcome o;
    const auto f = polynomial_by_name("E6");
    const auto s = convergence_series(f, 1000, kSeed);
    const auto r = convergence_law_check(f, s);
    o.require(r.pass, "convergence_law_check");
    o.require(std::abs(s.slope + 3.0) <= 0.3, "slope " + g(s.slope));
    o.info("slope " + fmt::format("{:.4f}", s.slope));
    return o;
  });

  criterion(5, "re-embedding certificate", 0.0, [] {
    Outcome o;
    ReembeddingOptions ro;
    ro.samples = 1000;
    ro.seed = kSeed;
    const auto res = reembedding_form(polynomial_by_name("E6"), ro);
    o.require(res.found && res.scale <= 32.0, "no R <= 32 certified");
    if (!res.found) return o;
    const auto& r = res.report;
    o.require(r.pass && r.positivity_ok, "positive Pfaffian at all samples");
    const double overlap = std::max(detail_value(r, "overlap_core_discrepancy"),
                                    detail_value(r, "overlap_end_discrepancy"));
    const double equi = detail_value(r, "hopf_equivariance");
    o.require(overlap < 1e-10, "overlap " + g(overlap));
    o.require(equi < 1e-10, "Z/3 equivariance " + g(equi));
    o.info(fmt::format("R = {:g}, min Pf {}, overlap {}, equivariance {}", res.scale,
                       g(r.measured), g(overlap), g(equi)));
    return o;
  });

  criterion(6, "end volume identity", 10.0, [] {
    Outcome o;
    const auto kt = make_kt_chart(-9);
    const auto pair = build_cutoffs(0.05, kBreaks, -9);
    const auto r = volume_identity_check(pair, kt, 10000, kSeed);
    o.require(r.pass && r.measured < 1e-9, "discrepancy " + g(r.measured));
    const double min_coeff = detail_value(r, "min_coefficient");
    o.require(min_coeff > 0.0, "min coefficient " + g(min_coeff));
    // the margin comes from lambda >= 1.05 max(scan, 1)
    const double margin = (pair.lambda - pair.scanned_max) / std::max(pair.scanned_max, 1.0);
    o.require(margin >= 0.05 - 1e-12, "lambda margin " + g(margin));
    // past T3 the coefficient is 2 lambda mu exactly
    o.require(std::abs(volume_coefficient(pair, 4.0) - 2 * pair.lambda * 0.05) < 1e-12,
              "coefficient past T3");
    o.info(fmt::format("discrepancy {}, min coefficient {}, lambda margin {:.4f}", g(r.measured),
                       g(min_coeff), margin));
    return o;
  });

  criterion(7, "end periodicity, Hopf shift and gluing", 30.0, [] {
    Outcome o;
    const auto kt = make_kt_chart(-9);
    const auto pair = build_cutoffs(0.05, kBreaks, -9);
    const auto beta = end_form(pair, kt);
    const auto per = end_periodicity_check(pair, kt, beta, 200, kSeed);
    o.require(per.pass && per.measured < 1e-9, "periodicity " + g(per.measured));
    const auto glu = gluing_compatibility_check(pair, kt, kFrozenC0, 1000, kSeed);
    o.require(glu.pass && glu.measured < 1e-9, "gluing " + g(glu.measured));
    o.require(detail_value(glu, "maps") == 12.0, "twelve maps");
    o.info(fmt::format("periodicity {}, gluing {} over 12 maps", g(per.measured), g(glu.measured)));
    return o;
  });

  criterion(8, "Milnor regularity E6 E7 E8", 30.0, [] {
    Outcome o;
    std::string mins;
    for (const char* name : {"E6", "E7", "E8"}) {
      const auto r = milnor_regularity_check(polynomial_by_name(name), RegularityBand{0.0, 0.1},
                                             10000, kSeed, 1e-4);
      o.require(r.pass && r.samples == 10000, fmt::format("{} min {}", name, g(r.measured)));
      mins += fmt::format("{}{} {}", mins.empty() ? "" : ", ", name, g(r.measured));
    }
    o.info("min norms " + mins);
    return o;
  });

  criterion(9, "fault injection at 1e-6", 0.0, [] {
    Outcome o;
    int rejected = 0, total = 0;
    auto expect_fail = [&](const std::string& what, const std::function<VerificationReport()>& run) {
      ++total;
      bool failed = false;
      try {
        failed = !run().pass;
      } catch (const std::exception&) {
        failed = true;
      }
      if (failed) ++rejected;
      o.require(failed, what + " accepted a perturbed input");
    };

    // nil-manifolds
    const auto n = make_nil_chart(-3);
    const auto c = n.chart;
    const auto bump = ScalarField::from(c, [](auto x) { return 1e-6 * ad::sin(x[0]) * ad::cos(x[1]); });
    const auto zeta = connection_form(n) + bump * DifferentialForm::basis(c, {1});
    expect_fail("structure equation", [&] { return structure_equation_check(n, zeta, 1000, kSeed); });
    expect_fail("contact", [&] { return contact_check(n, zeta, 1000, kSeed); });
    const auto dz = exterior_derivative(connection_form(n)) +
                    ScalarField::constant(c, 1e-6) * DifferentialForm::basis(c, {0, 1});
    expect_fail("Euler class", [&] { return euler_class_check(n, dz); });

    const auto k = make_kt_chart(-3);
    const auto kc = k.chart;
    const auto beta = kt_symplectic_form(k, 10.0, 0.05);
    const auto wobble = ScalarField::from(kc, [](auto x) { return 1e-6 * ad::sin(x[2]); });
    expect_fail("KT closedness", [&] {
      return kt_closedness_check(k, beta + wobble * DifferentialForm::basis(kc, {0, 1}), 1000, kSeed);
    });
    expect_fail("KT nondegeneracy", [&] {
      return kt_nondegeneracy_check(k, beta + wobble * DifferentialForm::basis(kc, {2, 3}), 10.0,
                                    0.05, 1000, kSeed);
    });
    const auto spin = ScalarField::from(kc, [](auto x) { return 1e-6 * ad::sin(x[3]); });
    expect_fail("KT invariance", [&] {
      return kt_invariance_check(k, beta + spin * DifferentialForm::basis(kc, {0, 1}), 1000, kSeed);
    });

    // Milnor fibration
    const auto e6 = polynomial_by_name("E6");
    expect_fail("Milnor regularity", [&] {
      // arg(f - c), c = sqrt(1 + 1e-6): a critical point of the shifted fibration in the band
      auto f = e6;
      const double cv = std::sqrt(1.0 + 1e-6);
      f.monomials.push_back({-cv, {0, 0, 0}});
      const double phi = std::acos(1.0 / cv) / 3.0;
      const AmbientPoint q(std::array<double, 6>{std::cos(phi), std::sin(phi), 0, 0, 0, 0});
      return milnor_regularity_check(f, {}, std::vector<AmbientPoint>{q}, 1e-4);
    });
    expect_fail("convergence law", [&] {
      auto s = convergence_series(e6, 200, kSeed);
      s.displacement[3] = s.displacement[2] * (1 + 1e-6);
      return convergence_law_check(e6, s);
    });

    // symplectic
    expect_fail("Liouville identity", [&] {
      auto x = liouville_components();
      x[1] = x[1] + 1e-6 * ScalarField::coordinate(ambient_chart(), 0);
      return liouville_identity_check(x, 100, kSeed);
    });
    expect_fail("fibre positivity", [&] {
      return fiber_positivity_check(e6, Cx<double>(1.0), (1.0 + 1e-6) * ambient_form().beta, 100,
                                    kSeed);
    });
    SymplectizationOptions so;
    so.samples = 10;
    so.seed = kSeed;
    so.field_scale = 1.0 + 2e-6;
    expect_fail("symplectization", [&] { return symplectization_identification(e6, so); });
    expect_fail("integrator order", [&] { return integrator_order_check(e6, so, 0.1); });
    expect_fail("re-embedding", [&] {
      auto comps = reembedding_graph(e6, 4.0).components();
      comps[0] = comps[0] + ScalarField::constant(ambient_chart(), 1e-6);
      ReembeddingOptions ro;
      ro.samples = 100;
      ro.seed = kSeed;
      return reembedding_check(e6, 4.0, ChartMap(ambient_chart(), ambient_chart(), comps), ro);
    });
    expect_fail("contact closeness", [&] {
      auto s = contact_closeness_series(e6, {2, 3, 4, 5, 6}, 10, kSeed);
      s.c1.back() = s.c1[s.c1.size() - 2] * (1.0 + 1e-6);
      return contact_closeness_check(e6, s);
    });

    // end-periodic form
    const auto kt = make_kt_chart(-9);
    const auto pair = build_cutoffs(0.05, kBreaks, -9);
    const auto end = end_form(pair, kt);
    const auto ec = kt.chart;
    expect_fail("cutoff certificate", [&] {
      auto p = pair;
      p.lambda *= 1.0 - 1e-6;
      return cutoff_certificate_check(p);
    });
    expect_fail("turbulization signs", [&] {
      auto t = make_turbulization();
      t.g = t.g + ScalarField::constant(r_line(), 1e-6);
      return turbulization_sign_check(t);
    });
    expect_fail("volume identity", [&] {
      return volume_identity_check(pair, kt, end + 1e-6 * DifferentialForm::basis(ec, {0, 1}), 500,
                                   kSeed);
    });
    expect_fail("end closedness", [&] {
      const auto bent = end + 1e-6 * (ScalarField::coordinate(ec, 2) * DifferentialForm::basis(ec, {0, 1}));
      return end_closedness_check(pair, kt, bent, 500, kSeed);
    });
    expect_fail("end periodicity", [&] {
      const auto s = ScalarField::from(ec, [](auto x) { return ad::sin(x[3]); });
      return end_periodicity_check(pair, kt, end + 1e-6 * (s * DifferentialForm::basis(ec, {0, 1})),
                                   50, kSeed);
    });
    expect_fail("tameness", [&] {
      const auto collar = make_collar(kt, 0.1);
      const auto boundary = kt_symplectic_form(kt, pair.lambda, pair.mu);
      const auto bad = pullback(collar.projection, boundary) +
                       1e-6 * DifferentialForm::basis(collar.chart, {0, 1});
      return tameness_check(kt, collar, boundary, bad, -4, 4, 200, kSeed);
    });
    expect_fail("leaf identification", [&] {
      return leaf_identification_check(e6, make_turbulization(), 2.0, kFrozenC0 + 1e-6, 20, kSeed);
    });
    expect_fail("gluing", [&] {
      return gluing_compatibility_check(pair, kt, kFrozenC0, pair.mu * (1 + 1e-6), 50, kSeed);
    });

    o.info(fmt::format("{}/{} perturbed inputs rejected", rejected, total));
    return o;
  });

  criterion(10, "full suite default_e6, reproducible", 300.0, [] {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / fmt::format("leafsym_acceptance_{}", ::getpid());
    fs::remove_all(base);
    std::vector<std::string> bundles, csvs;
    for (const char* run : {"a", "b"}) {
      const fs::path dir = base / run;
#ifdef LEAFSYM_CLI
      const std::string cmd = fmt::format("\"{}\" verify --config default_e6 --out \"{}\" > \"{}\" 2>&1",
                                          LEAFSYM_CLI, dir.string(), (base / (std::string(run) + ".log")).string());
      fs::create_directories(base);
      const int status = std::system(cmd.c_str());
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      o.require(code == 0, fmt::format("verify exit code {}", code));
#else
      const auto config = preset("default_e6");
      const auto result = run_suite(config);
      o.require(result.all_pass, "suite");
      fs::create_directories(dir);
      std::ofstream(dir / "report.txt", std::ios::binary) << render_bundle(config, result);
      std::ofstream(dir / "volume_profile.csv", std::ios::binary)
          << render_volume_csv(profile_volume(config));
#endif
      bundles.push_back(slurp(dir / "report.txt"));
      csvs.push_back(slurp(dir / "volume_profile.csv"));
    }
    o.require(!bundles[0].empty() && bundles[0] == bundles[1], "report.txt differs between runs");
    o.require(!csvs[0].empty() && csvs[0] == csvs[1], "volume_profile.csv differs between runs");
    o.require(bundles[0].find("all_pass = true") != std::string::npos, "bundle all_pass");
    o.info(fmt::format("report {} bytes identical", bundles[0].size()));
    fs::remove_all(base);
    return o;
  });

  fmt::print("{} of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
