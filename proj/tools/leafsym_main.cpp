// leafsym verify --config <path|preset> [--only <check>] [--parallel] [--out <dir>]
// leafsym profile --config <path|preset> --out <csv>
// Exit codes: 0 all checks pass, 1 some check failed, 2 configuration or usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "leafsym/suite.hpp"

namespace {

bool write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical certificates for leafwise symplectic structures"};
  app.require_subcommand(1);

  std::string config_arg;
  std::string only;
  std::string out_dir;
  bool parallel = false;
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--config", config_arg, "config file or preset (default_e6, default_e7, default_e8)")
      ->required();
  verify->add_option("--only", only, "run only checks whose name starts with this");
  verify->add_flag("--parallel", parallel, "run checks on a thread pool (LEAFSYM_THREADS caps it)");
  verify->add_option("--out", out_dir, "output directory (overrides output_dir)");

  std::string profile_config;
  std::string csv_path;
  auto* profile = app.add_subcommand("profile", "write the volume coefficient profile as CSV");
  profile->add_option("--config", profile_config, "config file or preset")->required();
  profile->add_option("--out", csv_path, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) {
      auto config = leafsym::load_config(config_arg);
      if (!out_dir.empty()) config.output_dir = out_dir;
      const auto result = leafsym::run_suite(config, {only, parallel});
      if (result.reports.empty()) {
        fmt::print(stderr, "no check matches '{}'\n", only);
        return 2;
      }
      for (const auto& r : result.reports) {
        fmt::print("{} {:<36} measured={:<24} threshold={}\n", r.pass ? "PASS" : "FAIL", r.check,
                   leafsym::format_real(r.measured), leafsym::format_real(r.threshold));
      }
      const std::filesystem::path dir(config.output_dir);
      const bool ok = write_file(dir / "report.txt", leafsym::render_bundle(config, result)) &&
                      write_file(dir / "volume_profile.csv",
                                 leafsym::render_volume_csv(leafsym::profile_volume(config)));
      if (!ok) {
        fmt::print(stderr, "could not write outputs to {}\n", dir.string());
        return 2;
      }
      fmt::print("{} of {} checks passed in {:.1f} s; report at {}\n",
                 std::count_if(result.reports.begin(), result.reports.end(),
                               [](const auto& r) { return r.pass; }),
                 result.reports.size(), result.wall_time, (dir / "report.txt").string());
      return result.all_pass ? 0 : 1;
    }
    const auto config = leafsym::load_config(profile_config);
    if (!write_file(csv_path, leafsym::render_volume_csv(leafsym::profile_volume(config)))) {
      fmt::print(stderr, "could not write {}\n", csv_path);
      return 2;
    }
    return 0;
  } catch (const leafsym::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  }
}
