#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fermikit/scenario.hpp"

namespace {

int emit_report(const fermikit::Report& rep, const std::string& out_path) {
  const std::string text = fermikit::report_to_json(rep);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 2;
    }
    out << text;
  } else {
    std::cout << text;
  }
  for (const auto& rec : rep.checks)
    std::cerr << (rec.pass ? "PASS " : "FAIL ") << rec.name << "  ("
              << rec.elapsed_ms << " ms)"
              << (rec.error.empty() ? "" : "  [" + rec.error + "]") << "\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fermikit: finite-dimensional fermionic detailed balance toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_path;
  double tol_override = -1.0;
  std::uint64_t seed_override = 0;
  auto* verify = app.add_subcommand("verify", "run the checks of a scenario file");
  verify->add_option("--scenario", scenario_path, "scenario JSON path")->required();
  auto* tol_opt = verify->add_option("--tol", tol_override, "override the scenario tolerance");
  auto* seed_opt = verify->add_option("--seed", seed_override, "override the scenario seed");
  verify->add_option("--out", out_path, "write the report here instead of stdout");

  int demo_sites = 4;
  std::string demo_out;
  auto* demo = app.add_subcommand("demo", "run the bundled demo scenario");
  demo->add_option("--sites", demo_sites, "lattice size (even)");
  demo->add_option("--out", demo_out, "write the report here instead of stdout");

  auto* list = app.add_subcommand("list-checks", "print the available check names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const std::string& name : fermikit::list_checks()) std::cout << name << "\n";
      return 0;
    }
    if (demo->parsed()) {
      fermikit::Scenario s = fermikit::demo_scenario(demo_sites);
      return emit_report(fermikit::run_scenario(s), demo_out);
    }
    std::ifstream in(scenario_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read " << scenario_path << "\n";
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    fermikit::Scenario s = fermikit::parse_scenario(buf.str());
    if (tol_opt->count() > 0) s.tol = tol_override;
    if (seed_opt->count() > 0) s.seed = seed_override;
    return emit_report(fermikit::run_scenario(s), out_path);
  } catch (const fermikit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
