#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcdrop/assembly.hpp"
#include "lcdrop/mesh.hpp"
#include "lcdrop/scenario.hpp"
#include "lcdrop/verify.hpp"

namespace {

constexpr int kExitAborted = 1;
constexpr int kExitUsage = 2;

int simulate(const std::string& preset, const std::string& config_file,
             const std::vector<std::string>& overrides, const std::string& out_dir, bool quiet) {
  lcdrop::ScenarioConfig config;
  try {
    config = lcdrop::resolve_config(preset, config_file, overrides);
    if (!out_dir.empty()) config.output.dir = out_dir;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::cout << "scenario " << config.name << ": " << config.mesh.nx << "x" << config.mesh.ny
            << " cells, tau=" << config.scheme.tau << ", T=" << config.scheme.t_final << " -> "
            << config.output.dir << '\n';
  lcdrop::RunOptions options;
  options.progress = quiet ? nullptr : &std::cout;
  lcdrop::ScenarioResult result;
  try {
    result = lcdrop::run_scenario(config, options);
  } catch (const lcdrop::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAborted;
  }

  std::cout << "steps " << result.steps << ", components of {phi>0}: " << result.components
            << ", max energy increase " << result.max_energy_increase << ", max |mass drift| "
            << result.max_abs_mass_drift << '\n';
  if (result.aborted) {
    std::cerr << "aborted: " << result.error << '\n';
    return kExitAborted;
  }
  return 0;
}

int verify(std::uint64_t seed, const std::string& report) {
  const auto outcomes = lcdrop::run_verification_suite(seed, &std::cout);
  int failed = 0;
  for (const auto& o : outcomes) failed += o.passed ? 0 : 1;
  if (!report.empty()) {
    try {
      lcdrop::write_report(report, outcomes);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  std::cout << outcomes.size() - static_cast<std::size_t>(failed) << "/" << outcomes.size()
            << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

int mesh_audit(int nx, int ny) {
  const lcdrop::TriMesh mesh = lcdrop::build_structured_mesh(nx, ny);
  const lcdrop::AcutenessReport rep =
      lcdrop::audit_weak_acuteness(mesh, lcdrop::assemble_stiffness(mesh));
  std::printf("nodes %d, elements %d, h %.17g\n", mesh.num_nodes(), mesh.num_elements(),
              lcdrop::mesh_size(mesh));
  std::printf("is_weakly_acute %s, min off-diagonal k_ij %.17g, violating pairs %zu\n",
              rep.is_weakly_acute ? "true" : "false", rep.min_offdiag_kij, rep.violating_pairs.size());
  for (const auto& p : rep.violating_pairs) std::printf("  (%d, %d) k = %.17g\n", p.i, p.j, p.kij);
  return rep.is_weakly_acute ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field nematic droplet simulator"};
  app.require_subcommand(1);

  std::string preset, config_file, out_dir;
  std::vector<std::string> overrides;
  bool quiet = false;
  auto* sim = app.add_subcommand("simulate", "run a preset or custom scenario");
  sim->add_option("--preset", preset, "droplet_move | droplet_corner | droplet_collide | droplet_split");
  sim->add_option("--config", config_file, "JSON config document (may name a preset)");
  sim->add_option("--set", overrides, "override key=value (dotted path or unique key)")->take_all();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_flag("--quiet", quiet, "no progress lines");

  std::uint64_t seed = lcdrop::kDefaultSeed;
  std::string report;
  auto* ver = app.add_subcommand("verify", "run the verification suite");
  ver->add_option("--seed", seed, "seed of the randomized checks");
  ver->add_option("--report", report, "JSON-lines report path");

  int nx = 0, ny = 0;
  auto* audit = app.add_subcommand("mesh-audit", "weak-acuteness audit of the structured mesh");
  audit->add_option("--nx", nx)->required()->check(CLI::PositiveNumber);
  audit->add_option("--ny", ny)->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*sim) {
    if (preset.empty() && config_file.empty()) {
      std::cerr << "error: simulate needs --preset or --config\n";
      return kExitUsage;
    }
    return simulate(preset, config_file, overrides, out_dir, quiet);
  }
  if (*ver) return verify(seed, report);
  return mesh_audit(nx, ny);
}
