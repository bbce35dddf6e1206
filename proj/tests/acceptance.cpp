// Acceptance criteria, one PASS/FAIL line each.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcdrop/output.hpp"
#include "lcdrop/scenario.hpp"
#include "lcdrop/verify.hpp"

using namespace lcdrop;
namespace fs = std::filesystem;

namespace {

constexpr double kMonotoneTol = 1e-11;
constexpr double kMassTol = 1e-9;

struct Verdict {
  bool passed = true;
  std::string detail;
};

fs::path work_root() { return fs::temp_directory_path() / "lcdrop_acceptance"; }

ScenarioConfig reduced(const std::string& name, int cells, double tau, double t_final, const std::string& tag) {
  ScenarioConfig c = preset(name);
  c.mesh.nx = c.mesh.ny = cells;
  c.scheme.tau = tau;
  c.scheme.t_final = t_final;
  c.output.dir = (work_root() / (name + "_" + tag)).string();
  c.output.snapshots = false;
  return c;
}

/// Largest total_m - total_{m-1} over the CSV written by a run.
double max_increase(const std::vector<EnergyTraceRow>& rows) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < rows.size(); ++k) worst = std::max(worst, rows[k].energy.total - rows[k - 1].energy.total);
  return worst;
}

struct CsvRun {
  std::string name;
  bool aborted = false;
  std::string error;
  std::vector<EnergyTraceRow> rows;
  double seconds = 0.0;
};

CsvRun run_and_read(const ScenarioConfig& c) {
  CsvRun out;
  out.name = c.name;
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioResult r = run_scenario(c);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.aborted = r.aborted;
  out.error = r.error;
  out.rows = read_energy_csv((fs::path(c.output.dir) / c.output.energy_log).string());
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// criterion 1 and 3 share the same runs
std::vector<CsvRun>& reduced_preset_runs() {
  static std::vector<CsvRun> runs = [] {
    std::vector<CsvRun> v;
    for (const auto& name : preset_names()) v.push_back(run_and_read(reduced(name, 32, 0.002, 0.4, "c1")));
    return v;
  }();
  return runs;
}

Verdict criterion_monotone_presets() {
  Verdict v;
  for (const CsvRun& r : reduced_preset_runs()) {
    const double inc = max_increase(r.rows);
    const bool ok = !r.aborted && r.rows.size() == 201 && inc <= kMonotoneTol;
    v.passed &= ok;
    v.detail += r.name + " max dE=" + num(inc) + " (" + num(r.seconds) + "s" + (r.aborted ? ", aborted: " + r.error : "") + "); ";
  }
  return v;
}

Verdict criterion_tau_sweep() {
  Verdict v;
  for (double tau : {0.0005, 0.002, 0.01, 0.05}) {
    const CsvRun r = run_and_read(reduced("droplet_corner", 16, tau, 50 * tau, "tau" + num(tau)));
    const double inc = max_increase(r.rows);
    v.passed &= !r.aborted && r.rows.size() == 51 && inc <= kMonotoneTol;
    v.detail += "tau=" + num(tau) + " max dE=" + num(inc) + "; ";
  }
  return v;
}

Verdict criterion_mass() {
  Verdict v;
  for (const CsvRun& r : reduced_preset_runs()) {
    double worst = 0.0;
    for (const auto& row : r.rows) worst = std::max(worst, std::abs(row.mass_drift));
    v.passed &= !r.aborted && worst <= kMassTol;
    v.detail += r.name + " max|drift|=" + num(worst) + "; ";
  }
  return v;
}

Verdict from_checks(const std::vector<CheckOutcome>& checks) {
  Verdict v;
  for (const auto& c : checks) {
    v.passed &= c.passed;
    v.detail += c.name + " " + (c.passed ? "ok" : "FAILED") + " (" + num(c.measured) + "); ";
  }
  return v;
}

Verdict criterion_projection() {
  return from_checks({projection_lemma_eform(kDefaultSeed), projection_lemma_cform(kDefaultSeed),
                      lumped_mass_monotone(kDefaultSeed)});
}

Verdict criterion_fd() {
  std::vector<CheckOutcome> checks;
  for (EnergyDerivative d : all_energy_derivatives()) checks.push_back(fd_derivative_check(d, kDefaultSeed));
  return from_checks(checks);
}

Verdict criterion_brute_force() { return from_checks({brute_force_form_check(kDefaultSeed)}); }

Verdict criterion_convex_split() {
  return from_checks({convex_split_inequality(kDefaultSeed), double_well_stationarity()});
}

Verdict criterion_refinement() {
  const RefinementStudy st = refinement_study();
  Verdict v;
  v.passed = st.min_order >= 1.0;
  for (std::size_t k = 0; k < st.rows.size(); ++k) {
    v.passed &= k == 0 || st.rows[k].error < st.rows[k - 1].error;
    v.detail += "n=" + std::to_string(st.rows[k].n) + " err=" + num(st.rows[k].error) +
                (k ? " order=" + num(st.rows[k].order) : "") + "; ";
  }
  return v;
}

Verdict criterion_experiments() {
  struct Case {
    std::string preset;
    std::vector<std::string> overrides;
    int expected;
  };
  const std::vector<Case> cases = {
      {"droplet_collide", {}, 1}, {"droplet_split", {}, 2}, {"droplet_split", {"weights.w_chgd=21"}, 1}};
  Verdict v;
  int k = 0;
  for (const Case& c : cases) {
    ScenarioConfig cfg = resolve_config(c.preset, "", c.overrides);
    cfg.output.dir = (work_root() / ("full_" + std::to_string(k++) + "_" + c.preset)).string();
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioResult r = run_scenario(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = !r.aborted && r.components == c.expected;
    v.passed &= ok;
    v.detail += c.preset + (c.overrides.empty() ? "" : " [" + c.overrides[0] + "]") + ": " +
                std::to_string(r.components) + " component(s), expected " + std::to_string(c.expected) +
                ", final phi in [" + num(r.final_state.phi.minCoeff()) + ", " + num(r.final_state.phi.maxCoeff()) +
                "] (" + num(secs) + "s); ";
  }
  return v;
}

Verdict criterion_acuteness() {
  return from_checks({weak_acuteness_sweep(64), obtuse_fixture_check()});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> selected, known;
  app.add_option("--criteria", selected, "criteria to run (default: all)")
      ->check(CLI::Range(1, 10))->delimiter(',');
  app.add_option("--known-deviation", known, "criteria whose failure does not affect the exit status")
      ->check(CLI::Range(1, 10))->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::set<int> deviations(known.begin(), known.end());

  const std::vector<std::pair<std::string, std::function<Verdict()>>> all = {
      {"energy monotone on the four presets (32x32, T=0.4)", criterion_monotone_presets},
      {"unconditional stability over tau (corner 16x16, 50 steps)", criterion_tau_sweep},
      {"mass conservation", criterion_mass},
      {"projection lemmas and lumped-mass monotonicity", criterion_projection},
      {"variational derivatives vs finite differences", criterion_fd},
      {"optimized forms vs brute-force loops", criterion_brute_force},
      {"convex-splitting inequality and double-well stationarity", criterion_convex_split},
      {"refinement energy consistency", criterion_refinement},
      {"full-resolution collide/split experiments", criterion_experiments},
      {"weak acuteness of structured meshes, obtuse fixture flagged", criterion_acuteness},
  };

  fs::create_directories(work_root());
  bool all_ok = true;
  for (int c : std::set<int>(selected.begin(), selected.end())) {
    const auto& [title, fn] = all[static_cast<std::size_t>(c - 1)];
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.passed = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const bool excused = !v.passed && deviations.count(c) > 0;
    all_ok &= v.passed || excused;
    std::printf("criterion %d %s: %s  [%s]%s\n", c, v.passed ? "PASS" : "FAIL", title.c_str(), v.detail.c_str(),
                excused ? "  (known deviation, see README)" : "");
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
