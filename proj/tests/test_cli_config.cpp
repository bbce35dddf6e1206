#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lcdrop/expression.hpp"
#include "lcdrop/output.hpp"
#include "lcdrop/scenario.hpp"

using namespace lcdrop;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lcdrop_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig tiny(const std::string& preset_name, const fs::path& dir) {
  return resolve_config(preset_name, "",
                        {"mesh.nx=8", "mesh.ny=8", "t_final=0.01", "output.dir=\"" + dir.string() + "\""});
}

}  // namespace

TEST_CASE("expression parser") {
  const std::vector<std::string> vars = {"x", "y"};
  auto eval = [&](const std::string& src, double x, double y) {
    return Expression::parse(src, vars).evaluate(std::vector<double>{x, y});
  };
  CHECK(eval("1 + 2 * 3", 0, 0) == 7.0);
  CHECK(eval("2^3^2", 0, 0) == 512.0);
  CHECK(eval("-2^2", 0, 0) == -4.0);
  CHECK(eval("(x - 1)^2 / 0.5", 2, 0) == 2.0);
  CHECK(eval("if(x <= 0.5, 1, -1)", 0.5, 0) == 1.0);
  CHECK(eval("if(x <= 0.5, 1, -1)", 0.6, 0) == -1.0);
  CHECK(eval("x > 0 && y > 0 || x < -5", 1, -1) == 0.0);
  CHECK(eval("min(x, y) + max(x, y)", 3, 4) == 7.0);
  CHECK(eval("atan2(y, x)", 0, 1) == doctest::Approx(M_PI / 2));
  CHECK(eval("tanh(0) + sqrt(4) + abs(-1) + exp(0) + log(1)", 0, 0) == 4.0);
  CHECK(eval("1.5e-1", 0, 0) == 0.15);
  CHECK_THROWS_AS(Expression::parse("1 +", vars), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("q + 1", vars), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("sin(1, 2)", vars), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("(1", vars), ExpressionError);
}

TEST_CASE("presets carry the experiment parameters") {
  const ScenarioConfig move = preset("droplet_move");
  CHECK(move.weights.w_chgd == 41.0);
  CHECK(move.weights.w_wan == 20.0);
  CHECK(move.weights.w_was == 20.0);
  CHECK(move.weights.w_dw == 100.0);
  CHECK(move.scheme.t_final == 20.0);
  CHECK(move.scheme.tau == 0.002);
  CHECK(move.mesh.nx == 64);
  CHECK(move.eps_from_mesh);
  CHECK(preset("droplet_corner").scheme.t_final == 2.0);
  CHECK(preset("droplet_collide").weights.w_wan == 10.0);
  CHECK(preset("droplet_collide").weights.w_chgd == 21.0);
  CHECK(preset("droplet_split").weights.w_chgd == 11.0);
  CHECK(preset("droplet_split").initial.phi.find("/0.03") != std::string::npos);
  CHECK_THROWS_AS(preset("droplet_nope"), UsageError);
}

TEST_CASE("move preset initial data") {
  ScenarioConfig c = preset("droplet_move");
  const Scenario sc = build_scenario(c);
  const double eps = 3.0 * (std::sqrt(2.0) / 64) / std::sqrt(2.0);
  CHECK(sc.weights.eps == doctest::Approx(eps).epsilon(1e-14));
  int center = -1;
  for (int i = 0; i < sc.mesh->num_nodes(); ++i) {
    if (std::abs(sc.mesh->nodes()(0, i) - 0.25) < 1e-12 && std::abs(sc.mesh->nodes()(1, i) - 0.25) < 1e-12) center = i;
  }
  REQUIRE(center >= 0);
  CHECK(sc.initial.phi[center] == doctest::Approx(std::tanh(1.0 / (2.0 * eps))).epsilon(1e-14));
  CHECK(sc.initial.n.max_unit_defect() < 1e-14);
  // radial about (0.26, 0.25): the node at the center points in -x
  CHECK(sc.initial.n.values()(0, center) == doctest::Approx(-1.0));
}

TEST_CASE("a director expression vanishing at a node is rejected") {
  ScenarioConfig c = preset("droplet_move");
  c.initial.n = {"x-0.25", "y-0.25"};
  CHECK_THROWS_AS(build_scenario(c), UsageError);
}

TEST_CASE("override precedence: flag > file > preset, one key at a time") {
  const fs::path dir = scratch_dir("precedence");
  const fs::path file = dir / "cfg.json";
  std::ofstream(file) << R"({"preset": "droplet_corner", "scheme": {"tau": 0.004}, "mesh": {"nx": 20}})";

  const ScenarioConfig from_file = resolve_config("", file.string(), {});
  CHECK(from_file.name == "droplet_corner");
  CHECK(from_file.scheme.tau == 0.004);
  CHECK(from_file.mesh.nx == 20);
  CHECK(from_file.mesh.ny == 64);
  CHECK(from_file.weights.w_chgd == 41.0);

  const ScenarioConfig flagged = resolve_config("", file.string(), {"tau=0.001"});
  CHECK(flagged.scheme.tau == 0.001);
  nlohmann::json a = config_to_json(from_file), b = config_to_json(flagged);
  b["scheme"]["tau"] = a["scheme"]["tau"];
  CHECK(a == b);

  const ScenarioConfig w = resolve_config("droplet_split", "", {"weights.w_chgd=21"});
  CHECK(w.weights.w_chgd == 21.0);
  nlohmann::json base = config_to_json(preset("droplet_split")), mod = config_to_json(w);
  mod["weights"]["w_chgd"] = base["weights"]["w_chgd"];
  CHECK(base == mod);
}

TEST_CASE("override errors") {
  CHECK_THROWS_AS(resolve_config("droplet_move", "", {"nonsense=1"}), UsageError);
  CHECK_THROWS_AS(resolve_config("droplet_move", "", {"n=1"}), UsageError);  // ambiguous
  CHECK_THROWS_AS(resolve_config("droplet_move", "", {"tau"}), UsageError);
  CHECK_THROWS_AS(resolve_config("droplet_move", "", {"tau=-1"}), UsageError);
  CHECK_THROWS_AS(resolve_config("droplet_move", "", {"tau=\"fast\""}), std::exception);
  CHECK_NOTHROW(resolve_config("droplet_move", "", {"initial.n=[\"1\",\"0\"]"}));
}

TEST_CASE("config documents round-trip") {
  const ScenarioConfig c = preset("droplet_collide");
  const ScenarioConfig d = config_from_json(config_to_json(c));
  CHECK(config_to_json(c) == config_to_json(d));
  nlohmann::json bad = config_to_json(c);
  bad["scheme"]["tua"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), UsageError);
}

TEST_CASE("run writes CSV, snapshots and a restartable final state") {
  const fs::path dir = scratch_dir("artifacts");
  ScenarioConfig c = tiny("droplet_corner", dir);
  c.scheme.t_final = 0.02;
  const ScenarioResult r = run_scenario(c);
  CHECK_FALSE(r.aborted);
  CHECK(r.steps == 10);
  const auto rows = read_energy_csv((dir / "energy.csv").string());
  REQUIRE(rows.size() == 11);
  CHECK(rows.front().step == 0);
  CHECK(rows.back().step == 10);
  CHECK(rows.back().time == doctest::Approx(0.02));
  CHECK(fs::exists(dir / "fields_0.vtk"));
  CHECK(fs::exists(dir / "fields_10.vtk"));
  CHECK(fs::exists(dir / "config.json"));

  const std::string vtk = slurp(dir / "fields_10.vtk");
  CHECK(vtk.find("POINTS 81 double") != std::string::npos);
  CHECK(vtk.find("CELLS 128 512") != std::string::npos);
  CHECK(vtk.find("SCALARS phi double 1") != std::string::npos);
  CHECK(vtk.find("VECTORS n double") != std::string::npos);

  const PhaseState fin = read_state_json((dir / "final_state.json").string());
  CHECK(fin.step_index == 10);
  CHECK((fin.phi - r.final_state.phi).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fin.n.values() - r.final_state.n.values()).cwiseAbs().maxCoeff() == 0.0);

  // restart for five more steps continues the step count
  const fs::path dir2 = scratch_dir("restart");
  ScenarioConfig c2 = tiny("droplet_corner", dir2);
  c2.scheme.t_final = 0.03;
  c2.initial.from_state = (dir / "final_state.json").string();
  const ScenarioResult r2 = run_scenario(c2);
  CHECK(r2.steps == 5);
  CHECK(r2.final_state.step_index == 15);
}

TEST_CASE("energy CSV is bit-identical across repeated runs") {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  ScenarioConfig ca = tiny("droplet_collide", a), cb = tiny("droplet_collide", b);
  ca.output.snapshots = cb.output.snapshots = false;
  run_scenario(ca);
  run_scenario(cb);
  const std::string ta = slurp(a / "energy.csv");
  CHECK(ta.size() > 100);
  CHECK(ta == slurp(b / "energy.csv"));
}

TEST_CASE("energy CSV round trip keeps full precision") {
  const fs::path dir = scratch_dir("csv");
  EnergyTraceRow row;
  row.step = 3;
  row.time = 0.1 + 0.2;
  row.energy.total = -1.0 / 3.0;
  row.energy.e_wan = 1e-300;
  row.mass_drift = -2.5e-17;
  row.newton_iters = 4;
  {
    EnergyCsvWriter w((dir / "e.csv").string());
    w.write(row);
  }
  const auto rows = read_energy_csv((dir / "e.csv").string());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].time == row.time);
  CHECK(rows[0].energy.total == row.energy.total);
  CHECK(rows[0].energy.e_wan == row.energy.e_wan);
  CHECK(rows[0].mass_drift == row.mass_drift);
  CHECK(rows[0].newton_iters == 4);
  const std::string text = slurp(dir / "e.csv");
  CHECK(text.rfind("step,time,e_erk,e_dw,e_chdw,e_chgd,e_wan,e_was,total,mass_drift,newton_iters,min_s,max_s\n", 0) == 0);
}
