#include "lcdrop/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "lcdrop/expression.hpp"

namespace lcdrop {

using nlohmann::json;

namespace {

const std::vector<std::string>& expression_variables() {
  static const std::vector<std::string> vars = {"x", "y", "z", "eps", "h", "s_star", "pi"};
  return vars;
}

std::string droplet(double cx, double cy, double r2) {
  std::ostringstream out;
  out << "-tanh(((x-" << cx << ")^2/" << r2 << "+(y-" << cy << ")^2/" << r2 << "-1)/(2*eps))";
  return out.str();
}

/// Radial director about (cx, cy), optionally reversed.
json radial(double cx, double cy, bool reversed = false) {
  std::ostringstream dx, dy;
  dx << (reversed ? "-(x-" : "x-") << cx << (reversed ? ")" : "");
  dy << (reversed ? "-(y-" : "y-") << cy << (reversed ? ")" : "");
  return json::array({dx.str(), dy.str()});
}

/// Two radial directors split by the halfplane x <= 0.5.
json split_radial(double left_cx, double right_cx) {
  const json l = radial(left_cx, 0.5);
  const json r = radial(right_cx, 0.5, true);
  return json::array({"if(x<=0.5, " + l[0].get<std::string>() + ", " + r[0].get<std::string>() + ")",
                      "if(x<=0.5, " + l[1].get<std::string>() + ", " + r[1].get<std::string>() + ")"});
}

json base_document() {
  const DoubleWell dw = DoubleWell::nematic_default();
  const auto coeffs = [](const Polynomial& p) {
    return json(std::vector<double>(p.coeffs.begin(), p.coeffs.end()));
  };
  return json{
      {"name", "custom"},
      {"mesh", {{"nx", 64}, {"ny", 64}, {"rect", {0.0, 0.0, 1.0, 1.0}}}},
      {"weights",
       {{"w_erk", 1.0},
        {"w_dw", 100.0},
        {"w_chdw", 1.0},
        {"w_chgd", 1.0},
        {"w_wan", 1.0},
        {"w_was", 1.0},
        {"kappa", 1.0},
        {"rho", 1.0},
        {"eps", nullptr},
        {"s_star", 0.750025},
        {"double_well", {{"convex", coeffs(dw.convex())}, {"expansive", coeffs(dw.expansive())}}}}},
      {"scheme",
       {{"tau", 0.002},
        {"t_final", 2.0},
        {"newton_abs_tol", 1e-15},
        {"newton_res_tol", 1e-7},
        {"newton_max_iter", 50},
        {"linear_solver", "direct"},
        {"cg_tol", 1e-13},
        {"cg_max_iter", 20000},
        {"mass_lumping_timederiv", false}}},
      {"initial", {{"s", "s_star"}, {"n", {"1", "0"}}, {"phi", "1"}, {"from_state", ""}}},
      {"bc", {{"s", "s_star"}, {"n", {"1", "0"}}}},
      {"output", {{"dir", "out"}, {"snapshot_every", 0}, {"energy_log", "energy.csv"}, {"snapshots", true}}},
  };
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw UsageError("config: unknown key '" + where + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: '" + where + key + "' has the wrong type (" + obj.at(key).dump() + ")");
  }
}

std::string as_expression(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw UsageError("config: '" + where + "' must be an expression string");
}

std::vector<std::string> as_vector_expression(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw UsageError("config: '" + where + "' must be a list of expressions");
  std::vector<std::string> out;
  for (const auto& c : v) out.push_back(as_expression(c, where));
  return out;
}

Polynomial polynomial_from(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() > 5) throw UsageError("config: '" + where + "' must list at most 5 coefficients");
  Polynomial p;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw UsageError("config: '" + where + "' coefficients must be numbers");
    p.coeffs[k] = v[k].get<double>();
  }
  return p;
}

void find_leaf(const json& node, const std::string& key, const std::string& prefix,
               std::vector<std::string>& hits) {
  if (!node.is_object()) return;
  for (const auto& [k, v] : node.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    if (k == key) hits.push_back(path);
    find_leaf(v, key, path, hits);
  }
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"droplet_move", "droplet_corner", "droplet_collide",
                                                 "droplet_split"};
  return names;
}

json preset_document(const std::string& name) {
  json doc = base_document();
  doc["name"] = name;
  doc["output"]["dir"] = "out/" + name;
  json& w = doc["weights"];
  json& ini = doc["initial"];
  if (name == "droplet_move") {
    w["w_chgd"] = 41.0;
    w["w_wan"] = 20.0;
    w["w_was"] = 20.0;
    doc["scheme"]["t_final"] = 20.0;
    ini["n"] = radial(0.26, 0.25);
    ini["phi"] = droplet(0.25, 0.25, 0.02);
    doc["bc"]["n"] = radial(0.85, 0.85);
  } else if (name == "droplet_corner") {
    w["w_chgd"] = 41.0;
    w["w_wan"] = 20.0;
    w["w_was"] = 20.0;
    ini["n"] = {"1", "0"};
    ini["phi"] = droplet(0.5, 0.5, 0.02);
    doc["bc"]["n"] = {"1", "0"};
  } else if (name == "droplet_collide") {
    w["w_chgd"] = 21.0;
    w["w_wan"] = 10.0;
    w["w_was"] = 10.0;
    ini["n"] = split_radial(0.3, 0.7);
    ini["phi"] = "if(x<=0.5, " + droplet(0.3, 0.5, 0.02) + ", " + droplet(0.7, 0.5, 0.02) + ")";
    doc["bc"]["n"] = {"1", "0"};
  } else if (name == "droplet_split") {
    w["w_chgd"] = 11.0;
    w["w_wan"] = 20.0;
    w["w_was"] = 20.0;
    ini["n"] = split_radial(0.35, 0.65);
    ini["phi"] = droplet(0.5, 0.5, 0.03);
    doc["bc"]["n"] = split_radial(0.3, 0.7);
  } else {
    std::string list;
    for (const auto& p : preset_names()) list += (list.empty() ? "" : ", ") + p;
    throw UsageError("unknown preset '" + name + "' (known: " + list + ")");
  }
  return doc;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const json value = parse_value(assignment.substr(eq + 1));

  std::string path = key;
  if (key.find('.') == std::string::npos) {
    std::vector<std::string> hits;
    find_leaf(doc, key, "", hits);
    if (hits.empty()) throw UsageError("override: unknown key '" + key + "'");
    if (hits.size() > 1) {
      std::string list;
      for (const auto& h : hits) list += (list.empty() ? "" : ", ") + h;
      throw UsageError("override: key '" + key + "' is ambiguous (" + list + ")");
    }
    path = hits.front();
  }
  std::string pointer = "/" + path;
  for (char& c : pointer) {
    if (c == '.') c = '/';
  }
  const json::json_pointer ptr(pointer);
  if (!doc.contains(ptr)) throw UsageError("override: unknown key '" + path + "'");
  doc[ptr] = value;
}

ScenarioConfig config_from_json(const json& doc) {
  reject_unknown(doc, {"name", "preset", "mesh", "weights", "scheme", "initial", "bc", "output"}, "");
  ScenarioConfig c;
  read(doc, "name", c.name, "");

  if (doc.contains("mesh")) {
    const json& m = doc["mesh"];
    reject_unknown(m, {"nx", "ny", "rect"}, "mesh.");
    read(m, "nx", c.mesh.nx, "mesh.");
    read(m, "ny", c.mesh.ny, "mesh.");
    if (m.contains("rect")) {
      std::vector<double> r;
      read(m, "rect", r, "mesh.");
      if (r.size() != 4) throw UsageError("config: 'mesh.rect' must be [x0, y0, x1, y1]");
      c.mesh.rect = {r[0], r[1], r[2], r[3]};
    }
  }

  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    reject_unknown(w, {"w_erk", "w_dw", "w_chdw", "w_chgd", "w_wan", "w_was", "kappa", "rho", "eps",
                       "s_star", "double_well"},
                   "weights.");
    ModelWeights& mw = c.weights;
    read(w, "w_erk", mw.w_erk, "weights.");
    read(w, "w_dw", mw.w_dw, "weights.");
    read(w, "w_chdw", mw.w_chdw, "weights.");
    read(w, "w_chgd", mw.w_chgd, "weights.");
    read(w, "w_wan", mw.w_wan, "weights.");
    read(w, "w_was", mw.w_was, "weights.");
    read(w, "kappa", mw.kappa, "weights.");
    read(w, "rho", mw.rho, "weights.");
    read(w, "s_star", mw.s_star, "weights.");
    c.eps_from_mesh = !w.contains("eps") || w["eps"].is_null();
    if (!c.eps_from_mesh) read(w, "eps", mw.eps, "weights.");
    if (w.contains("double_well")) {
      const json& dw = w["double_well"];
      reject_unknown(dw, {"convex", "expansive"}, "weights.double_well.");
      const DoubleWell def = DoubleWell::nematic_default();
      const Polynomial fc = dw.contains("convex") ? polynomial_from(dw["convex"], "weights.double_well.convex")
                                                  : def.convex();
      const Polynomial fe = dw.contains("expansive")
                                ? polynomial_from(dw["expansive"], "weights.double_well.expansive")
                                : def.expansive();
      mw.double_well = DoubleWell(fc, fe);
    }
  }

  if (doc.contains("scheme")) {
    const json& s = doc["scheme"];
    reject_unknown(s, {"tau", "t_final", "newton_abs_tol", "newton_res_tol", "newton_max_iter",
                       "linear_solver", "cg_tol", "cg_max_iter", "mass_lumping_timederiv"},
                   "scheme.");
    SchemeConfig& sc = c.scheme;
    read(s, "tau", sc.tau, "scheme.");
    read(s, "t_final", sc.t_final, "scheme.");
    read(s, "newton_abs_tol", sc.newton_abs_tol, "scheme.");
    read(s, "newton_res_tol", sc.newton_res_tol, "scheme.");
    read(s, "newton_max_iter", sc.newton_max_iter, "scheme.");
    read(s, "cg_tol", sc.linear_solver.cg_tol, "scheme.");
    read(s, "cg_max_iter", sc.linear_solver.cg_max_iter, "scheme.");
    read(s, "mass_lumping_timederiv", sc.mass_lumping_timederiv, "scheme.");
    if (s.contains("linear_solver")) {
      std::string kind;
      read(s, "linear_solver", kind, "scheme.");
      if (kind == "direct") {
        sc.linear_solver.kind = LinearSolverKind::direct;
      } else if (kind == "cg") {
        sc.linear_solver.kind = LinearSolverKind::cg;
      } else {
        throw UsageError("config: 'scheme.linear_solver' must be \"direct\" or \"cg\"");
      }
    }
  }

  if (doc.contains("initial")) {
    const json& i = doc["initial"];
    reject_unknown(i, {"s", "n", "phi", "from_state"}, "initial.");
    if (i.contains("s")) c.initial.s = as_expression(i["s"], "initial.s");
    if (i.contains("n")) c.initial.n = as_vector_expression(i["n"], "initial.n");
    if (i.contains("phi")) c.initial.phi = as_expression(i["phi"], "initial.phi");
    read(i, "from_state", c.initial.from_state, "initial.");
  }

  if (doc.contains("bc")) {
    const json& b = doc["bc"];
    reject_unknown(b, {"s", "n"}, "bc.");
    if (b.contains("s")) c.bc.s = as_expression(b["s"], "bc.s");
    if (b.contains("n")) c.bc.n = as_vector_expression(b["n"], "bc.n");
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    reject_unknown(o, {"dir", "snapshot_every", "energy_log", "snapshots"}, "output.");
    read(o, "dir", c.output.dir, "output.");
    read(o, "snapshot_every", c.output.snapshot_every, "output.");
    read(o, "energy_log", c.output.energy_log, "output.");
    read(o, "snapshots", c.output.snapshots, "output.");
  }

  if (c.mesh.nx < 1 || c.mesh.ny < 1) throw UsageError("config: mesh.nx and mesh.ny must be >= 1");
  if (c.output.snapshot_every < 0) throw UsageError("config: output.snapshot_every must be >= 0");
  try {
    ModelWeights probe = c.weights;
    if (c.eps_from_mesh) probe.eps = 1.0;
    probe.validate();
    c.scheme.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json doc = base_document();
  doc["name"] = c.name;
  doc["mesh"] = {{"nx", c.mesh.nx},
                 {"ny", c.mesh.ny},
                 {"rect", {c.mesh.rect.x0, c.mesh.rect.y0, c.mesh.rect.x1, c.mesh.rect.y1}}};
  const ModelWeights& w = c.weights;
  json& jw = doc["weights"];
  jw["w_erk"] = w.w_erk;
  jw["w_dw"] = w.w_dw;
  jw["w_chdw"] = w.w_chdw;
  jw["w_chgd"] = w.w_chgd;
  jw["w_wan"] = w.w_wan;
  jw["w_was"] = w.w_was;
  jw["kappa"] = w.kappa;
  jw["rho"] = w.rho;
  jw["eps"] = c.eps_from_mesh ? json(nullptr) : json(w.eps);
  jw["s_star"] = w.s_star;
  const auto& fc = w.double_well.convex().coeffs;
  const auto& fe = w.double_well.expansive().coeffs;
  jw["double_well"] = {{"convex", std::vector<double>(fc.begin(), fc.end())},
                       {"expansive", std::vector<double>(fe.begin(), fe.end())}};
  const SchemeConfig& s = c.scheme;
  doc["scheme"] = {{"tau", s.tau},
                   {"t_final", s.t_final},
                   {"newton_abs_tol", s.newton_abs_tol},
                   {"newton_res_tol", s.newton_res_tol},
                   {"newton_max_iter", s.newton_max_iter},
                   {"linear_solver", s.linear_solver.kind == LinearSolverKind::cg ? "cg" : "direct"},
                   {"cg_tol", s.linear_solver.cg_tol},
                   {"cg_max_iter", s.linear_solver.cg_max_iter},
                   {"mass_lumping_timederiv", s.mass_lumping_timederiv}};
  doc["initial"] = {{"s", c.initial.s}, {"n", c.initial.n}, {"phi", c.initial.phi},
                    {"from_state", c.initial.from_state}};
  doc["bc"] = {{"s", c.bc.s}, {"n", c.bc.n}};
  doc["output"] = {{"dir", c.output.dir},
                   {"snapshot_every", c.output.snapshot_every},
                   {"energy_log", c.output.energy_log},
                   {"snapshots", c.output.snapshots}};
  return doc;
}

ScenarioConfig resolve_config(const std::string& preset_name, const std::string& config_file,
                              const std::vector<std::string>& overrides) {
  json file_doc = json::object();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw UsageError("cannot open config file '" + config_file + "'");
    try {
      file_doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config file '" + config_file + "': " + e.what());
    }
    if (!file_doc.is_object()) throw UsageError("config file '" + config_file + "' must hold an object");
  }

  std::string base_name = preset_name;
  if (base_name.empty() && file_doc.contains("preset")) base_name = file_doc["preset"].get<std::string>();
  file_doc.erase("preset");
  json doc = base_name.empty() ? base_document() : preset_document(base_name);
  doc.merge_patch(file_doc);
  // merge_patch drops keys set to null; ε = null means "derive from mesh".
  if (!doc["weights"].contains("eps")) doc["weights"]["eps"] = nullptr;
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

// ---------------------------------------------------------------------------

namespace {

struct NodeEvaluator {
  const TriMesh& mesh;
  double eps;
  double h;
  double s_star;

  std::vector<double> values(int i) const {
    const Eigen::VectorXd x = mesh.node(i);
    return {x[0], x.size() > 1 ? x[1] : 0.0, x.size() > 2 ? x[2] : 0.0, eps, h, s_star, M_PI};
  }
};

Expression compile(const std::string& src, const std::string& what) {
  try {
    return Expression::parse(src, expression_variables());
  } catch (const ExpressionError& e) {
    throw UsageError(what + ": " + e.what());
  }
}

std::vector<Expression> compile_vector(const std::vector<std::string>& srcs, int dim,
                                       const std::string& what) {
  if (static_cast<int>(srcs.size()) != dim) {
    throw UsageError(what + ": expected " + std::to_string(dim) + " components, got " +
                     std::to_string(srcs.size()));
  }
  std::vector<Expression> out;
  for (const auto& s : srcs) out.push_back(compile(s, what));
  return out;
}

Eigen::VectorXd unit_at(const std::vector<Expression>& comps, const NodeEvaluator& ev, int node,
                        const std::string& what) {
  const std::vector<double> vals = ev.values(node);
  Eigen::VectorXd v(static_cast<Eigen::Index>(comps.size()));
  for (std::size_t c = 0; c < comps.size(); ++c) v[static_cast<Eigen::Index>(c)] = comps[c].evaluate(vals);
  const double len = v.norm();
  if (!(len >= 1e-14)) {
    std::ostringstream msg;
    msg << what << ": director expression vanishes at node " << node << " (" << vals[0] << ", "
        << vals[1] << "), |n| = " << len;
    throw UsageError(msg.str());
  }
  return v / len;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config) {
  Scenario sc;
  auto mesh = std::make_shared<TriMesh>(build_structured_mesh(config.mesh.nx, config.mesh.ny, config.mesh.rect));
  sc.mesh = mesh;
  sc.space = std::make_shared<P1Space>(mesh);
  sc.weights = config.weights;
  const double h = mesh_size(*mesh);
  if (config.eps_from_mesh) sc.weights.eps = 3.0 * h / std::sqrt(2.0);
  sc.scheme = config.scheme;
  try {
    sc.weights.validate();
    sc.scheme.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }

  const NodeEvaluator ev{*mesh, sc.weights.eps, h, sc.weights.s_star};
  const int n = mesh->num_nodes();
  const int d = mesh->dim();

  const Expression bc_s = compile(config.bc.s, "bc.s");
  const auto bc_n = compile_vector(config.bc.n, d, "bc.n");
  sc.bc.s_nodes = mesh->boundary_nodes();
  sc.bc.n_nodes = mesh->boundary_nodes();
  sc.bc.s_values.resize(static_cast<Eigen::Index>(sc.bc.s_nodes.size()));
  sc.bc.n_values.resize(d, static_cast<Eigen::Index>(sc.bc.n_nodes.size()));
  for (std::size_t k = 0; k < sc.bc.s_nodes.size(); ++k) {
    const int i = sc.bc.s_nodes[k];
    sc.bc.s_values[static_cast<Eigen::Index>(k)] = bc_s.evaluate(ev.values(i));
    sc.bc.n_values.col(static_cast<Eigen::Index>(k)) = unit_at(bc_n, ev, i, "bc.n");
  }
  try {
    sc.bc.validate(d, n);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("boundary data: ") + e.what());
  }

  PhaseState& st = sc.initial;
  if (!config.initial.from_state.empty()) {
    st = read_state_json(config.initial.from_state);
    if (st.phi.size() != n || st.n.dim() != d) {
      throw UsageError("restart file '" + config.initial.from_state + "' does not match the mesh");
    }
  } else {
    const Expression s0 = compile(config.initial.s, "initial.s");
    const Expression phi0 = compile(config.initial.phi, "initial.phi");
    const auto n0 = compile_vector(config.initial.n, d, "initial.n");
    st.s.resize(n);
    st.phi.resize(n);
    VectorField dirs(d, n);
    for (int i = 0; i < n; ++i) {
      const std::vector<double> vals = ev.values(i);
      st.s[i] = s0.evaluate(vals);
      st.phi[i] = phi0.evaluate(vals);
      dirs.col(i) = unit_at(n0, ev, i, "initial.n");
    }
    st.n = DirectorField::from_unit(std::move(dirs));
    st.mu = ScalarField::Zero(n);
  }
  if (!st.s.allFinite() || !st.phi.allFinite()) throw UsageError("initial data is not finite at every node");
  sc.bc.apply(st);
  return sc;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const Scenario sc = build_scenario(config);
  namespace fs = std::filesystem;
  const fs::path dir(config.output.dir);

  std::unique_ptr<EnergyCsvWriter> csv;
  if (options.write_files) {
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << config_to_json(config).dump(2) << '\n';
    csv = std::make_unique<EnergyCsvWriter>((dir / config.output.energy_log).string());
  }

  const long total_steps =
      std::max(0L, std::lround((sc.scheme.t_final - sc.initial.time) / sc.scheme.tau));
  const long every = config.output.snapshot_every > 0 ? config.output.snapshot_every
                                                       : std::max(1L, total_steps / 12);
  const bool snapshots = options.write_files && config.output.snapshots;
  auto snapshot = [&](const PhaseState& s) {
    if (snapshots) write_vtk((dir / ("fields_" + std::to_string(s.step_index) + ".vtk")).string(), *sc.mesh, s);
  };

  ScenarioResult result;
  double last_total = 0.0;
  RunSinks sinks;
  sinks.on_start = [&](const PhaseState& s, const EnergyReport& e) {
    last_total = e.total;
    if (csv) {
      EnergyTraceRow row;
      row.step = s.step_index;
      row.time = s.time;
      row.energy = e;
      row.min_s = s.s.minCoeff();
      row.max_s = s.s.maxCoeff();
      csv->write(row);
    }
    snapshot(s);
  };
  sinks.on_step = [&](const PhaseState& s, const StepReport& r) {
    ++result.steps;
    result.max_energy_increase = std::max(result.max_energy_increase, r.after.total - last_total);
    last_total = r.after.total;
    result.max_abs_mass_drift = std::max(result.max_abs_mass_drift, std::abs(r.mass_drift));
    const double scale = std::max(1.0, std::abs(r.before.total));
    result.max_ledger_defect = std::max(result.max_ledger_defect, std::abs(r.ledger_defect()) / scale);
    result.min_remainder = std::min(result.min_remainder, r.remainder);
    if (csv) {
      EnergyTraceRow row;
      row.step = r.step;
      row.time = r.time;
      row.energy = r.after;
      row.mass_drift = r.mass_drift;
      row.newton_iters = r.newton_iters;
      row.min_s = r.min_s;
      row.max_s = r.max_s;
      csv->write(row);
    }
    if (r.step % every == 0 || result.steps == total_steps) snapshot(s);
    if (options.keep_reports) result.reports.push_back(r);
    if (options.progress && (result.steps % std::max(1L, total_steps / 10) == 0)) {
      *options.progress << "  step " << r.step << "/" << sc.initial.step_index + total_steps
                        << "  t=" << r.time << "  E=" << r.after.total
                        << "  newton=" << r.newton_iters << '\n';
    }
  };

  try {
    result.final_state = run(*sc.space, sc.initial, sc.weights, sc.scheme, sc.bc, sinks);
  } catch (const RunAborted& e) {
    result.aborted = true;
    result.error = e.what();
    result.final_state = e.last_good();
  }
  if (options.write_files) write_state_json((dir / "final_state.json").string(), result.final_state);
  result.components = count_components(*sc.mesh, result.final_state.phi);
  return result;
}

}  // namespace lcdrop
