#include "lcdrop/output.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lcdrop {

namespace {

std::FILE* open_or_throw(const std::string& path, const char* mode) {
  std::FILE* f = std::fopen(path.c_str(), mode);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return f;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

const std::vector<std::string>& energy_csv_columns() {
  static const std::vector<std::string> cols = {
      "step",  "time",  "e_erk",      "e_dw",         "e_chdw", "e_chgd", "e_wan",
      "e_was", "total", "mass_drift", "newton_iters", "min_s",  "max_s"};
  return cols;
}

EnergyCsvWriter::EnergyCsvWriter(const std::string& path) : file_(open_or_throw(path, "w")) {
  const auto& cols = energy_csv_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) std::fprintf(file_, "%s%s", k ? "," : "", cols[k].c_str());
  std::fputc('\n', file_);
}

EnergyCsvWriter::~EnergyCsvWriter() {
  if (file_) std::fclose(file_);
}

void EnergyCsvWriter::write(const EnergyTraceRow& r) {
  const EnergyReport& e = r.energy;
  std::fprintf(file_, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
               r.step, r.time, e.e_erk, e.e_dw, e.e_chdw, e.e_chgd, e.e_wan, e.e_was, e.total,
               r.mass_drift, r.newton_iters, r.min_s, r.max_s);
  std::fflush(file_);
}

std::vector<EnergyTraceRow> read_energy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::string expected;
  for (const auto& c : energy_csv_columns()) expected += (expected.empty() ? "" : ",") + c;
  if (line != expected) throw std::runtime_error("'" + path + "': unexpected energy CSV header");

  std::vector<EnergyTraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != energy_csv_columns().size()) {
      throw std::runtime_error("'" + path + "': malformed row '" + line + "'");
    }
    EnergyTraceRow r;
    r.step = std::stoi(f[0]);
    r.time = std::stod(f[1]);
    r.energy.e_erk = std::stod(f[2]);
    r.energy.e_dw = std::stod(f[3]);
    r.energy.e_chdw = std::stod(f[4]);
    r.energy.e_chgd = std::stod(f[5]);
    r.energy.e_wan = std::stod(f[6]);
    r.energy.e_was = std::stod(f[7]);
    r.energy.total = std::stod(f[8]);
    r.mass_drift = std::stod(f[9]);
    r.newton_iters = std::stoi(f[10]);
    r.min_s = std::stod(f[11]);
    r.max_s = std::stod(f[12]);
    rows.push_back(r);
  }
  return rows;
}

void write_vtk(const std::string& path, const TriMesh& mesh, const PhaseState& state) {
  std::FILE* f = open_or_throw(path, "w");
  const int n = mesh.num_nodes();
  const int ne = mesh.num_elements();
  const int nv = mesh.dim() + 1;
  const VectorField& dir = state.n.values();

  std::fprintf(f, "# vtk DataFile Version 3.0\nlcdrop step %d time %.17g\nASCII\n", state.step_index,
               state.time);
  std::fprintf(f, "DATASET UNSTRUCTURED_GRID\nPOINTS %d double\n", n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = mesh.node(i);
    std::fprintf(f, "%.17g %.17g %.17g\n", x[0], x[1], mesh.dim() == 3 ? x[2] : 0.0);
  }
  std::fprintf(f, "CELLS %d %d\n", ne, ne * (nv + 1));
  for (int e = 0; e < ne; ++e) {
    std::fprintf(f, "%d", nv);
    for (int a = 0; a < nv; ++a) std::fprintf(f, " %d", mesh.elements()(a, e));
    std::fputc('\n', f);
  }
  std::fprintf(f, "CELL_TYPES %d\n", ne);
  for (int e = 0; e < ne; ++e) std::fprintf(f, "%d\n", mesh.dim() == 3 ? 10 : 5);

  std::fprintf(f, "POINT_DATA %d\n", n);
  auto scalars = [&](const char* name, const ScalarField& v) {
    std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
    for (int i = 0; i < n; ++i) std::fprintf(f, "%.17g\n", v[i]);
  };
  scalars("s", state.s);
  scalars("phi", state.phi);
  scalars("mu", state.mu);
  std::fprintf(f, "VECTORS n double\n");
  for (int i = 0; i < n; ++i) {
    std::fprintf(f, "%.17g %.17g %.17g\n", dir(0, i), dir(1, i), dir.rows() == 3 ? dir(2, i) : 0.0);
  }
  std::fclose(f);
}

void write_state_json(const std::string& path, const PhaseState& state) {
  nlohmann::json doc;
  doc["time"] = state.time;
  doc["step_index"] = state.step_index;
  doc["s"] = to_vector(state.s);
  doc["phi"] = to_vector(state.phi);
  doc["mu"] = to_vector(state.mu);
  const VectorField& n = state.n.values();
  nlohmann::json dirs = nlohmann::json::array();
  for (Eigen::Index c = 0; c < n.rows(); ++c) dirs.push_back(to_vector(n.row(c).transpose()));
  doc["n"] = dirs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  out << doc.dump() << '\n';
}

PhaseState read_state_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const nlohmann::json doc = nlohmann::json::parse(in);
  PhaseState st;
  st.time = doc.at("time").get<double>();
  st.step_index = doc.at("step_index").get<int>();
  st.s = from_vector(doc.at("s").get<std::vector<double>>());
  st.phi = from_vector(doc.at("phi").get<std::vector<double>>());
  st.mu = from_vector(doc.at("mu").get<std::vector<double>>());
  const auto comps = doc.at("n").get<std::vector<std::vector<double>>>();
  if (comps.empty()) throw std::runtime_error("'" + path + "': missing director components");
  VectorField n(static_cast<Eigen::Index>(comps.size()), static_cast<Eigen::Index>(comps[0].size()));
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (comps[c].size() != comps[0].size()) throw std::runtime_error("'" + path + "': ragged director");
    n.row(static_cast<Eigen::Index>(c)) = from_vector(comps[c]).transpose();
  }
  st.n = DirectorField::from_unit(std::move(n));
  if (st.s.size() != st.phi.size() || st.mu.size() != st.phi.size() || st.n.size() != st.phi.size()) {
    throw std::runtime_error("'" + path + "': field sizes disagree");
  }
  return st;
}

}  // namespace lcdrop
