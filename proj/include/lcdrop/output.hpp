#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "lcdrop/solver.hpp"

namespace lcdrop {

/// One row of the energy log.
struct EnergyTraceRow {
  int step = 0;
  double time = 0.0;
  EnergyReport energy;
  double mass_drift = 0.0;
  int newton_iters = 0;
  double min_s = 0.0;
  double max_s = 0.0;
};

/// Column order of the energy CSV.
const std::vector<std::string>& energy_csv_columns();

/// Streams EnergyTraceRows as CSV with 17 significant digits, so the file
/// round-trips doubles exactly.
class EnergyCsvWriter {
 public:
  explicit EnergyCsvWriter(const std::string& path);
  ~EnergyCsvWriter();
  EnergyCsvWriter(const EnergyCsvWriter&) = delete;
  EnergyCsvWriter& operator=(const EnergyCsvWriter&) = delete;

  void write(const EnergyTraceRow& row);

 private:
  std::FILE* file_ = nullptr;
};

/// Throws std::runtime_error on unreadable files or a wrong header.
std::vector<EnergyTraceRow> read_energy_csv(const std::string& path);

/// VTK legacy ASCII unstructured grid with s, φ, μ as point scalars and n as
/// point vectors.
void write_vtk(const std::string& path, const TriMesh& mesh, const PhaseState& state);

/// Full nodal state as JSON (enough to restart a run).
void write_state_json(const std::string& path, const PhaseState& state);
PhaseState read_state_json(const std::string& path);

}  // namespace lcdrop
