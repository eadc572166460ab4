#pragma once

#include "nyfem/quadrature.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace nyfem {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class NocMode { dof, h };

/// Orders between consecutive entries, positive for decay:
/// -ln(e2/e1)/ln(D2/D1) by DoF, ln(e2/e1)/ln(h2/h1) by mesh size.
std::vector<double> noc(const std::vector<double>& errors, const std::vector<double>& sizes, NocMode mode);

struct ExperimentConfig {
  std::string experiment;
  /// Points per edge; a list for the Nystrom tables, the first entry elsewhere.
  std::vector<int> n;
  int p = kDefaultGrading;
  std::vector<int> m;
  /// Refinement levels (square meshes) or mesh indices (L-shape families).
  int levels = 0;
  std::string out_dir;
  /// Mesh JSON for interp_square, element JSON for basis_dump.
  std::string mesh_file;
  std::uint64_t seed = 0;
  int threads = 0;
  /// Writes the assembled Nystrom matrix of each solve (basis_dump only).
  bool dump_matrix = false;
  /// Lifts the n <= 512 cap of the Nystrom tables (up to 2048).
  bool large_n = false;
  /// Grid resolution for basis_dump.
  int grid = 101;
};

enum class Format { integer, scientific, fixed, text };

struct Column {
  std::string name;
  Format format = Format::scientific;
};

using Value = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::vector<Value>> rows;

  void write_csv(std::ostream& out) const;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Table> tables;
  std::vector<Check> checks;
  /// Extra files written by the experiment (basis grids, matrices).
  std::vector<std::string> files;
  double wall_seconds = 0.0;

  bool pass() const;
};

const std::vector<std::string>& experiment_ids();

/// Fills in the defaults of the named experiment and validates the overrides.
ExperimentConfig resolve_config(ExperimentConfig cfg);

/// Runs one experiment. Extra files go to cfg.out_dir when it is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One-line description of the configuration, echoed into every report.
std::string describe(const ExperimentConfig& cfg);

/// Writes <out>/<table>.csv for each table (with '#' provenance lines) and
/// <out>/<experiment>.json with {experiment, rows, pass, checks, provenance}.
void write_reports(const ExperimentResult& result, const ExperimentConfig& cfg, const std::string& revision);

std::string summary_json(const ExperimentResult& result, const ExperimentConfig& cfg, const std::string& revision);

}  // namespace nyfem
