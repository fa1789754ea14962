#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dspec/bohl.hpp"
#include "dspec/spectrum.hpp"
#include "dspec/systems.hpp"
#include "dspec/uniformity.hpp"

namespace dspec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitStructure = 3;
inline constexpr int kExitIo = 4;

/// Parsed and validated run configuration. raw_json keeps the original
/// document verbatim so every report can echo its exact provenance.
struct RunConfig {
  std::string raw_json;

  std::string generator;  // constant | periodic | block | dyadic | random-bounded |
                          // random-block | file
  TimeDomain domain = TimeDomain::TwoSided;
  long horizon = 512;
  WindowGrid grid;
  UniformityDimensions j;
  std::string j_name;  // "bd", "ed" or "explicit"
  std::uint64_t seed = 0;
  SearchConfig budgets;
  std::string output_dir = ".";
  std::string format = "both";  // json | csv | both

  // Command-specific payloads (present when the config supplies them).
  std::optional<Eigen::MatrixXd> subspace_rows;            // exponents
  std::optional<double> gamma;                             // check
  std::optional<Eigen::MatrixXd> l1_rows, l2_rows;         // check / explore
  std::optional<std::pair<int, int>> dims;                 // check
  std::vector<Eigen::MatrixXd> complement_rows;            // explore
  std::optional<ConjectureSearchConfig> conjecture;        // conjecture-search

  CoefficientSequence build_system() const;

 private:
  friend RunConfig load_config(const std::string& path);
  std::string system_json;  // generator parameters, kept for build_system
};

/// Loads and validates a config document. Throws ConfigError on schema or
/// admissibility violations, IoError when the file cannot be read, ParseError
/// on malformed syntax.
RunConfig load_config(const std::string& path);

/// Report document for a spectrum run (versioned, reproducible modulo the
/// timestamp field).
std::string report_to_json(const SpectrumReport& report, const RunConfig& config);

/// Two-column CSV (gamma, in_spectrum) on a uniform grid over the empirical
/// exponent bounds widened by 0.5.
std::string plot_data_csv(const SpectrumReport& report, const SystemBounds& bounds);

/// Convergence trace CSV: one (N, value) row per floor of each estimate.
std::string trace_csv(const std::vector<std::pair<std::string, BohlEstimate>>& estimates);

int cmd_spectrum(const RunConfig& config);
int cmd_exponents(const RunConfig& config);
int cmd_check(const RunConfig& config);
int cmd_explore_uniformity(const RunConfig& config);
int cmd_conjecture_search(const RunConfig& config);

}  // namespace dspec
