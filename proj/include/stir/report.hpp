#pragma once

// Serialization of trajectories and experiment results (CSV and JSON).
// Output is a pure function of its inputs; numbers use round-trip precision.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stir/coupling.hpp"
#include "stir/limit_process.hpp"
#include "stir/stationary.hpp"
#include "stir/stirring.hpp"

namespace stir {

/// Shortest round-trip decimal ("%.17g").
std::string format_real(double x);

/// Provenance block written at the top of every output file.
struct Manifest {
  std::string tool;
  std::string version;
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // flag name -> value, in order
};

/// `# key: value` lines for CSV files.
std::string manifest_comment(const Manifest& m);
/// JSON object text for the manifest.
std::string manifest_json(const Manifest& m);

/// Trajectory dump: step,V,active,tail,event. Tail entries are ';'-separated.
std::string trajectory_csv_header();
std::string trajectory_csv_row(const StepRecord& r);

/// Event log rows: replication,k,tau,U,kind,merged,active_after,tail_after.
std::string event_log_csv_header();
std::string event_log_csv_rows(std::size_t replication, const LimitTrajectory& traj);

/// Convergence table; columns fixed by the table schema.
std::string convergence_csv(const ConvergenceResult& result, const Manifest& m);
std::string convergence_json(const ConvergenceResult& result, const Manifest& m);

std::string stationarity_csv(const StationarityReport& report, const Manifest& m);
std::string stationarity_json(const StationarityReport& report, const Manifest& m);

}  // namespace stir
