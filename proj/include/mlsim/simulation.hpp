#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mlsim/mesh.hpp"
#include "mlsim/metrics.hpp"
#include "mlsim/scenario.hpp"
#include "mlsim/tolling.hpp"

namespace mlsim {

struct TraceOptions {
  bool density = false;
  bool trajectories = false;
  int trajectory_every = 10;  // record every n-th vehicle id
  bool events = false;
  bool lanes = false;
};

struct TrajectoryRow {
  int vehicle = 0;
  int step = 0;
  int lane = 0;
  int cell = 0;
};

struct RunResult {
  int iteration = 0;
  std::uint64_t seed = 0;
  Policy policy = Policy::ST1;
  int steps = 0;
  std::vector<VehicleRecord> records;
  std::array<GroupReport, 4> reports{};  // indexed like kAllClasses
  ChargeLedger ledger{};
  std::vector<std::vector<double>> tolls;  // [horizon][group] per-cell toll
  std::vector<DensityRow> density;
  std::vector<TrajectoryRow> trajectories;
  std::vector<LaneChangeEvent> events;
  std::vector<LaneDiagnostic> lanes;

  const GroupReport& report(ClassFilter filter) const {
    return reports[static_cast<std::size_t>(filter)];
  }
  /// FNV-1a digest of the per-vehicle outcomes.
  std::uint64_t checksum() const;
};

/// Observer invoked after every step; used by tests to check engine invariants.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void after_step(int step, const LaneGrid& grid, std::span<const Vehicle> vehicles,
                          const StepFlows& flows) = 0;
};

/// Runs t_start..t_end for one Monte Carlo iteration. Deterministic in (config, iteration).
RunResult run_once(const ScenarioConfig& config, int iteration, const TraceOptions& traces = {},
                   StepObserver* observer = nullptr);

/// Same, over a caller-supplied population (ids must be 0..N-1, sorted by departure).
RunResult run_population(const ScenarioConfig& config, std::vector<Vehicle> vehicles,
                         int iteration, const TraceOptions& traces = {},
                         StepObserver* observer = nullptr);

}  // namespace mlsim
