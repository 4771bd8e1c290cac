#pragma once

#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mlsim/metrics.hpp"
#include "mlsim/scenario.hpp"
#include "mlsim/simulation.hpp"

namespace mlsim {

using MetricSummaries = std::array<std::optional<Summary>, kReportMetrics.size()>;

struct MonteCarloOptions {
  int threads = 1;
  TraceOptions traces{};      // applied to iteration 0 only
  bool keep_records = false;  // per-vehicle records are dropped unless requested
};

struct MonteCarloResult {
  ScenarioConfig config;
  std::vector<RunResult> runs;                // ordered by iteration index
  std::array<MetricSummaries, 4> summaries;  // indexed like kAllClasses

  const MetricSummaries& summary(ClassFilter filter) const {
    return summaries[static_cast<std::size_t>(filter)];
  }
  /// Per-iteration values of one report metric; undefined iterations are skipped.
  std::vector<double> metric_values(ClassFilter filter, std::size_t metric) const;
};

/// Runs config.n_iterations independent iterations. The result does not depend on `threads`.
MonteCarloResult run_monte_carlo(const ScenarioConfig& config, const MonteCarloOptions& options = {});

/// Cross-iteration statistics per class and metric; a metric defined in fewer than two
/// iterations has no summary.
std::array<MetricSummaries, 4> summarize(const std::vector<RunResult>& runs);

enum class SweepAxis { CavMpr, LocavTollFactor, HocavMpr, Policy };

std::string_view to_string(SweepAxis axis);
std::optional<SweepAxis> parse_axis(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::CavMpr;
  std::vector<std::string> values;
  ScenarioConfig base{};
};

/// Returns `base` with the axis set to `value`; throws ConfigError if the value is illegal.
ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, const std::string& value);

struct SweepPoint {
  std::string value;
  MonteCarloResult result;
};

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int threads = 1);

// CSV outputs.
void write_report_csv(std::ostream& out, const MonteCarloResult& result);
void write_summary_csv(std::ostream& out, const MonteCarloResult& result);
void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepPoint>& points);
void write_density_csv(std::ostream& out, const RunResult& run);
void write_trajectory_csv(std::ostream& out, const RunResult& run);
void write_toll_csv(std::ostream& out, const RunResult& run);
void write_event_csv(std::ostream& out, const RunResult& run);
void write_lane_csv(std::ostream& out, const RunResult& run);
void write_vehicle_csv(std::ostream& out, const RunResult& run);

}  // namespace mlsim
