#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mlsim/scenario.hpp"

namespace mlsim {

struct VehicleRecord {
  int id = 0;
  bool is_cav = false;
  bool is_hov = false;
  int occupancy = 1;
  double vot = 0.0;
  double depart = 0.0;
  int start_group = 0;
  int end_group = 0;
  double travel_time = 0.0;  // h, including ramp-queue wait
  double queue_wait = 0.0;   // h
  double toll = 0.0;
  double drivers_cost = 0.0;  // vot * travel_time + toll
  bool tolled = false;
  bool tollable = false;
  bool censored = false;  // still queued or en route at the end of the run
};

/// Closes a trip. `final_step` is the step index at which the run stopped.
VehicleRecord finalize_vehicle(const Vehicle& v, const ScenarioConfig& config, int final_step);

enum class ClassFilter { All, Cav, Hov, Hdv };
inline constexpr std::array<ClassFilter, 4> kAllClasses{ClassFilter::All, ClassFilter::Cav,
                                                       ClassFilter::Hov, ClassFilter::Hdv};
std::string_view to_string(ClassFilter filter);
bool matches(const VehicleRecord& r, ClassFilter filter);

struct GroupReport {
  int vehicles = 0;
  int censored = 0;
  double total_toll = 0.0;
  int tolled_count = 0;
  int tollable_count = 0;
  std::optional<double> avg_toll_per_tolled;
  std::optional<double> tolled_pct;
  double total_travel_time = 0.0;
  std::optional<double> avg_travel_time;
  double total_drivers_cost = 0.0;
  double total_social_cost = 0.0;
};

GroupReport aggregate(std::span<const VehicleRecord> records, ClassFilter filter);
GroupReport aggregate(std::span<const VehicleRecord> records,
                      const std::function<bool(const VehicleRecord&)>& keep);

/// Report row names, in display order.
inline constexpr std::array<std::string_view, 9> kReportMetrics{
    "Total toll ($)",
    "Total tolled car",
    "Total tollable car",
    "Avg toll per tolled car ($)",
    "Tolled %",
    "Total vehicle travel time (h)",
    "Avg travel time (h)",
    "Total drivers' cost ($)",
    "Total social cost ($)"};

/// Metric values aligned with kReportMetrics; nullopt where undefined.
std::array<std::optional<double>, 9> report_values(const GroupReport& report);

struct DensityRow {
  int step = 0;
  int lane = 0;
  int cell = 0;
  int n = 0;
  int n_cav = 0;
  double k = 0.0;
  double q = 0.0;
  double v = 0.0;
};

struct LaneDiagnostic {
  int step = 0;
  int lane = 0;
  std::optional<double> cav_fraction;  // undefined for an empty lane
  double mean_density = 0.0;
  double instantaneous_time = 0.0;  // h, summed cell travel times across the lane
};

/// Per (step, lane) CAV share, mean density and summed cell time from a density trace.
std::vector<LaneDiagnostic> lane_diagnostics(std::span<const DensityRow> trace,
                                             double cell_length);

struct Summary {
  int n = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double p025 = 0.0;
  double p975 = 0.0;
};

/// Mean, sample sd, median and 2.5/97.5 percentiles (linear interpolation).
/// Throws std::invalid_argument for fewer than two values.
Summary stats_over_iterations(std::span<const double> values);

double percentile(std::vector<double> values, double p);

}  // namespace mlsim
