#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mlsim {

/// Managed-lane usage and toll-setting regimes.
enum class Policy { EU1, EU2, EU3, EU4, AU1, ST1, ST2, AT1 };

inline constexpr std::array<Policy, 8> kAllPolicies{Policy::EU1, Policy::EU2, Policy::EU3,
                                                    Policy::EU4, Policy::AU1, Policy::ST1,
                                                    Policy::ST2, Policy::AT1};

std::string_view to_string(Policy policy);
std::optional<Policy> parse_policy(std::string_view name);
bool is_exclusive_use(Policy policy);

struct FdParams {
  double q_H0 = 2424.0;  // veh/h, congested-branch intercept, HDV-only
  double q_A0 = 4400.0;  // veh/h, congested-branch intercept, CAV-only
  double w_H = 30.5;     // km/h
  double w_A = 61.1;     // km/h
  double s_f = 88.0;     // km/h
  double s_min = 5.0;    // km/h, speed floor for cell travel time
  // Informational only; the jam densities implied by the intercepts govern dynamics.
  double q_Hm = 1800.0;
  double q_Am = 2600.0;
  double k_jH = 94.4;
  double k_jA = 75.0;
};

struct Geometry {
  int n_lanes = 3;
  double highway_length = 10.0;  // km
  double cell_length = 10.0 / 75.0;
  int n_cells = 75;
  int n_groups = 5;
  int n_lc_cells = 3;

  int ml_lane() const { return n_lanes - 1; }
  int cells_per_group() const { return n_cells / n_groups; }
  int group_start(int group) const { return group * cells_per_group(); }
  /// First cell after the lane-change window, where the managed-lane toll is collected.
  int charging_cell(int group) const;
  int group_of(int cell) const;
  bool in_lane_change_window(int cell) const {
    return cell % cells_per_group() < n_lc_cells;
  }
  int last_window_cell(int group) const { return group_start(group) + n_lc_cells - 1; }
  int last_group_cell(int group) const { return group_start(group) + cells_per_group() - 1; }
};

/// Trapezoidal density on [a,d]: rising on [a,b], flat on [b,c], falling on [c,d].
struct Trapezoid {
  double a = 7.0;
  double b = 7.5;
  double c = 8.5;
  double d = 9.0;
};

struct DemandParams {
  int n_vehicles = 6000;
  double cav_mpr = 0.4;
  std::vector<double> occupancy_pmf{0.8, 0.1, 0.1};  // occupancy 1, 2, 3
  double vot_mean = 20.0;
  double vot_sd = 10.0;
  double vot_lo = 0.5;
  double vot_hi = 300.0;
  std::vector<double> start_group_pmf{0.6, 0.1, 0.1, 0.1, 0.1};
  std::vector<double> end_group_pmf{0.05, 0.05, 0.05, 0.05, 0.8};
  Trapezoid departure_dist{};
  // Share of high-occupancy HDVs relabelled as CAVs (conversion sweeps).
  double hocav_mpr = 0.0;
};

struct TollParams {
  double pi_min = 0.0;
  double pi_max = 15.0;
  double pi_step = 0.2;
  double theta = 0.85;
  double horizon = 5.0;  // minutes
};

struct ScenarioConfig {
  FdParams fd{};
  Geometry geometry{};
  DemandParams demand{};
  TollParams toll{};
  Policy policy = Policy::ST1;
  int n_iterations = 100;
  double dt = 6.0;        // s
  double t_start = 7.0;   // clock hour
  double t_end = 10.0;    // clock hour
  std::uint64_t seed = 1;
  double lane_change_cost = 0.1;  // USD, decision threshold only
  double locav_toll_factor = 1.0;

  int n_steps() const;
  int steps_per_horizon() const;
  double dt_hours() const { return dt / 3600.0; }
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& reason)
      : std::runtime_error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Throws ConfigError naming the first violated field.
void validate(const ScenarioConfig& config);

enum class TripState : std::uint8_t { Pending, Queued, Active, Exited };

struct Vehicle {
  int id = 0;
  bool is_cav = false;
  int occupancy = 1;
  double vot = 0.0;     // USD/h, already scaled by occupancy
  double depart = 0.0;  // clock hour
  int start_group = 0;
  int end_group = 0;
  double conversion_draw = 1.0;  // uniform in [0,1), fixed per vehicle

  TripState state = TripState::Pending;
  int lane = -1;
  int cell = -1;
  double toll_paid = 0.0;
  int arrival_step = 0;
  int cell_entry_step = -1;
  int entered_step = -1;
  int exited_step = -1;
  double travel_time = 0.0;  // h, filled when the trip is finalized
  std::uint64_t charged_groups = 0;

  bool is_hov() const { return occupancy > 1; }
};

using Rng = std::mt19937_64;

/// Independent substream per Monte Carlo iteration.
Rng make_iteration_rng(std::uint64_t seed, int iteration);

double sample_truncated_normal(Rng& rng, double mean, double sd, double lo, double hi);
double sample_trapezoidal(Rng& rng, double a, double b, double c, double d);

/// Draws the full traveler population, sorted by departure time with ids 0..N-1 in that order.
std::vector<Vehicle> sample_population(const ScenarioConfig& config, Rng& rng);

}  // namespace mlsim
