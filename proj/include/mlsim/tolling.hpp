#pragma once

#include <vector>

#include "mlsim/scenario.hpp"

namespace mlsim {

/// How a vehicle class is treated on the managed lane under a policy.
enum class MlAccess { Excluded, Free, Tolled };

MlAccess ml_access(const Vehicle& v, Policy policy);

/// Largest group charge the vehicle pays: 0 for free classes, +inf for tolled ones.
double toll_cap(const Vehicle& v, Policy policy);

/// Scales the posted charge; only low-occupancy CAVs are affected.
double charge_multiplier(const Vehicle& v, double locav_toll_factor);

/// Charge for one group of `cells` cells at the posted per-cell toll, after cap and multiplier.
double group_charge(const Vehicle& v, double per_cell_toll, int cells, Policy policy,
                    double locav_toll_factor);

/// Reactive controller: one step up when the horizon's summed ML density reached
/// theta times the summed critical density (and was not zero), one step down otherwise, clamped.
double update_toll(double previous, double sum_density, double sum_critical, const TollParams& p);

class TollSchedule {
 public:
  TollSchedule(int n_groups, const TollParams& params);

  double current(int group) const { return history_.back()[group]; }
  int horizon() const { return static_cast<int>(history_.size()) - 1; }
  int n_groups() const { return n_groups_; }

  void accumulate(int group, double density, double critical);
  double accumulated_density(int group) const { return sum_density_[group]; }
  double accumulated_critical(int group) const { return sum_critical_[group]; }

  /// Ends the running horizon: posts the next toll for every group and resets the sums.
  void close_horizon();

  /// Posted per-cell tolls, indexed [horizon][group].
  const std::vector<std::vector<double>>& history() const { return history_; }

 private:
  int n_groups_;
  TollParams params_;
  std::vector<std::vector<double>> history_;
  std::vector<double> sum_density_;
  std::vector<double> sum_critical_;
};

struct ChargeLedger {
  double total = 0.0;
  int charges = 0;
  int suppressed = 0;
};

/// Collects the group toll from a vehicle at the charging cell, at most once per group.
/// Returns the amount charged (0 when suppressed).
double charge(Vehicle& v, int group, double per_cell_toll, int cells, Policy policy,
              double locav_toll_factor, ChargeLedger& ledger);

}  // namespace mlsim
