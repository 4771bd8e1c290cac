#pragma once

#include <span>
#include <vector>

#include "mlsim/mesh.hpp"
#include "mlsim/scenario.hpp"

namespace mlsim {

/// Whether the vehicle may travel the managed lane in `group`: strictly between its start
/// and end groups, and admitted by the policy.
bool eligible_for_ml(const Vehicle& v, int group, Policy policy);

/// Lane permission for the segment governed by `group`. The slowest lane is always open;
/// middle lanes close once a vehicle has to be in the slowest lane for its exit; the
/// managed lane follows eligible_for_ml.
bool lane_permitted(const Vehicle& v, int group, int lane, const Geometry& geo, Policy policy);

/// Group whose managed-lane segment a lane choice made in `cell` commits to: the current group
/// inside its lane-change window, the next group elsewhere.
int decision_group(int cell, const Geometry& geo);

/// Summed instantaneous cell travel times (h) per (group, lane).
class GroupTravelTimes {
 public:
  explicit GroupTravelTimes(const LaneGrid& grid);
  double at(int group, int lane) const { return times_[group * n_lanes_ + lane]; }

 private:
  int n_lanes_;
  std::vector<double> times_;
};

struct DecisionContext {
  const Geometry& geometry;
  Policy policy;
  double lane_change_cost;
  double locav_toll_factor;
  const GroupTravelTimes& times;
  std::span<const double> ml_tolls;  // posted per-cell toll per group
};

/// Travel-time cost plus the toll the vehicle would pay for the group (managed lane only).
double generalized_cost(const Vehicle& v, int group, int lane, const DecisionContext& ctx);

Intent lane_change_intent(const Vehicle& v, int cell, int lane, const DecisionContext& ctx);

/// Lane-change requests per (cell, lane, direction).
class DemandTally {
 public:
  DemandTally(int n_cells, int n_lanes)
      : n_lanes_(n_lanes), counts_(static_cast<std::size_t>(2 * n_cells * n_lanes), 0) {}
  int& at(int cell, int lane, int move) {
    return counts_[2 * (cell * n_lanes_ + lane) + (move > 0 ? 1 : 0)];
  }
  int at(int cell, int lane, int move) const {
    return counts_[2 * (cell * n_lanes_ + lane) + (move > 0 ? 1 : 0)];
  }
  int total() const;

 private:
  int n_lanes_;
  std::vector<int> counts_;
};

DemandTally aggregate_demand(const LaneGrid& grid, std::span<const Intent> intents);

}  // namespace mlsim
