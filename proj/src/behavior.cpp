#include "mlsim/behavior.hpp"

#include <limits>
#include <numeric>

#include "mlsim/tolling.hpp"

namespace mlsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool eligible_for_ml(const Vehicle& v, int group, Policy policy) {
  return v.start_group < group && group < v.end_group &&
         ml_access(v, policy) != MlAccess::Excluded;
}

bool lane_permitted(const Vehicle& v, int group, int lane, const Geometry& geo, Policy policy) {
  if (lane == 0) return true;
  if (lane == geo.ml_lane()) return group < geo.n_groups && eligible_for_ml(v, group, policy);
  if (v.start_group == v.end_group) return false;
  const bool exits_early = v.end_group < geo.n_groups - 1;
  return !(exits_early && group > v.end_group);
}

int decision_group(int cell, const Geometry& geo) {
  const int g = geo.group_of(cell);
  return geo.in_lane_change_window(cell) ? g : g + 1;
}

GroupTravelTimes::GroupTravelTimes(const LaneGrid& grid)
    : n_lanes_(grid.geometry().n_lanes),
      times_(static_cast<std::size_t>(grid.geometry().n_groups * n_lanes_), 0.0) {
  const Geometry& geo = grid.geometry();
  for (int i = 0; i < geo.n_cells; ++i) {
    const int g = geo.group_of(i);
    for (int l = 0; l < n_lanes_; ++l) times_[g * n_lanes_ + l] += grid.at(i, l).travel_time;
  }
}

double generalized_cost(const Vehicle& v, int group, int lane, const DecisionContext& ctx) {
  double cost = v.vot * ctx.times.at(group, lane);
  if (lane == ctx.geometry.ml_lane()) {
    cost += group_charge(v, ctx.ml_tolls[group], ctx.geometry.cells_per_group(), ctx.policy,
                         ctx.locav_toll_factor);
  }
  return cost;
}

Intent lane_change_intent(const Vehicle& v, int cell, int lane, const DecisionContext& ctx) {
  const Geometry& geo = ctx.geometry;
  const int ml = geo.ml_lane();
  const bool window = geo.in_lane_change_window(cell);
  // The managed lane is only entered or left inside a lane-change window.
  if (lane == ml && !window) return {};

  const int group = decision_group(cell, geo);
  if (lane > 0 && !lane_permitted(v, group, lane, geo, ctx.policy)) {
    const int here = geo.group_of(cell);
    const int last = lane == ml ? geo.last_window_cell(here) : geo.last_group_cell(here);
    return {-1, cell == last};
  }
  if (group >= geo.n_groups) return {};

  auto cost = [&](int l) {
    return lane_permitted(v, group, l, geo, ctx.policy) ? generalized_cost(v, group, l, ctx) : kInf;
  };
  const double here = generalized_cost(v, group, lane, ctx);
  double down = kInf;
  if (lane > 0 && lane_permitted(v, group, lane - 1, geo, ctx.policy)) {
    for (int l = 0; l < lane; ++l) down = std::min(down, cost(l));
  }
  double up = kInf;
  if (lane < ml && lane_permitted(v, group, lane + 1, geo, ctx.policy)) {
    for (int l = lane + 1; l <= ml; ++l) up = std::min(up, cost(l));
  }
  const bool can_rise = lane + 1 < ml || (lane + 1 == ml && window);

  const double threshold = ctx.lane_change_cost;
  if (down + threshold < here && down < up) return {-1, false};
  if (can_rise && up + threshold < here && up < down) return {+1, false};
  return {};
}

int DemandTally::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }

DemandTally aggregate_demand(const LaneGrid& grid, std::span<const Intent> intents) {
  const Geometry& geo = grid.geometry();
  DemandTally tally(geo.n_cells, geo.n_lanes);
  for (int i = 0; i < geo.n_cells; ++i) {
    for (int l = 0; l < geo.n_lanes; ++l) {
      for (int id : grid.at(i, l).vehicles) {
        const int m = intents[id].move;
        if (m != 0) ++tally.at(i, l, m);
      }
    }
  }
  return tally;
}

}  // namespace mlsim
