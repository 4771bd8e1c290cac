#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlsim/fd.hpp"
#include "mlsim/scenario.hpp"

namespace mlsim {

/// One (cell, lane) of the finite-difference grid.
struct CellState {
  std::vector<int> vehicles;  // FIFO by cell-entry step
  int n_hdv = 0;
  int n_cav = 0;
  // Cached by LaneGrid::refresh for the current step.
  double density = 0.0;
  double critical = 0.0;  // 0 when empty
  double max_flow = 0.0;  // 0 when empty
  double flow = 0.0;
  double speed = 0.0;
  double travel_time = 0.0;

  int count() const { return n_hdv + n_cav; }
  MixState mix(double cell_length) const {
    return {static_cast<double>(n_hdv), static_cast<double>(n_cav), count() / cell_length};
  }
};

/// Lane-change request of one vehicle for the current step: -1 slower, +1 faster.
struct Intent {
  std::int8_t move = 0;
  bool forced = false;
};

struct LaneChangeEvent {
  int step = 0;
  int vehicle = 0;
  int from_lane = 0;
  int to_lane = 0;
  bool forced = false;
};

/// Totals moved during one step.
struct StepFlows {
  int forward = 0;
  int down = 0;
  int up = 0;
  int forced = 0;
  int entered = 0;
  int exited = 0;
  int queued = 0;  // arrivals added to entry queues
};

class EngineError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class LaneGrid {
 public:
  LaneGrid(const Geometry& geometry, const FdParams& fd, double dt_seconds);

  const Geometry& geometry() const { return geometry_; }
  const FdParams& fd() const { return fd_; }
  double dt_seconds() const { return dt_; }

  CellState& at(int cell, int lane) { return cells_[index(cell, lane)]; }
  const CellState& at(int cell, int lane) const { return cells_[index(cell, lane)]; }

  /// Vertical queue of vehicles waiting to enter at the start of a group.
  std::deque<int>& queue(int group) { return queues_[group]; }
  const std::deque<int>& queue(int group) const { return queues_[group]; }

  /// Puts a vehicle straight onto the road as if it had entered at `step` (warm starts, tests).
  void place(Vehicle& v, int cell, int lane, int step);

  /// Recomputes every cell's counts and FD caches from its vehicle list.
  void refresh(std::span<const Vehicle> vehicles);

  int on_road() const;
  int queued() const;
  int injected() const { return injected_; }
  int exited() const { return exited_; }

  // Fractional-flow carry per boundary.
  double& forward_residual(int cell, int lane) { return forward_res_[index(cell, lane)]; }
  double& lateral_residual(int cell, int lane, int move) {
    return lateral_res_[2 * index(cell, lane) + (move > 0 ? 1 : 0)];
  }
  double& entry_residual(int group, int lane) { return entry_res_[group * geometry_.n_lanes + lane]; }

 private:
  friend StepFlows advance_step(LaneGrid&, std::vector<Vehicle>&, std::span<const Intent>,
                                std::span<const int>, int, std::vector<LaneChangeEvent>*);

  std::size_t index(int cell, int lane) const {
    return static_cast<std::size_t>(cell) * geometry_.n_lanes + lane;
  }

  Geometry geometry_;
  FdParams fd_;
  double dt_;
  std::vector<CellState> cells_;
  std::vector<std::deque<int>> queues_;
  std::vector<double> forward_res_;
  std::vector<double> lateral_res_;
  std::vector<double> entry_res_;
  int injected_ = 0;
  int exited_ = 0;
};

/// Vehicles that may advance from src to its downstream neighbour this step (real-valued).
/// Destination gaps use the destination's mix; an empty destination borrows the source mix.
double longitudinal_allowance(const MixState& src, const MixState& dst, const FdParams& fd,
                              double dt_seconds, double cell_length);

/// Vehicles that may move laterally from src into tgt given `demand` requests.
double lane_change_allowance(double demand, const MixState& src, const MixState& tgt,
                             const FdParams& fd, double dt_seconds);

/// Whole vehicles to move for a real allowance; carries the fraction in `residual`.
int integerize(double allowance, double& residual);

/// Applies one time step: exits, longitudinal advance, lane changes (slower lanes first,
/// then faster), forced merges, then ramp entries. `intents` is indexed by vehicle id and
/// `arrivals` lists vehicles whose departure falls in this step.
/// Throws EngineError if vehicle bookkeeping stops balancing.
StepFlows advance_step(LaneGrid& grid, std::vector<Vehicle>& vehicles,
                       std::span<const Intent> intents, std::span<const int> arrivals, int step,
                       std::vector<LaneChangeEvent>* events = nullptr);

}  // namespace mlsim
