#include "mlsim/mesh.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace mlsim {

namespace {

enum Action : std::uint8_t { kStay = 0, kDown, kUp, kForced, kMoved };

void add_vehicle(CellState& cell, const Vehicle& v) {
  cell.vehicles.push_back(v.id);
  (v.is_cav ? cell.n_cav : cell.n_hdv) += 1;
}

void drop_counts(CellState& cell, const Vehicle& v) { (v.is_cav ? cell.n_cav : cell.n_hdv) -= 1; }

MixState single_vehicle_mix(const Vehicle& v) {
  return {v.is_cav ? 0.0 : 1.0, v.is_cav ? 1.0 : 0.0, 0.0};
}

// Vehicles the cell can still physically hold, up to its jam density.
double entry_gaps(const CellState& cell, const Vehicle& head, const FdParams& fd,
                  double cell_length) {
  const MixState mix = cell.count() > 0 ? cell.mix(cell_length) : single_vehicle_mix(head);
  const double gaps = (jam_density(mix, fd) - cell.count() / cell_length) * cell_length;
  return std::max(0.0, gaps);
}

}  // namespace

LaneGrid::LaneGrid(const Geometry& geometry, const FdParams& fd, double dt_seconds)
    : geometry_(geometry),
      fd_(fd),
      dt_(dt_seconds),
      cells_(static_cast<std::size_t>(geometry.n_cells * geometry.n_lanes)),
      queues_(static_cast<std::size_t>(geometry.n_groups)),
      forward_res_(cells_.size(), 0.0),
      lateral_res_(2 * cells_.size(), 0.0),
      entry_res_(static_cast<std::size_t>(geometry.n_groups * geometry.n_lanes), 0.0) {
  refresh({});
}

void LaneGrid::refresh(std::span<const Vehicle> vehicles) {
  const double len = geometry_.cell_length;
  for (auto& cell : cells_) {
    cell.n_hdv = 0;
    cell.n_cav = 0;
    for (int id : cell.vehicles) (vehicles[id].is_cav ? cell.n_cav : cell.n_hdv) += 1;
    const MixState mix = cell.mix(len);
    cell.density = mix.density;
    if (cell.count() > 0) {
      cell.critical = critical_density(mix, fd_);
      cell.max_flow = cell.critical * fd_.s_f;
      cell.flow = flow(mix, fd_);
    } else {
      cell.critical = 0.0;
      cell.max_flow = 0.0;
      cell.flow = 0.0;
    }
    cell.speed = speed(mix, fd_);
    cell.travel_time = len / cell.speed;
  }
}

void LaneGrid::place(Vehicle& v, int cell, int lane, int step) {
  if (cell < 0 || cell >= geometry_.n_cells || lane < 0 || lane >= geometry_.n_lanes) {
    throw std::out_of_range("place: cell or lane outside the grid");
  }
  add_vehicle(at(cell, lane), v);
  v.state = TripState::Active;
  v.cell = cell;
  v.lane = lane;
  v.arrival_step = step;
  v.entered_step = step;
  v.cell_entry_step = step;
  ++injected_;
}

int LaneGrid::on_road() const {
  int total = 0;
  for (const auto& cell : cells_) total += static_cast<int>(cell.vehicles.size());
  return total;
}

int LaneGrid::queued() const {
  int total = 0;
  for (const auto& q : queues_) total += static_cast<int>(q.size());
  return total;
}

double longitudinal_allowance(const MixState& src, const MixState& dst, const FdParams& fd,
                              double dt_seconds, double cell_length) {
  const double n = src.total();
  if (!(n > 0.0)) return 0.0;
  const double capacity = max_flow(src, fd) * dt_seconds / 3600.0;
  const double critical = dst.total() > 0.0 ? critical_density(dst, fd) : critical_density(src, fd);
  const double gaps = (critical - dst.density) * cell_length;
  return std::max(0.0, std::min({n, capacity, gaps}));
}

double lane_change_allowance(double demand, const MixState& src, const MixState& tgt,
                             const FdParams& fd, double dt_seconds) {
  if (!(demand > 0.0) || !(src.total() > 0.0)) return 0.0;
  const double capacity = max_flow(src, fd) * dt_seconds / 3600.0;
  const double critical = tgt.total() > 0.0 ? critical_density(tgt, fd) : critical_density(src, fd);
  const double supply = capacity * (1.0 - tgt.density / critical);
  return std::max(0.0, std::min(demand, supply));
}

int integerize(double allowance, double& residual) {
  if (!(allowance > 0.0)) return 0;
  const double total = allowance + residual;
  // Tolerance keeps repeated fractional carries from losing a vehicle to rounding.
  const double whole = std::floor(total + 1e-9);
  residual = std::max(0.0, total - whole);
  return static_cast<int>(whole);
}

StepFlows advance_step(LaneGrid& grid, std::vector<Vehicle>& vehicles,
                       std::span<const Intent> intents, std::span<const int> arrivals, int step,
                       std::vector<LaneChangeEvent>* events) {
  const Geometry& geo = grid.geometry_;
  const FdParams& fd = grid.fd_;
  const int n_lanes = geo.n_lanes;
  const int n_cells = geo.n_cells;
  const double len = geo.cell_length;
  const double dt = grid.dt_;
  StepFlows flows;

  auto finish_trip = [&](Vehicle& v) {
    v.state = TripState::Exited;
    v.exited_step = step;
    v.cell = -1;
    ++grid.exited_;
    ++flows.exited;
  };

  // (1) Exits at the start cell of the group following each trip's last group, slowest lane.
  for (int g = 0; g + 1 < geo.n_groups; ++g) {
    CellState& cell = grid.at(geo.group_start(g + 1), 0);
    std::erase_if(cell.vehicles, [&](int id) {
      Vehicle& v = vehicles[id];
      if (v.end_group > g) return false;
      drop_counts(cell, v);
      finish_trip(v);
      return true;
    });
  }

  for (int id : arrivals) {
    Vehicle& v = vehicles[id];
    v.state = TripState::Queued;
    v.arrival_step = step;
    grid.queues_[v.start_group].push_back(id);
    ++grid.injected_;
    ++flows.queued;
  }

  // Lateral outcomes are settled against the start-of-step occupancy.
  std::vector<std::uint8_t> action(vehicles.size(), kStay);
  std::vector<int> pending_hdv(grid.cells_.size(), 0);
  std::vector<int> pending_cav(grid.cells_.size(), 0);
  std::vector<int> requesters;
  auto pending_mix = [&](int i, int l) {
    const CellState& c = grid.at(i, l);
    const std::size_t k = grid.index(i, l);
    const double hdv = c.n_hdv + pending_hdv[k];
    const double cav = c.n_cav + pending_cav[k];
    return MixState{hdv, cav, (hdv + cav) / len};
  };
  auto mark_pending = [&](int i, int l, const Vehicle& v) {
    (v.is_cav ? pending_cav : pending_hdv)[grid.index(i, l)] += 1;
  };

  for (int i = 0; i < n_cells; ++i) {
    // (3) fast lane to slow lane
    for (int l = 1; l < n_lanes; ++l) {
      const CellState& src = grid.at(i, l);
      requesters.clear();
      for (int id : src.vehicles) {
        if (intents[id].move < 0) requesters.push_back(id);
      }
      if (requesters.empty()) continue;
      const double allowance = lane_change_allowance(
          static_cast<double>(requesters.size()), src.mix(len), pending_mix(i, l - 1), fd, dt);
      const int granted = std::min(integerize(allowance, grid.lateral_residual(i, l, -1)),
                                   static_cast<int>(requesters.size()));
      for (int r = 0; r < static_cast<int>(requesters.size()); ++r) {
        const int id = requesters[r];
        if (r < granted) {
          action[id] = kDown;
        } else if (intents[id].forced) {
          action[id] = kForced;
        } else {
          continue;
        }
        mark_pending(i, l - 1, vehicles[id]);
      }
    }
    // (4) slow lane to fast lane, after the slower-lane arrivals are accounted for
    for (int l = 0; l + 1 < n_lanes; ++l) {
      const CellState& src = grid.at(i, l);
      requesters.clear();
      for (int id : src.vehicles) {
        if (intents[id].move > 0) requesters.push_back(id);
      }
      if (requesters.empty()) continue;
      const double allowance = lane_change_allowance(
          static_cast<double>(requesters.size()), src.mix(len), pending_mix(i, l + 1), fd, dt);
      const int granted = std::min(integerize(allowance, grid.lateral_residual(i, l, +1)),
                                   static_cast<int>(requesters.size()));
      for (int r = 0; r < granted; ++r) {
        action[requesters[r]] = kUp;
        mark_pending(i, l + 1, vehicles[requesters[r]]);
      }
    }
  }

  // (2) Longitudinal advance, downstream cells first so each destination has already
  // discharged; through traffic ahead of vehicles whose lane change did not go through.
  std::vector<int> candidates;
  std::vector<int> remaining;
  for (int i = n_cells - 1; i >= 0; --i) {
    for (int l = 0; l < n_lanes; ++l) {
      CellState& src = grid.at(i, l);
      if (src.vehicles.empty()) continue;
      candidates.clear();
      for (int id : src.vehicles) {
        if (action[id] == kStay && intents[id].move == 0) candidates.push_back(id);
      }
      for (int id : src.vehicles) {
        if (action[id] == kStay && intents[id].move != 0) candidates.push_back(id);
      }
      if (candidates.empty()) continue;

      int moving = 0;
      if (i == n_cells - 1) {
        moving = static_cast<int>(candidates.size());
      } else {
        const double allowance =
            longitudinal_allowance(src.mix(len), grid.at(i + 1, l).mix(len), fd, dt, len);
        moving = std::min(integerize(allowance, grid.forward_residual(i, l)),
                          static_cast<int>(candidates.size()));
      }
      if (moving == 0) continue;

      for (int r = 0; r < moving; ++r) {
        Vehicle& v = vehicles[candidates[r]];
        drop_counts(src, v);
        action[v.id] = kMoved;
        if (i == n_cells - 1) {
          finish_trip(v);
        } else {
          add_vehicle(grid.at(i + 1, l), v);
          v.cell = i + 1;
          v.cell_entry_step = step;
          ++flows.forward;
        }
      }
      remaining.clear();
      for (int id : src.vehicles) {
        if (action[id] != kMoved) remaining.push_back(id);
      }
      src.vehicles.swap(remaining);
    }
  }

  // (3)-(5) Apply lateral moves in priority order.
  struct Move {
    int id;
    int cell;
    int from;
    int to;
  };
  std::vector<Move> down_moves, up_moves, forced_moves;
  for (int i = 0; i < n_cells; ++i) {
    for (int l = 0; l < n_lanes; ++l) {
      CellState& src = grid.at(i, l);
      bool any = false;
      for (int id : src.vehicles) {
        switch (action[id]) {
          case kDown: down_moves.push_back({id, i, l, l - 1}); any = true; break;
          case kUp: up_moves.push_back({id, i, l, l + 1}); any = true; break;
          case kForced: forced_moves.push_back({id, i, l, l - 1}); any = true; break;
          default: break;
        }
      }
      if (!any) continue;
      std::erase_if(src.vehicles, [&](int id) {
        const auto a = action[id];
        if (a == kDown || a == kUp || a == kForced) {
          drop_counts(src, vehicles[id]);
          return true;
        }
        return false;
      });
    }
  }
  auto apply = [&](const std::vector<Move>& moves, int& counter, bool forced) {
    for (const auto& m : moves) {
      Vehicle& v = vehicles[m.id];
      add_vehicle(grid.at(m.cell, m.to), v);
      v.lane = m.to;
      v.cell_entry_step = step;
      ++counter;
      if (events) events->push_back({step, m.id, m.from, m.to, forced});
    }
  };
  apply(down_moves, flows.down, false);
  apply(up_moves, flows.up, false);
  apply(forced_moves, flows.forced, true);

  // (6) Entries from the vertical queues. The upstream boundary feeds every general lane;
  // interior ramps feed the slowest lane only.
  const int entry_lanes_upstream = n_lanes - 1;
  std::vector<int> slots(static_cast<std::size_t>(n_lanes), 0);
  for (int g = 0; g < geo.n_groups; ++g) {
    auto& q = grid.queues_[g];
    if (q.empty()) continue;
    const int c = geo.group_start(g);
    const int lanes = g == 0 ? entry_lanes_upstream : 1;
    const Vehicle& head = vehicles[q.front()];
    for (int l = 0; l < lanes; ++l) {
      slots[l] = integerize(entry_gaps(grid.at(c, l), head, fd, len), grid.entry_residual(g, l));
    }
    while (!q.empty()) {
      Vehicle& v = vehicles[q.front()];
      const int allowed = (v.start_group == v.end_group) ? 1 : lanes;
      int best = -1;
      for (int l = 0; l < allowed; ++l) {
        if (slots[l] > 0 && (best < 0 || slots[l] > slots[best])) best = l;
      }
      if (best < 0) break;
      q.pop_front();
      --slots[best];
      add_vehicle(grid.at(c, best), v);
      v.state = TripState::Active;
      v.lane = best;
      v.cell = c;
      v.entered_step = step;
      v.cell_entry_step = step;
      ++flows.entered;
    }
  }

  const int balance = grid.on_road() + grid.queued() + grid.exited_;
  if (balance != grid.injected_) {
    throw EngineError(fmt::format("step {}: {} on road + {} queued + {} exited != {} injected", step,
                                  grid.on_road(), grid.queued(), grid.exited_, grid.injected_));
  }
  return flows;
}

}  // namespace mlsim
