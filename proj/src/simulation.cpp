#include "mlsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mlsim/behavior.hpp"

namespace mlsim {

namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

template <typename T>
void hash_value(std::uint64_t& h, const T& value) {
  hash_bytes(h, &value, sizeof(value));
}

// Adds the managed lane's density and critical density of every group for one step.
void accumulate_ml_density(const LaneGrid& grid, TollSchedule& schedule) {
  const Geometry& geo = grid.geometry();
  const int ml = geo.ml_lane();
  const int size = geo.cells_per_group();
  for (int g = 0; g < geo.n_groups; ++g) {
    int hdv = 0;
    int cav = 0;
    for (int i = geo.group_start(g); i < geo.group_start(g) + size; ++i) {
      hdv += grid.at(i, ml).n_hdv;
      cav += grid.at(i, ml).n_cav;
    }
    // Empty cells take the critical density of the group's current mix (pure HDV if none).
    const MixState group_mix = hdv + cav > 0 ? MixState{double(hdv), double(cav), 0.0}
                                             : MixState{1.0, 0.0, 0.0};
    const double fallback = critical_density(group_mix, grid.fd());
    double sum_k = 0.0;
    double sum_cr = 0.0;
    for (int i = geo.group_start(g); i < geo.group_start(g) + size; ++i) {
      const CellState& c = grid.at(i, ml);
      sum_k += c.density;
      sum_cr += c.count() > 0 ? c.critical : fallback;
    }
    schedule.accumulate(g, sum_k, sum_cr);
  }
}

void record_lanes(const LaneGrid& grid, int step, std::vector<LaneDiagnostic>& out) {
  const Geometry& geo = grid.geometry();
  for (int l = 0; l < geo.n_lanes; ++l) {
    int n = 0;
    int n_cav = 0;
    double density = 0.0;
    double time = 0.0;
    for (int i = 0; i < geo.n_cells; ++i) {
      const CellState& c = grid.at(i, l);
      n += c.count();
      n_cav += c.n_cav;
      density += c.density;
      time += c.travel_time;
    }
    LaneDiagnostic d;
    d.step = step;
    d.lane = l;
    if (n > 0) d.cav_fraction = static_cast<double>(n_cav) / n;
    d.mean_density = density / geo.n_cells;
    d.instantaneous_time = time;
    out.push_back(d);
  }
}

}  // namespace

std::uint64_t RunResult::checksum() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& r : records) {
    hash_value(h, r.id);
    hash_value(h, r.travel_time);
    hash_value(h, r.toll);
    hash_value(h, r.censored);
  }
  for (const auto& row : tolls) {
    for (double t : row) hash_value(h, t);
  }
  return h;
}

RunResult run_once(const ScenarioConfig& config, int iteration, const TraceOptions& traces,
                   StepObserver* observer) {
  Rng rng = make_iteration_rng(config.seed, iteration);
  return run_population(config, sample_population(config, rng), iteration, traces, observer);
}

RunResult run_population(const ScenarioConfig& config, std::vector<Vehicle> vehicles,
                         int iteration, const TraceOptions& traces, StepObserver* observer) {
  const Geometry& geo = config.geometry;
  const int n_steps = config.n_steps();
  const int per_horizon = config.steps_per_horizon();

  RunResult result;
  result.iteration = iteration;
  result.seed = config.seed ^ static_cast<std::uint64_t>(iteration);
  result.policy = config.policy;
  result.steps = n_steps;

  for (auto& v : vehicles) {
    const double offset = (v.depart - config.t_start) * 3600.0 / config.dt;
    v.arrival_step = std::max(0, static_cast<int>(std::floor(offset)));
  }

  LaneGrid grid(geo, config.fd, config.dt);
  TollSchedule schedule(geo.n_groups, config.toll);
  std::vector<Intent> intents(vehicles.size());
  std::vector<int> arrivals;
  std::vector<double> ml_tolls(static_cast<std::size_t>(geo.n_groups));
  std::size_t next_arrival = 0;
  std::vector<LaneChangeEvent>* events = traces.events ? &result.events : nullptr;

  for (int step = 0; step < n_steps; ++step) {
    grid.refresh(vehicles);

    if (step > 0 && step % per_horizon == 0) schedule.close_horizon();
    accumulate_ml_density(grid, schedule);
    for (int g = 0; g < geo.n_groups; ++g) ml_tolls[g] = schedule.current(g);

    if (traces.density) {
      for (int i = 0; i < geo.n_cells; ++i) {
        for (int l = 0; l < geo.n_lanes; ++l) {
          const CellState& c = grid.at(i, l);
          result.density.push_back({step, l, i, c.count(), c.n_cav, c.density, c.flow, c.speed});
        }
      }
    }
    if (traces.lanes) record_lanes(grid, step, result.lanes);

    const GroupTravelTimes times(grid);
    const DecisionContext ctx{geo, config.policy, config.lane_change_cost,
                              config.locav_toll_factor, times, ml_tolls};
    for (int i = 0; i < geo.n_cells; ++i) {
      for (int l = 0; l < geo.n_lanes; ++l) {
        for (int id : grid.at(i, l).vehicles) {
          intents[id] = lane_change_intent(vehicles[id], i, l, ctx);
        }
      }
    }

    arrivals.clear();
    while (next_arrival < vehicles.size() && vehicles[next_arrival].arrival_step <= step) {
      arrivals.push_back(static_cast<int>(next_arrival));
      ++next_arrival;
    }

    const StepFlows flows = advance_step(grid, vehicles, intents, arrivals, step, events);

    const int ml = geo.ml_lane();
    for (int g = 0; g < geo.n_groups; ++g) {
      for (int id : grid.at(geo.charging_cell(g), ml).vehicles) {
        charge(vehicles[id], g, ml_tolls[g], geo.cells_per_group(), config.policy,
               config.locav_toll_factor, result.ledger);
      }
    }

    if (traces.trajectories) {
      for (const auto& v : vehicles) {
        if (v.state == TripState::Active && v.id % traces.trajectory_every == 0) {
          result.trajectories.push_back({v.id, step, v.lane, v.cell});
        }
      }
    }
    if (observer) observer->after_step(step, grid, vehicles, flows);
  }

  result.tolls = schedule.history();
  result.records.reserve(vehicles.size());
  for (const auto& v : vehicles) result.records.push_back(finalize_vehicle(v, config, n_steps));
  for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
    result.reports[c] = aggregate(result.records, kAllClasses[c]);
  }
  return result;
}

}  // namespace mlsim
