#include "mlsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mlsim/tolling.hpp"

namespace mlsim {

VehicleRecord finalize_vehicle(const Vehicle& v, const ScenarioConfig& config, int final_step) {
  VehicleRecord r;
  r.id = v.id;
  r.is_cav = v.is_cav;
  r.is_hov = v.is_hov();
  r.occupancy = v.occupancy;
  r.vot = v.vot;
  r.depart = v.depart;
  r.start_group = v.start_group;
  r.end_group = v.end_group;
  const double step_h = config.dt_hours();
  if (v.state == TripState::Pending) {
    r.censored = true;
  } else {
    const int end = v.state == TripState::Exited ? v.exited_step : final_step;
    const int entered = v.entered_step >= 0 ? v.entered_step : final_step;
    r.travel_time = (end - v.arrival_step) * step_h;
    r.queue_wait = (entered - v.arrival_step) * step_h;
    r.censored = v.state != TripState::Exited;
  }
  r.toll = v.toll_paid;
  r.drivers_cost = r.vot * r.travel_time + r.toll;
  r.tollable = ml_access(v, config.policy) == MlAccess::Tolled && v.end_group - v.start_group >= 2;
  r.tolled = r.toll > 0.0;
  return r;
}

std::string_view to_string(ClassFilter filter) {
  switch (filter) {
    case ClassFilter::All: return "ALL";
    case ClassFilter::Cav: return "CAV";
    case ClassFilter::Hov: return "HOV";
    case ClassFilter::Hdv: return "HDV";
  }
  return "?";
}

bool matches(const VehicleRecord& r, ClassFilter filter) {
  switch (filter) {
    case ClassFilter::All: return true;
    case ClassFilter::Cav: return r.is_cav;
    case ClassFilter::Hov: return r.is_hov;
    case ClassFilter::Hdv: return !r.is_cav;
  }
  return false;
}

GroupReport aggregate(std::span<const VehicleRecord> records, ClassFilter filter) {
  return aggregate(records, [filter](const VehicleRecord& r) { return matches(r, filter); });
}

GroupReport aggregate(std::span<const VehicleRecord> records,
                      const std::function<bool(const VehicleRecord&)>& keep) {
  GroupReport g;
  for (const auto& r : records) {
    if (!keep(r)) continue;
    ++g.vehicles;
    if (r.censored) ++g.censored;
    g.total_toll += r.toll;
    if (r.tolled) ++g.tolled_count;
    if (r.tollable) ++g.tollable_count;
    g.total_travel_time += r.travel_time;
    g.total_drivers_cost += r.drivers_cost;
    g.total_social_cost += r.vot * r.travel_time;
  }
  if (g.tolled_count > 0) g.avg_toll_per_tolled = g.total_toll / g.tolled_count;
  if (g.tollable_count > 0) g.tolled_pct = 100.0 * g.tolled_count / g.tollable_count;
  if (g.vehicles > 0) g.avg_travel_time = g.total_travel_time / g.vehicles;
  return g;
}

std::array<std::optional<double>, 9> report_values(const GroupReport& g) {
  const bool any_tollable = g.tollable_count > 0;
  auto when_tollable = [&](double v) -> std::optional<double> {
    return any_tollable ? std::optional<double>(v) : std::nullopt;
  };
  return {when_tollable(g.total_toll),
          when_tollable(g.tolled_count),
          when_tollable(g.tollable_count),
          g.avg_toll_per_tolled,
          g.tolled_pct,
          g.total_travel_time,
          g.avg_travel_time,
          g.total_drivers_cost,
          g.total_social_cost};
}

std::vector<LaneDiagnostic> lane_diagnostics(std::span<const DensityRow> trace,
                                             double cell_length) {
  struct Acc {
    int n = 0;
    int n_cav = 0;
    int cells = 0;
    double density = 0.0;
    double time = 0.0;
  };
  std::map<std::pair<int, int>, Acc> acc;
  for (const auto& row : trace) {
    Acc& a = acc[{row.step, row.lane}];
    a.n += row.n;
    a.n_cav += row.n_cav;
    a.cells += 1;
    a.density += row.k;
    a.time += cell_length / row.v;
  }
  std::vector<LaneDiagnostic> out;
  out.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    LaneDiagnostic d;
    d.step = key.first;
    d.lane = key.second;
    if (a.n > 0) d.cav_fraction = static_cast<double>(a.n_cav) / a.n;
    d.mean_density = a.density / a.cells;
    d.instantaneous_time = a.time;
    out.push_back(d);
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Summary stats_over_iterations(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("need at least two iterations for statistics");
  Summary s;
  s.n = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / (s.n - 1));
  std::vector<double> copy(values.begin(), values.end());
  s.median = percentile(copy, 0.5);
  s.p025 = percentile(copy, 0.025);
  s.p975 = percentile(std::move(copy), 0.975);
  return s;
}

}  // namespace mlsim
