#include "mlsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "mlsim/csv.hpp"

namespace mlsim {

std::vector<double> MonteCarloResult::metric_values(ClassFilter filter, std::size_t metric) const {
  std::vector<double> out;
  for (const auto& run : runs) {
    const auto v = report_values(run.report(filter))[metric];
    if (v) out.push_back(*v);
  }
  return out;
}

std::array<MetricSummaries, 4> summarize(const std::vector<RunResult>& runs) {
  std::array<MetricSummaries, 4> out{};
  for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
    for (std::size_t m = 0; m < kReportMetrics.size(); ++m) {
      std::vector<double> values;
      for (const auto& run : runs) {
        const auto v = report_values(run.reports[c])[m];
        if (v) values.push_back(*v);
      }
      if (values.size() >= 2) out[c][m] = stats_over_iterations(values);
    }
  }
  return out;
}

MonteCarloResult run_monte_carlo(const ScenarioConfig& config, const MonteCarloOptions& options) {
  validate(config);
  MonteCarloResult result;
  result.config = config;
  const int n = config.n_iterations;
  result.runs.resize(static_cast<std::size_t>(n));

  auto work = [&](int it) {
    RunResult run = run_once(config, it, it == 0 ? options.traces : TraceOptions{});
    if (!options.keep_records) {
      run.records.clear();
      run.records.shrink_to_fit();
    }
    result.runs[static_cast<std::size_t>(it)] = std::move(run);
  };

  const int threads = std::clamp(options.threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int it = 0; it < n; ++it) work(it);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int it = next++; it < n; it = next++) {
          try {
            work(it);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  result.summaries = summarize(result.runs);
  return result;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::CavMpr: return "cav_mpr";
    case SweepAxis::LocavTollFactor: return "locav_toll_factor";
    case SweepAxis::HocavMpr: return "hocav_mpr";
    case SweepAxis::Policy: return "policy";
  }
  return "?";
}

std::optional<SweepAxis> parse_axis(std::string_view name) {
  for (auto a : {SweepAxis::CavMpr, SweepAxis::LocavTollFactor, SweepAxis::HocavMpr,
                 SweepAxis::Policy}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, const std::string& value) {
  ScenarioConfig c = base;
  const std::string name(to_string(axis));
  if (axis == SweepAxis::Policy) {
    const auto p = parse_policy(value);
    if (!p) throw ConfigError(name, "unknown policy '" + value + "'");
    c.policy = *p;
  } else {
    double x = 0.0;
    try {
      std::size_t used = 0;
      x = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError(name, "cannot parse '" + value + "'");
    }
    switch (axis) {
      case SweepAxis::CavMpr: c.demand.cav_mpr = x; break;
      case SweepAxis::LocavTollFactor: c.locav_toll_factor = x; break;
      case SweepAxis::HocavMpr: c.demand.hocav_mpr = x; break;
      case SweepAxis::Policy: break;
    }
  }
  validate(c);
  return c;
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int threads) {
  std::vector<SweepPoint> points;
  for (const auto& value : spec.values) apply_axis(spec.base, spec.axis, value);  // fail early
  for (const auto& value : spec.values) {
    MonteCarloOptions options;
    options.threads = threads;
    points.push_back({value, run_monte_carlo(apply_axis(spec.base, spec.axis, value), options)});
  }
  return points;
}

namespace {

std::vector<std::string> report_header() {
  std::vector<std::string> h{"policy", "class", "iteration"};
  for (auto m : kReportMetrics) h.emplace_back(m);
  return h;
}

}  // namespace

void write_report_csv(std::ostream& out, const MonteCarloResult& result) {
  write_csv_row(out, report_header());
  const std::string policy(to_string(result.config.policy));
  for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
    const std::string cls(to_string(kAllClasses[c]));
    for (const auto& run : result.runs) {
      std::vector<std::string> row{policy, cls, std::to_string(run.iteration)};
      for (const auto& v : report_values(run.reports[c])) row.push_back(format_optional(v));
      write_csv_row(out, row);
    }
    std::vector<std::string> row{policy, cls, "summary"};
    for (const auto& s : result.summaries[c]) {
      row.push_back(s ? format_number(s->mean) : std::string("/"));
    }
    write_csv_row(out, row);
  }
}

void write_summary_csv(std::ostream& out, const MonteCarloResult& result) {
  write_csv_row(out, {"policy", "class", "metric", "n", "mean", "median", "sd", "p2.5", "p97.5"});
  const std::string policy(to_string(result.config.policy));
  for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
    for (std::size_t m = 0; m < kReportMetrics.size(); ++m) {
      const auto& s = result.summaries[c][m];
      std::vector<std::string> row{policy, std::string(to_string(kAllClasses[c])),
                                   std::string(kReportMetrics[m])};
      if (s) {
        for (double v : {double(s->n), s->mean, s->median, s->sd, s->p025, s->p975}) {
          row.push_back(format_number(v));
        }
      } else {
        row.insert(row.end(), {"0", "/", "/", "/", "/", "/"});
      }
      write_csv_row(out, row);
    }
  }
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepPoint>& points) {
  write_csv_row(out, {"axis", "value", "policy", "class", "metric", "mean", "sd", "p2.5", "p97.5"});
  const std::string name(to_string(axis));
  for (const auto& point : points) {
    const std::string policy(to_string(point.result.config.policy));
    for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
      for (std::size_t m = 0; m < kReportMetrics.size(); ++m) {
        const auto& s = point.result.summaries[c][m];
        std::vector<std::string> row{name, point.value, policy,
                                     std::string(to_string(kAllClasses[c])),
                                     std::string(kReportMetrics[m])};
        if (s) {
          for (double v : {s->mean, s->sd, s->p025, s->p975}) row.push_back(format_number(v));
        } else {
          row.insert(row.end(), {"/", "/", "/", "/"});
        }
        write_csv_row(out, row);
      }
    }
  }
}

void write_density_csv(std::ostream& out, const RunResult& run) {
  out << "step,lane,cell,n,n_cav,k,q,v\n";
  for (const auto& r : run.density) {
    out << r.step << ',' << r.lane << ',' << r.cell << ',' << r.n << ',' << r.n_cav << ','
        << format_number(r.k) << ',' << format_number(r.q) << ',' << format_number(r.v) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const RunResult& run) {
  out << "vehicle,step,lane,cell\n";
  for (const auto& r : run.trajectories) {
    out << r.vehicle << ',' << r.step << ',' << r.lane << ',' << r.cell << '\n';
  }
}

void write_toll_csv(std::ostream& out, const RunResult& run) {
  out << "horizon,group,toll_per_cell\n";
  for (std::size_t h = 0; h < run.tolls.size(); ++h) {
    for (std::size_t g = 0; g < run.tolls[h].size(); ++g) {
      out << h << ',' << g << ',' << format_number(run.tolls[h][g]) << '\n';
    }
  }
}

void write_event_csv(std::ostream& out, const RunResult& run) {
  out << "step,vehicle,from_lane,to_lane,forced\n";
  for (const auto& e : run.events) {
    out << e.step << ',' << e.vehicle << ',' << e.from_lane << ',' << e.to_lane << ','
        << (e.forced ? 1 : 0) << '\n';
  }
}

void write_lane_csv(std::ostream& out, const RunResult& run) {
  out << "step,lane,cav_fraction,mean_density,instantaneous_time\n";
  for (const auto& d : run.lanes) {
    out << d.step << ',' << d.lane << ',' << format_optional(d.cav_fraction) << ','
        << format_number(d.mean_density) << ',' << format_number(d.instantaneous_time) << '\n';
  }
}

void write_vehicle_csv(std::ostream& out, const RunResult& run) {
  out << "id,is_cav,occupancy,vot,depart,start_group,end_group,travel_time,queue_wait,toll,"
         "drivers_cost,tolled,tollable,censored\n";
  for (const auto& r : run.records) {
    out << r.id << ',' << (r.is_cav ? 1 : 0) << ',' << r.occupancy << ',' << format_number(r.vot)
        << ',' << format_number(r.depart) << ',' << r.start_group << ',' << r.end_group << ','
        << format_number(r.travel_time) << ',' << format_number(r.queue_wait) << ','
        << format_number(r.toll) << ',' << format_number(r.drivers_cost) << ','
        << (r.tolled ? 1 : 0) << ',' << (r.tollable ? 1 : 0) << ',' << (r.censored ? 1 : 0)
        << '\n';
  }
}

}  // namespace mlsim
