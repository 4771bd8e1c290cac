// Command-line front end: simulate, sweep, fd-table, analyze-conversion.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mlsim/analysis.hpp"
#include "mlsim/config.hpp"
#include "mlsim/csv.hpp"
#include "mlsim/fd.hpp"
#include "mlsim/harness.hpp"
#include "mlsim/mesh.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mlsim;

namespace {

struct Common {
  std::string config_path;
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "YAML scenario file (defaults when omitted)");
  cmd->add_option("--policy", c.policy, "EU1..EU4, AU1, ST1, ST2, AT1");
  cmd->add_option("--seed", c.seed, "root seed");
  cmd->add_option("--iterations", c.iterations, "Monte Carlo iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig config = c.config_path.empty() ? load_config("") : load_config_file(c.config_path);
  if (!c.policy.empty()) {
    const auto p = parse_policy(c.policy);
    if (!p) throw ConfigError("policy", "unknown policy '" + c.policy + "'");
    config.policy = *p;
  }
  if (c.seed) config.seed = *c.seed;
  if (c.iterations) config.n_iterations = *c.iterations;
  validate(config);
  return config;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
}

void print_error(const std::string& kind, const std::string& field, const std::string& message) {
  json line{{"error", kind}, {"message", message}};
  if (!field.empty()) line["field"] = field;
  std::cerr << line.dump() << '\n';
}

int run_simulate(const Common& common, const std::string& out_dir, bool traces, bool records) {
  const ScenarioConfig config = resolve(common);
  MonteCarloOptions options;
  options.threads = common.threads;
  options.keep_records = records;
  if (traces) options.traces = {true, true, 10, true, true};
  const MonteCarloResult result = run_monte_carlo(config, options);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, result); });
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result); });
  write_file(dir / "config.yaml", [&](std::ostream& o) { o << dump_config(config); });
  const RunResult& first = result.runs.front();
  write_file(dir / "tolls.csv", [&](std::ostream& o) { write_toll_csv(o, first); });
  if (traces) {
    write_file(dir / "density.csv", [&](std::ostream& o) { write_density_csv(o, first); });
    write_file(dir / "trajectories.csv", [&](std::ostream& o) { write_trajectory_csv(o, first); });
    write_file(dir / "events.csv", [&](std::ostream& o) { write_event_csv(o, first); });
    write_file(dir / "lanes.csv", [&](std::ostream& o) { write_lane_csv(o, first); });
  }
  if (records) {
    write_file(dir / "vehicles.csv", [&](std::ostream& o) { write_vehicle_csv(o, first); });
  }

  const auto& s = result.summary(ClassFilter::All);
  auto mean_of = [&](std::size_t m) {
    return s[m] ? format_number(s[m]->mean) : std::string("/");
  };
  std::cout << "policy=" << to_string(config.policy) << " iterations=" << config.n_iterations
            << " avg_travel_time_h=" << mean_of(6) << " total_social_cost=" << mean_of(8)
            << " total_toll=" << mean_of(0) << " out=" << dir.string() << '\n';
  return 0;
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_sweep_cmd(const Common& common, const std::string& axis_name, const std::string& values,
                  const std::string& out_path) {
  const auto axis = parse_axis(axis_name);
  if (!axis) throw ConfigError("axis", "unknown axis '" + axis_name + "'");
  SweepSpec spec;
  spec.axis = *axis;
  spec.values = split_values(values);
  if (spec.values.empty()) throw ConfigError("values", "no sweep values given");
  spec.base = resolve(common);
  const auto points = run_sweep(spec, common.threads);
  if (out_path.empty() || out_path == "-") {
    write_sweep_csv(std::cout, spec.axis, points);
  } else {
    const fs::path path(out_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path, [&](std::ostream& o) { write_sweep_csv(o, spec.axis, points); });
  }
  return 0;
}

int run_fd_table(const Common& common, int fractions, double density_step) {
  const ScenarioConfig config = resolve(common);
  const FdParams& p = config.fd;
  std::cout << "cav_fraction,k,q,v,k_cr,q_max\n";
  for (int f = 0; f <= fractions; ++f) {
    const double share = static_cast<double>(f) / fractions;
    const MixState unit{1.0 - share, share, 0.0};
    const double k_cr = critical_density(unit, p);
    const double q_max = max_flow(unit, p);
    const double k_jam = jam_density(unit, p);
    for (double k = 0.0; k <= k_jam + 1e-9; k += density_step) {
      const MixState mix{1.0 - share, share, k};
      std::cout << format_number(share) << ',' << format_number(k) << ','
                << format_number(flow(mix, p)) << ',' << format_number(speed(mix, p)) << ','
                << format_number(k_cr) << ',' << format_number(q_max) << '\n';
    }
  }
  return 0;
}

int run_analyze(const Common& common, ConversionScenario s, double savings_a, double savings_b) {
  s.params = resolve(common).fd;
  const ConversionBenefit b = marginal_benefit(s);
  json out{
      {"scenario",
       {{"ml_cav_fraction", s.ml_cav_fraction},
        {"ml_density_ratio", s.ml_density_ratio},
        {"gpl_density", s.gpl_density},
        {"mean_vot", s.mean_vot},
        {"cell_length", s.cell_length}}},
      {"ml_vehicles", b.ml_vehicles},
      {"dkcr_dnA", b.dkcr_dnA},
      {"shifted_vehicles", b.shifted_vehicles},
      {"gpl_flow", b.gpl_flow},
      {"gpl_time_h", b.gpl_time},
      {"ml_time_h", b.ml_time},
      {"dd_dn", b.dd_dn},
      {"shifted_term", b.shifted_term},
      {"remaining_term", b.remaining_term},
      {"per_vehicle_value", b.per_vehicle_value},
      {"benefit", b.benefit},
      {"annual_benefit", annualize(savings_a + savings_b, 2.0, 250.0)},
  };
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Managed-lane mixed-traffic simulator"};
  app.require_subcommand(1);

  Common common;
  std::string out_dir = "out";
  bool traces = false;
  bool records = false;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of one policy");
  add_common(simulate, common);
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_flag("--traces", traces, "write density, trajectory, event and lane traces");
  simulate->add_flag("--records", records, "write per-vehicle records of iteration 0");

  std::string axis;
  std::string values;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo summaries along one parameter axis");
  add_common(sweep, common);
  sweep->add_option("--axis", axis, "cav_mpr, locav_toll_factor, hocav_mpr or policy")->required();
  sweep->add_option("--values", values, "comma-separated axis values")->required();
  sweep->add_option("--out", sweep_out, "CSV path (stdout when omitted)");

  int fractions = 10;
  double density_step = 1.0;
  auto* fd_table = app.add_subcommand("fd-table", "Tabulate the mixed fundamental diagram");
  add_common(fd_table, common);
  fd_table->add_option("--fractions", fractions, "CAV-share subdivisions")->check(CLI::PositiveNumber);
  fd_table->add_option("--density-step", density_step, "veh/km")->check(CLI::PositiveNumber);

  ConversionScenario scenario;
  double savings_a = 9.3;
  double savings_b = 13.8;
  auto* analyze = app.add_subcommand("analyze-conversion", "Closed-form HOHDV to HOCAV benefit");
  add_common(analyze, common);
  analyze->add_option("--ml-cav-fraction", scenario.ml_cav_fraction);
  analyze->add_option("--ml-density-ratio", scenario.ml_density_ratio);
  analyze->add_option("--gpl-density", scenario.gpl_density);
  analyze->add_option("--mean-vot", scenario.mean_vot);
  analyze->add_option("--cell-length", scenario.cell_length);
  analyze->add_option("--shift-savings", savings_a, "USD per trip from shifted vehicles");
  analyze->add_option("--remaining-savings", savings_b, "USD per trip from remaining vehicles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", "", e.what());
    return 2;
  }

  try {
    if (*simulate) return run_simulate(common, out_dir, traces, records);
    if (*sweep) return run_sweep_cmd(common, axis, values, sweep_out);
    if (*fd_table) return run_fd_table(common, fractions, density_step);
    if (*analyze) return run_analyze(common, scenario, savings_a, savings_b);
  } catch (const ConfigError& e) {
    print_error("config", e.field(), e.what());
    return 2;
  } catch (const EngineError& e) {
    print_error("engine", "", e.what());
    return 3;
  } catch (const std::exception& e) {
    print_error("runtime", "", e.what());
    return 1;
  }
  return 1;
}
