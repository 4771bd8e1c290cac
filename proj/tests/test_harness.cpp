#include <doctest.h>

#include <sstream>
#include <string>

#include "mlsim/csv.hpp"
#include "mlsim/harness.hpp"

using namespace mlsim;

namespace {

ScenarioConfig small(int iterations = 4) {
  ScenarioConfig c{};
  c.n_iterations = iterations;
  c.demand.n_vehicles = 800;
  c.t_end = 8.0;
  c.demand.departure_dist = {7.0, 7.1, 7.3, 7.5};
  return c;
}

std::string summary_csv(const MonteCarloResult& r) {
  std::ostringstream out;
  write_summary_csv(out, r);
  return out.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

int count_lines(const std::string& s) {
  int n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(11550.0) == "11550");
  CHECK(format_number(0.1345678912345) == "0.1345678912");
  CHECK(format_optional(std::nullopt) == "/");
  CHECK(format_optional(2.0) == "2");
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream out;
  write_csv_row(out, {"x", "y,z", "w"});
  CHECK(out.str() == "x,\"y,z\",w\n");
}

TEST_CASE("serial and parallel Monte Carlo agree byte for byte") {
  const ScenarioConfig c = small(6);
  const MonteCarloResult serial = run_monte_carlo(c);
  MonteCarloOptions par;
  par.threads = 4;
  const MonteCarloResult parallel = run_monte_carlo(c, par);
  CHECK(summary_csv(serial) == summary_csv(parallel));
  std::ostringstream a, b;
  write_report_csv(a, serial);
  write_report_csv(b, parallel);
  CHECK(a.str() == b.str());
  REQUIRE(serial.runs.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(serial.runs[i].iteration == i);
    CHECK(serial.runs[i].checksum() == parallel.runs[i].checksum());
    CHECK(serial.runs[i].records.empty());
  }
}

TEST_CASE("records and traces are kept on request") {
  MonteCarloOptions opt;
  opt.keep_records = true;
  opt.traces.density = true;
  const MonteCarloResult r = run_monte_carlo(small(2), opt);
  CHECK(r.runs[0].records.size() == 800);
  CHECK_FALSE(r.runs[0].density.empty());
  CHECK(r.runs[1].density.empty());
  // Thinning changes no report number.
  CHECK(summary_csv(r) == summary_csv(run_monte_carlo(small(2))));
}

TEST_CASE("summary rows") {
  const MonteCarloResult r = run_monte_carlo(small(3));
  const std::string csv = summary_csv(r);
  CHECK(first_line(csv) == "policy,class,metric,n,mean,median,sd,p2.5,p97.5");
  CHECK(count_lines(csv) == 1 + 4 * 9);
  const auto& tt = r.summary(ClassFilter::All)[6];
  REQUIRE(tt.has_value());
  const auto values = r.metric_values(ClassFilter::All, 6);
  CHECK(values.size() == 3);
  CHECK(tt->mean == doctest::Approx((values[0] + values[1] + values[2]) / 3.0));

  std::ostringstream rep;
  write_report_csv(rep, r);
  CHECK(first_line(rep.str()).rfind("policy,class,iteration,Total toll ($)", 0) == 0);
  CHECK(count_lines(rep.str()) == 1 + 4 * (3 + 1));
  CHECK(rep.str().find("ST1,ALL,summary,") != std::string::npos);

  // One iteration: no interval can be formed.
  const MonteCarloResult one = run_monte_carlo(small(1));
  CHECK_FALSE(one.summary(ClassFilter::All)[6].has_value());
  CHECK(summary_csv(one).find("0,/,/,/,/,/") != std::string::npos);
}

TEST_CASE("sweep axes") {
  CHECK(parse_axis("hocav_mpr") == SweepAxis::HocavMpr);
  CHECK_FALSE(parse_axis("speed").has_value());
  const ScenarioConfig base = small();
  CHECK(apply_axis(base, SweepAxis::CavMpr, "0.7").demand.cav_mpr == 0.7);
  CHECK(apply_axis(base, SweepAxis::LocavTollFactor, "0.25").locav_toll_factor == 0.25);
  CHECK(apply_axis(base, SweepAxis::HocavMpr, "1").demand.hocav_mpr == 1.0);
  CHECK(apply_axis(base, SweepAxis::Policy, "EU3").policy == Policy::EU3);
  CHECK_THROWS_AS(apply_axis(base, SweepAxis::CavMpr, "1.5"), ConfigError);
  CHECK_THROWS_AS(apply_axis(base, SweepAxis::CavMpr, "abc"), ConfigError);
  CHECK_THROWS_AS(apply_axis(base, SweepAxis::CavMpr, "0.5x"), ConfigError);
  CHECK_THROWS_AS(apply_axis(base, SweepAxis::Policy, "EU9"), ConfigError);
}

TEST_CASE("policy sweep yields one block per policy") {
  SweepSpec spec;
  spec.axis = SweepAxis::Policy;
  spec.base = small(2);
  spec.base.demand.n_vehicles = 200;
  for (Policy p : kAllPolicies) spec.values.emplace_back(to_string(p));
  const auto points = run_sweep(spec, 2);
  REQUIRE(points.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) CHECK(points[k].result.config.policy == kAllPolicies[k]);
  std::ostringstream out;
  write_sweep_csv(out, spec.axis, points);
  CHECK(first_line(out.str()) == "axis,value,policy,class,metric,mean,sd,p2.5,p97.5");
  CHECK(count_lines(out.str()) == 1 + 8 * 4 * 9);
}

TEST_CASE("conversion sweep shares one population") {
  SweepSpec spec;
  spec.axis = SweepAxis::HocavMpr;
  spec.base = small(2);
  spec.values = {"0", "1"};
  const auto points = run_sweep(spec);
  // The number of vehicles and their departures are common; only CAV labels differ.
  CHECK(points[0].result.summary(ClassFilter::All)[6]->n ==
        points[1].result.summary(ClassFilter::All)[6]->n);
  const auto& hov0 = points[0].result.runs[0].report(ClassFilter::Hov);
  const auto& hov1 = points[1].result.runs[0].report(ClassFilter::Hov);
  CHECK(hov0.vehicles == hov1.vehicles);
  CHECK(points[1].result.runs[0].report(ClassFilter::Cav).vehicles ==
        points[0].result.runs[0].report(ClassFilter::Cav).vehicles +
            [&] {
              Rng rng = make_iteration_rng(spec.base.seed, 0);
              int n = 0;
              for (const auto& v : sample_population(spec.base, rng)) n += v.is_hov() && !v.is_cav;
              return n;
            }());
}

TEST_CASE("trace writers") {
  ScenarioConfig c = small(1);
  TraceOptions t;
  t.density = t.trajectories = t.events = t.lanes = true;
  const RunResult r = run_once(c, 0, t);
  std::ostringstream d, tr, to, ev, la, ve;
  write_density_csv(d, r);
  write_trajectory_csv(tr, r);
  write_toll_csv(to, r);
  write_event_csv(ev, r);
  write_lane_csv(la, r);
  write_vehicle_csv(ve, r);
  CHECK(first_line(d.str()) == "step,lane,cell,n,n_cav,k,q,v");
  CHECK(first_line(tr.str()) == "vehicle,step,lane,cell");
  CHECK(first_line(to.str()) == "horizon,group,toll_per_cell");
  CHECK(first_line(ev.str()) == "step,vehicle,from_lane,to_lane,forced");
  CHECK(first_line(la.str()) == "step,lane,cav_fraction,mean_density,instantaneous_time");
  CHECK(count_lines(d.str()) == 1 + static_cast<int>(r.density.size()));
  CHECK(count_lines(to.str()) == 1 + static_cast<int>(r.tolls.size()) * 5);
  CHECK(count_lines(ve.str()) == 1 + 800);
}
