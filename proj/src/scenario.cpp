#include "mlsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace mlsim {

namespace {

constexpr std::array<std::string_view, 8> kPolicyNames{"EU1", "EU2", "EU3", "EU4",
                                                       "AU1", "ST1", "ST2", "AT1"};

void require(bool ok, const char* field, const std::string& reason) {
  if (!ok) throw ConfigError(field, reason);
}

void check_pmf(const std::vector<double>& pmf, std::size_t size, const char* field) {
  require(pmf.size() == size, field, fmt::format("expected {} entries, got {}", size, pmf.size()));
  for (double p : pmf) require(p >= 0.0 && p <= 1.0, field, "probabilities must lie in [0,1]");
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  require(std::abs(total - 1.0) <= 1e-9, field, fmt::format("must sum to 1 (sums to {})", total));
}

int sample_index(Rng& rng, const std::vector<double>& pmf) {
  std::discrete_distribution<int> dist(pmf.begin(), pmf.end());
  return dist(rng);
}

}  // namespace

std::string_view to_string(Policy policy) { return kPolicyNames[static_cast<int>(policy)]; }

std::optional<Policy> parse_policy(std::string_view name) {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i) {
    if (kPolicyNames[i] == name) return static_cast<Policy>(i);
  }
  return std::nullopt;
}

bool is_exclusive_use(Policy policy) {
  return policy == Policy::EU1 || policy == Policy::EU2 || policy == Policy::EU3 ||
         policy == Policy::EU4;
}

int Geometry::charging_cell(int group) const {
  if (group < 0 || group >= n_groups) {
    throw std::out_of_range(fmt::format("group {} outside [0,{})", group, n_groups));
  }
  return cells_per_group() * group + n_lc_cells;
}

int Geometry::group_of(int cell) const {
  if (cell < 0 || cell >= n_cells) {
    throw std::out_of_range(fmt::format("cell {} outside [0,{})", cell, n_cells));
  }
  return cell / cells_per_group();
}

int ScenarioConfig::n_steps() const {
  return static_cast<int>(std::lround((t_end - t_start) * 3600.0 / dt));
}

int ScenarioConfig::steps_per_horizon() const {
  return static_cast<int>(std::lround(toll.horizon * 60.0 / dt));
}

void validate(const ScenarioConfig& c) {
  const auto& fd = c.fd;
  require(fd.q_H0 > 0.0, "q_H0", "must be > 0");
  require(fd.q_A0 > fd.q_H0, "q_A0", "must exceed q_H0");
  require(fd.w_H > 0.0, "w_H", "must be > 0");
  require(fd.w_A > fd.w_H, "w_A", "must exceed w_H");
  require(fd.s_min > 0.0, "s_min", "must be > 0");
  require(fd.s_f > fd.s_min, "s_f", "must exceed s_min");
  const double cap_h = fd.q_H0 * fd.s_f / (fd.s_f + fd.w_H);
  const double cap_a = fd.q_A0 * fd.s_f / (fd.s_f + fd.w_A);
  require(std::abs(cap_h - fd.q_Hm) <= 0.01 * fd.q_Hm, "q_Hm",
          fmt::format("implied HDV capacity {:.1f} differs from q_Hm by more than 1%", cap_h));
  require(std::abs(cap_a - fd.q_Am) <= 0.01 * fd.q_Am, "q_Am",
          fmt::format("implied CAV capacity {:.1f} differs from q_Am by more than 1%", cap_a));

  const auto& g = c.geometry;
  require(g.n_lanes >= 2, "n_lanes", "n_lanes must be ≥ 2");
  require(g.n_cells > 0, "n_cells", "must be > 0");
  require(g.n_groups > 0 && g.n_groups <= 64, "n_groups", "must be in [1,64]");
  require(g.n_cells % g.n_groups == 0, "n_cells", "must be divisible by n_groups");
  require(g.n_lc_cells >= 1, "n_lc_cells", "must be ≥ 1");
  require(g.cells_per_group() > g.n_lc_cells, "n_lc_cells", "must be smaller than the group size");
  require(g.cell_length > 0.0, "cell_length", "must be > 0");
  require(std::abs(g.n_cells * g.cell_length - g.highway_length) <= 1e-6, "cell_length",
          "n_cells × cell_length must equal highway_length");

  require(c.dt > 0.0, "dt", "must be > 0");
  require(c.t_start < c.t_end, "t_end", "must be after t_start");
  require(c.n_iterations >= 1, "n_iterations", "must be ≥ 1");
  require(c.lane_change_cost >= 0.0, "lane_change_cost", "must be ≥ 0");
  require(c.locav_toll_factor >= 0.0 && c.locav_toll_factor <= 1.0, "locav_toll_factor",
          "must lie in [0,1]");

  const auto& t = c.toll;
  require(t.pi_min >= 0.0, "pi_min", "must be ≥ 0");
  require(t.pi_max > t.pi_min, "pi_max", "must exceed pi_min");
  require(t.pi_step > 0.0, "pi_step", "must be > 0");
  require(t.theta > 0.0 && t.theta <= 1.0, "theta", "must lie in (0,1]");
  const double horizon_steps = t.horizon * 60.0 / c.dt;
  require(t.horizon > 0.0 && std::abs(horizon_steps - std::round(horizon_steps)) < 1e-9, "horizon",
          "must be a positive multiple of dt");

  const auto& d = c.demand;
  require(d.n_vehicles >= 0, "n_vehicles", "must be ≥ 0");
  require(d.cav_mpr >= 0.0 && d.cav_mpr <= 1.0, "cav_mpr", "must lie in [0,1]");
  require(d.hocav_mpr >= 0.0 && d.hocav_mpr <= 1.0, "hocav_mpr", "must lie in [0,1]");
  check_pmf(d.occupancy_pmf, 3, "occupancy_pmf");
  check_pmf(d.start_group_pmf, static_cast<std::size_t>(g.n_groups), "start_group_pmf");
  check_pmf(d.end_group_pmf, static_cast<std::size_t>(g.n_groups), "end_group_pmf");
  for (int s = 0; s < g.n_groups; ++s) {
    if (d.start_group_pmf[s] == 0.0) continue;
    double reachable = 0.0;
    for (int e = s; e < g.n_groups; ++e) reachable += d.end_group_pmf[e];
    require(reachable > 0.0, "end_group_pmf",
            fmt::format("no end group ≥ start group {} has positive probability", s));
  }
  require(d.vot_sd >= 0.0, "vot_sd", "must be ≥ 0");
  require(d.vot_lo < d.vot_mean && d.vot_mean < d.vot_hi, "vot_mean",
          "must satisfy vot_lo < vot_mean < vot_hi");
  const auto& tr = d.departure_dist;
  require(tr.a <= tr.b && tr.b <= tr.c && tr.c <= tr.d, "departure_dist", "requires a ≤ b ≤ c ≤ d");
}

Rng make_iteration_rng(std::uint64_t seed, int iteration) {
  return Rng(seed ^ static_cast<std::uint64_t>(iteration));
}

double sample_truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  if (sd == 0.0) return std::clamp(mean, lo, hi);
  std::normal_distribution<double> normal(mean, sd);
  for (;;) {
    const double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
}

double sample_trapezoidal(Rng& rng, double a, double b, double c, double d) {
  if (d <= a) return a;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  // Peak height of the density so that the total area is one.
  const double h = 2.0 / ((d - a) + (c - b));
  const double rise_mass = 0.5 * h * (b - a);
  const double flat_mass = h * (c - b);
  if (u < rise_mass) return a + std::sqrt(2.0 * u * (b - a) / h);
  if (u < rise_mass + flat_mass) return b + (u - rise_mass) / h;
  const double tail = std::max(0.0, 1.0 - u);
  return d - std::sqrt(2.0 * tail * (d - c) / h);
}

std::vector<Vehicle> sample_population(const ScenarioConfig& config, Rng& rng) {
  const auto& d = config.demand;
  std::vector<Vehicle> vehicles;
  vehicles.reserve(static_cast<std::size_t>(d.n_vehicles));
  std::bernoulli_distribution cav(d.cav_mpr);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < d.n_vehicles; ++k) {
    Vehicle v;
    v.is_cav = cav(rng);
    v.occupancy = 1 + sample_index(rng, d.occupancy_pmf);
    v.vot = sample_truncated_normal(rng, d.vot_mean, d.vot_sd, d.vot_lo, d.vot_hi) * v.occupancy;
    const auto& tr = d.departure_dist;
    v.depart = sample_trapezoidal(rng, tr.a, tr.b, tr.c, tr.d);
    v.start_group = sample_index(rng, d.start_group_pmf);
    do {
      v.end_group = sample_index(rng, d.end_group_pmf);
    } while (v.end_group < v.start_group);
    v.conversion_draw = unit(rng);
    if (v.is_hov() && !v.is_cav && v.conversion_draw < d.hocav_mpr) v.is_cav = true;
    vehicles.push_back(v);
  }
  std::stable_sort(vehicles.begin(), vehicles.end(),
                   [](const Vehicle& x, const Vehicle& y) { return x.depart < y.depart; });
  for (std::size_t k = 0; k < vehicles.size(); ++k) vehicles[k].id = static_cast<int>(k);
  return vehicles;
}

}  // namespace mlsim
