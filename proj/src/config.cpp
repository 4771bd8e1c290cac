#include "mlsim/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace mlsim {

namespace {

using Setter = std::function<void(ScenarioConfig&, const YAML::Node&, const std::string&)>;

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError(key, "expected a scalar value");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, "cannot parse '" + node.Scalar() + "'");
  }
}

template <typename T, typename Get>
Setter field(Get get) {
  return [get](ScenarioConfig& c, const YAML::Node& n, const std::string& key) {
    get(c) = scalar<T>(n, key);
  };
}

// Occupancy pmf keys are occupancies (1..n); group pmfs are keyed by group index.
std::vector<double> pmf(const YAML::Node& node, const std::string& key, int first_key) {
  std::vector<double> out;
  if (node.IsSequence()) {
    for (const auto& item : node) out.push_back(scalar<double>(item, key));
    return out;
  }
  if (node.IsMap()) {
    std::map<int, double> entries;
    for (const auto& kv : node) {
      const int k = scalar<int>(kv.first, key);
      if (k < first_key) throw ConfigError(key, "pmf key out of range");
      entries[k] = scalar<double>(kv.second, key);
    }
    if (entries.empty()) return out;
    out.assign(static_cast<std::size_t>(entries.rbegin()->first - first_key + 1), 0.0);
    for (const auto& [k, p] : entries) out[k - first_key] = p;
    return out;
  }
  throw ConfigError(key, "expected a list or a map of probabilities");
}

Setter pmf_field(std::vector<double> DemandParams::*member, int first_key) {
  return [member, first_key](ScenarioConfig& c, const YAML::Node& n, const std::string& key) {
    c.demand.*member = pmf(n, key, first_key);
  };
}

void set_trapezoid(ScenarioConfig& c, const YAML::Node& n, const std::string& key) {
  Trapezoid& t = c.demand.departure_dist;
  if (n.IsSequence()) {
    if (n.size() != 4) throw ConfigError(key, "expected four values a, b, c, d");
    t = {scalar<double>(n[0], key), scalar<double>(n[1], key), scalar<double>(n[2], key),
         scalar<double>(n[3], key)};
    return;
  }
  if (!n.IsMap()) throw ConfigError(key, "expected [a, b, c, d] or a map with keys a..d");
  for (const auto& kv : n) {
    const auto name = scalar<std::string>(kv.first, key);
    double* slot = name == "a" ? &t.a : name == "b" ? &t.b : name == "c" ? &t.c
                 : name == "d" ? &t.d : nullptr;
    if (!slot) throw ConfigError(key + "." + name, "unknown key");
    *slot = scalar<double>(kv.second, key + "." + name);
  }
}

void set_policy(ScenarioConfig& c, const YAML::Node& n, const std::string& key) {
  const auto name = scalar<std::string>(n, key);
  const auto p = parse_policy(name);
  if (!p) throw ConfigError(key, "unknown policy '" + name + "'");
  c.policy = *p;
}

struct Registry {
  std::map<std::string, std::map<std::string, Setter>> sections;
  std::map<std::string, std::string> owner;  // flat key -> section
};

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    auto add = [&r](const std::string& section, const std::string& key, Setter s) {
      r.sections[section][key] = std::move(s);
      r.owner[key] = section;
    };
    add("fd", "q_H0", field<double>([](ScenarioConfig& c) -> double& { return c.fd.q_H0; }));
    add("fd", "q_A0", field<double>([](ScenarioConfig& c) -> double& { return c.fd.q_A0; }));
    add("fd", "w_H", field<double>([](ScenarioConfig& c) -> double& { return c.fd.w_H; }));
    add("fd", "w_A", field<double>([](ScenarioConfig& c) -> double& { return c.fd.w_A; }));
    add("fd", "s_f", field<double>([](ScenarioConfig& c) -> double& { return c.fd.s_f; }));
    add("fd", "s_min", field<double>([](ScenarioConfig& c) -> double& { return c.fd.s_min; }));
    add("fd", "q_Hm", field<double>([](ScenarioConfig& c) -> double& { return c.fd.q_Hm; }));
    add("fd", "q_Am", field<double>([](ScenarioConfig& c) -> double& { return c.fd.q_Am; }));
    add("fd", "k_jH", field<double>([](ScenarioConfig& c) -> double& { return c.fd.k_jH; }));
    add("fd", "k_jA", field<double>([](ScenarioConfig& c) -> double& { return c.fd.k_jA; }));

    add("geometry", "n_lanes",
        field<int>([](ScenarioConfig& c) -> int& { return c.geometry.n_lanes; }));
    add("geometry", "highway_length",
        field<double>([](ScenarioConfig& c) -> double& { return c.geometry.highway_length; }));
    add("geometry", "cell_length",
        field<double>([](ScenarioConfig& c) -> double& { return c.geometry.cell_length; }));
    add("geometry", "n_cells",
        field<int>([](ScenarioConfig& c) -> int& { return c.geometry.n_cells; }));
    add("geometry", "n_groups",
        field<int>([](ScenarioConfig& c) -> int& { return c.geometry.n_groups; }));
    add("geometry", "n_lc_cells",
        field<int>([](ScenarioConfig& c) -> int& { return c.geometry.n_lc_cells; }));

    add("demand", "n_vehicles",
        field<int>([](ScenarioConfig& c) -> int& { return c.demand.n_vehicles; }));
    add("demand", "cav_mpr",
        field<double>([](ScenarioConfig& c) -> double& { return c.demand.cav_mpr; }));
    add("demand", "hocav_mpr",
        field<double>([](ScenarioConfig& c) -> double& { return c.demand.hocav_mpr; }));
    add("demand", "vot_mean",
        field<double>([](ScenarioConfig& c) -> double& { return c.demand.vot_mean; }));
    add("demand", "vot_sd",
        field<double>([](ScenarioConfig& c) -> double& { return c.demand.vot_sd; }));
    add("demand", "vot_lo",
        field<double>([](ScenarioConfig& c) -> double& { return c.demand.vot_lo; }));
    add("demand", "vot_hi",
        field<double>([](ScenarioConfig& c) -> double& { return c.demand.vot_hi; }));
    add("demand", "occupancy_pmf", pmf_field(&DemandParams::occupancy_pmf, 1));
    add("demand", "start_group_pmf", pmf_field(&DemandParams::start_group_pmf, 0));
    add("demand", "end_group_pmf", pmf_field(&DemandParams::end_group_pmf, 0));
    add("demand", "departure_dist", set_trapezoid);

    add("toll", "pi_min", field<double>([](ScenarioConfig& c) -> double& { return c.toll.pi_min; }));
    add("toll", "pi_max", field<double>([](ScenarioConfig& c) -> double& { return c.toll.pi_max; }));
    add("toll", "pi_step",
        field<double>([](ScenarioConfig& c) -> double& { return c.toll.pi_step; }));
    add("toll", "theta", field<double>([](ScenarioConfig& c) -> double& { return c.toll.theta; }));
    add("toll", "horizon",
        field<double>([](ScenarioConfig& c) -> double& { return c.toll.horizon; }));

    add("", "policy", set_policy);
    add("", "n_iterations", field<int>([](ScenarioConfig& c) -> int& { return c.n_iterations; }));
    add("", "dt", field<double>([](ScenarioConfig& c) -> double& { return c.dt; }));
    add("", "t_start", field<double>([](ScenarioConfig& c) -> double& { return c.t_start; }));
    add("", "t_end", field<double>([](ScenarioConfig& c) -> double& { return c.t_end; }));
    add("", "seed",
        field<std::uint64_t>([](ScenarioConfig& c) -> std::uint64_t& { return c.seed; }));
    add("", "lane_change_cost",
        field<double>([](ScenarioConfig& c) -> double& { return c.lane_change_cost; }));
    add("", "locav_toll_factor",
        field<double>([](ScenarioConfig& c) -> double& { return c.locav_toll_factor; }));
    return r;
  }();
  return reg;
}

}  // namespace

ScenarioConfig load_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("document", std::string("parse failure: ") + e.what());
  }
  ScenarioConfig config;
  if (root.IsNull()) {
    validate(config);
    return config;
  }
  if (!root.IsMap()) throw ConfigError("document", "top level must be a mapping");

  const Registry& reg = registry();
  bool cell_length_given = false;
  auto apply = [&](const std::string& key, const YAML::Node& value) {
    const auto it = reg.owner.find(key);
    if (it == reg.owner.end()) throw ConfigError(key, "unknown key");
    reg.sections.at(it->second).at(key)(config, value, key);
    if (key == "cell_length") cell_length_given = true;
  };

  for (const auto& kv : root) {
    const auto key = scalar<std::string>(kv.first, "document");
    const auto section = reg.sections.find(key);
    if (section != reg.sections.end() && !key.empty()) {
      if (kv.second.IsNull()) continue;
      if (!kv.second.IsMap()) throw ConfigError(key, "section must be a mapping");
      for (const auto& inner : kv.second) {
        const auto name = scalar<std::string>(inner.first, key);
        if (!section->second.count(name)) throw ConfigError(key + "." + name, "unknown key");
        apply(name, inner.second);
      }
      continue;
    }
    apply(key, kv.second);
  }
  if (!cell_length_given && config.geometry.n_cells > 0) {
    config.geometry.cell_length = config.geometry.highway_length / config.geometry.n_cells;
  }
  // Omitted trailing pmf entries are zero.
  auto pad = [](std::vector<double>& pmf, int size) {
    if (size > 0 && pmf.size() < static_cast<std::size_t>(size)) pmf.resize(size, 0.0);
  };
  pad(config.demand.occupancy_pmf, 3);
  pad(config.demand.start_group_pmf, config.geometry.n_groups);
  pad(config.demand.end_group_pmf, config.geometry.n_groups);
  validate(config);
  return config;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_config(buffer.str());
}

std::string dump_config(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(15);
  out << YAML::BeginMap;
  out << YAML::Key << "policy" << YAML::Value << std::string(to_string(c.policy));
  out << YAML::Key << "n_iterations" << YAML::Value << c.n_iterations;
  out << YAML::Key << "dt" << YAML::Value << c.dt;
  out << YAML::Key << "t_start" << YAML::Value << c.t_start;
  out << YAML::Key << "t_end" << YAML::Value << c.t_end;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "lane_change_cost" << YAML::Value << c.lane_change_cost;
  out << YAML::Key << "locav_toll_factor" << YAML::Value << c.locav_toll_factor;

  out << YAML::Key << "fd" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "q_H0" << YAML::Value << c.fd.q_H0;
  out << YAML::Key << "q_A0" << YAML::Value << c.fd.q_A0;
  out << YAML::Key << "w_H" << YAML::Value << c.fd.w_H;
  out << YAML::Key << "w_A" << YAML::Value << c.fd.w_A;
  out << YAML::Key << "s_f" << YAML::Value << c.fd.s_f;
  out << YAML::Key << "s_min" << YAML::Value << c.fd.s_min;
  out << YAML::Key << "q_Hm" << YAML::Value << c.fd.q_Hm;
  out << YAML::Key << "q_Am" << YAML::Value << c.fd.q_Am;
  out << YAML::Key << "k_jH" << YAML::Value << c.fd.k_jH;
  out << YAML::Key << "k_jA" << YAML::Value << c.fd.k_jA;
  out << YAML::EndMap;

  out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_lanes" << YAML::Value << c.geometry.n_lanes;
  out << YAML::Key << "highway_length" << YAML::Value << c.geometry.highway_length;
  out << YAML::Key << "cell_length" << YAML::Value << c.geometry.cell_length;
  out << YAML::Key << "n_cells" << YAML::Value << c.geometry.n_cells;
  out << YAML::Key << "n_groups" << YAML::Value << c.geometry.n_groups;
  out << YAML::Key << "n_lc_cells" << YAML::Value << c.geometry.n_lc_cells;
  out << YAML::EndMap;

  out << YAML::Key << "demand" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_vehicles" << YAML::Value << c.demand.n_vehicles;
  out << YAML::Key << "cav_mpr" << YAML::Value << c.demand.cav_mpr;
  out << YAML::Key << "hocav_mpr" << YAML::Value << c.demand.hocav_mpr;
  out << YAML::Key << "occupancy_pmf" << YAML::Value << YAML::Flow << c.demand.occupancy_pmf;
  out << YAML::Key << "vot_mean" << YAML::Value << c.demand.vot_mean;
  out << YAML::Key << "vot_sd" << YAML::Value << c.demand.vot_sd;
  out << YAML::Key << "vot_lo" << YAML::Value << c.demand.vot_lo;
  out << YAML::Key << "vot_hi" << YAML::Value << c.demand.vot_hi;
  out << YAML::Key << "start_group_pmf" << YAML::Value << YAML::Flow << c.demand.start_group_pmf;
  out << YAML::Key << "end_group_pmf" << YAML::Value << YAML::Flow << c.demand.end_group_pmf;
  const auto& t = c.demand.departure_dist;
  out << YAML::Key << "departure_dist" << YAML::Value << YAML::Flow
      << std::vector<double>{t.a, t.b, t.c, t.d};
  out << YAML::EndMap;

  out << YAML::Key << "toll" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pi_min" << YAML::Value << c.toll.pi_min;
  out << YAML::Key << "pi_max" << YAML::Value << c.toll.pi_max;
  out << YAML::Key << "pi_step" << YAML::Value << c.toll.pi_step;
  out << YAML::Key << "theta" << YAML::Value << c.toll.theta;
  out << YAML::Key << "horizon" << YAML::Value << c.toll.horizon;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mlsim
