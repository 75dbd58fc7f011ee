#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uavfog/error.hpp"

namespace uavfog {

/// Every physical, link, and algorithmic constant of a scenario.
///
/// Lengths are metres unless the field name says otherwise (`_mm`).
/// Defaults describe the desk-scale reference scenario; values marked
/// "assumed" have no published source and are documented in
/// configs/reference.cfg.
struct ScenarioConfig {
  // space and timeline
  double area_side = 5000.0;
  double area_height = 1000.0;
  double cell_size = 100.0;
  double slot_len = 0.1;
  int num_mds = 10;
  int num_channels = 40;
  double battery_capacity_wh = 5000.0;
  double v_max = 50.0;
  double z_max = 800.0;
  double epsilon = 0.5;

  // terrain
  double terrain_max_height = 450.0;
  double terrain_feature_size = 1500.0;
  int terrain_octaves = 3;

  // airframe
  double uav_mass = 80.0;
  double gravity = 9.81;
  double max_accel = 5.28;
  double arm_length_mm = 1150.0;
  double inertia_x = 0.095;
  double inertia_y = 0.095;
  double inertia_z = 0.187;
  double thrust_coeff = 1.483;
  double torque_coeff = 2.925;
  double rotor_speed_max = 15.0;  // r/min
  double motor_voltage = 12.0;
  double motor_resistance = 1.0;
  double motor_potential = 0.75;

  // air
  double gas_pressure = 101325.0;
  double gas_molar_mass_g = 29.0;
  double gas_constant = 8.314;
  double ambient_temperature = 288.15;

  // propeller
  int blade_count = 2;
  double prop_radius_mm = 512.0;
  double hub_radius_mm = 40.0;
  double blade_width_mm = 250.0;
  double blade_thickness_mm = 7.5;
  double mount_angle = 0.2;  // rad

  // links
  double carrier_freq = 2.4e9;
  double bandwidth_md_uav = 1.0e6;
  double bandwidth_uav_dc = 2.0e5;
  double noise_power = 1.0e-13;
  double interference = 0.0;
  double obstruction = 0.5;
  double dc_x = 0.0;
  double dc_y = 0.0;
  double dc_z = 30000.0;
  double p_dc = 5.0;
  int gamma_shape = 2;
  double gamma_rate = 2.0;

  // compute and queues
  double delta_uav = 1.0e-27;
  double delta_md = 1.0e-27;
  double f_uav_min = 1.0e9;
  double f_uav_max = 3.0e9;
  double f_md_min = 0.5e9;
  double f_md_max = 1.5e9;
  double p_uav_min = 0.1;
  double p_uav_max = 2.0;
  double p_md_min = 0.05;
  double p_md_max = 0.5;
  double queue_qbar = 0.5;
  double queue_tau = 1.0;
  double arrival_rate = 0.2;
  double task_size_mean = 5.0e6;
  double cycles_per_bit = 500.0;

  // trajectory planner
  int ants = 30;
  int acs_iterations = 60;
  double evaporation = 0.25;
  double pheromone_init = 3.8;
  double pheromone_floor = 0.38;
  double heuristic_base = 2.5;
  double acs_alpha = 1.0;
  double acs_beta = 2.0;
  double scan_radius = 200.0;
  double backtrack_depth = 200.0;
  double deposit_scale = 1.0;
  int quiet_limit = 25;
  double approach_radius = 200.0;

  // swarm
  int particles = 40;
  double accel_personal = 2.0;
  double accel_global = 2.0;
  double inertia_weight = 0.65;
  int stagnation_rounds = 20;
  double stagnation_tol = 1.0e-4;
  int pso_max_iterations = 2000;
  double velocity_clamp = 0.2;
  double penalty_weight = 1.0e3;

  // flight control
  double cruise_speed = 10.0;
  double track_tolerance = 5.0;
  double guidance_gain = 0.4;  // 1/s
  double vel_kp = 1.0;
  double vel_ki = 0.05;
  double vel_kd = 0.05;
  double att_kp = 64.0;
  double att_ki = 2.0;
  double att_kd = 16.0;
  double yaw_kp = 16.0;
  double yaw_ki = 0.5;
  double yaw_kd = 8.0;
  double fuzzy_vel_range = 5.0;   // m/s mapped onto |E| = 6
  double fuzzy_att_range = 0.2;   // rad
  double fuzzy_yaw_range = 0.5;   // rad
  double fuzzy_rate_factor = 5.0; // EC range = range * factor per second
  double fuzzy_kp_scale = 0.1;    // fraction of base gain per output unit
  double fuzzy_ki_scale = 0.1;
  double fuzzy_kd_scale = 0.1;

  std::uint64_t rng_seed = 1;

  /// SI molar mass (kg/mol).
  double gas_molar_mass() const { return gas_molar_mass_g * 1e-3; }
  double arm_length() const { return arm_length_mm * 1e-3; }
  double prop_radius() const { return prop_radius_mm * 1e-3; }
};

namespace detail {

using FieldPtr = std::variant<double ScenarioConfig::*, int ScenarioConfig::*,
                              std::uint64_t ScenarioConfig::*>;

struct FieldDef {
  std::string_view name;
  FieldPtr ptr;
};

#define UAVFOG_FIELD(n) FieldDef{#n, &ScenarioConfig::n}
inline const std::vector<FieldDef>& config_fields() {
  static const std::vector<FieldDef> fields = {
      UAVFOG_FIELD(area_side), UAVFOG_FIELD(area_height), UAVFOG_FIELD(cell_size),
      UAVFOG_FIELD(slot_len), UAVFOG_FIELD(num_mds), UAVFOG_FIELD(num_channels),
      UAVFOG_FIELD(battery_capacity_wh), UAVFOG_FIELD(v_max), UAVFOG_FIELD(z_max),
      UAVFOG_FIELD(epsilon), UAVFOG_FIELD(terrain_max_height),
      UAVFOG_FIELD(terrain_feature_size), UAVFOG_FIELD(terrain_octaves),
      UAVFOG_FIELD(uav_mass), UAVFOG_FIELD(gravity), UAVFOG_FIELD(max_accel),
      UAVFOG_FIELD(arm_length_mm), UAVFOG_FIELD(inertia_x), UAVFOG_FIELD(inertia_y),
      UAVFOG_FIELD(inertia_z), UAVFOG_FIELD(thrust_coeff), UAVFOG_FIELD(torque_coeff),
      UAVFOG_FIELD(rotor_speed_max), UAVFOG_FIELD(motor_voltage),
      UAVFOG_FIELD(motor_resistance), UAVFOG_FIELD(motor_potential),
      UAVFOG_FIELD(gas_pressure), UAVFOG_FIELD(gas_molar_mass_g),
      UAVFOG_FIELD(gas_constant), UAVFOG_FIELD(ambient_temperature),
      UAVFOG_FIELD(blade_count), UAVFOG_FIELD(prop_radius_mm), UAVFOG_FIELD(hub_radius_mm),
      UAVFOG_FIELD(blade_width_mm), UAVFOG_FIELD(blade_thickness_mm),
      UAVFOG_FIELD(mount_angle), UAVFOG_FIELD(carrier_freq),
      UAVFOG_FIELD(bandwidth_md_uav), UAVFOG_FIELD(bandwidth_uav_dc),
      UAVFOG_FIELD(noise_power), UAVFOG_FIELD(interference), UAVFOG_FIELD(obstruction),
      UAVFOG_FIELD(dc_x), UAVFOG_FIELD(dc_y), UAVFOG_FIELD(dc_z), UAVFOG_FIELD(p_dc),
      UAVFOG_FIELD(gamma_shape), UAVFOG_FIELD(gamma_rate), UAVFOG_FIELD(delta_uav),
      UAVFOG_FIELD(delta_md), UAVFOG_FIELD(f_uav_min), UAVFOG_FIELD(f_uav_max),
      UAVFOG_FIELD(f_md_min), UAVFOG_FIELD(f_md_max), UAVFOG_FIELD(p_uav_min),
      UAVFOG_FIELD(p_uav_max), UAVFOG_FIELD(p_md_min), UAVFOG_FIELD(p_md_max),
      UAVFOG_FIELD(queue_qbar), UAVFOG_FIELD(queue_tau), UAVFOG_FIELD(arrival_rate),
      UAVFOG_FIELD(task_size_mean), UAVFOG_FIELD(cycles_per_bit), UAVFOG_FIELD(ants),
      UAVFOG_FIELD(acs_iterations), UAVFOG_FIELD(evaporation),
      UAVFOG_FIELD(pheromone_init), UAVFOG_FIELD(pheromone_floor),
      UAVFOG_FIELD(heuristic_base), UAVFOG_FIELD(acs_alpha), UAVFOG_FIELD(acs_beta),
      UAVFOG_FIELD(scan_radius), UAVFOG_FIELD(backtrack_depth),
      UAVFOG_FIELD(deposit_scale), UAVFOG_FIELD(quiet_limit),
      UAVFOG_FIELD(approach_radius), UAVFOG_FIELD(particles),
      UAVFOG_FIELD(accel_personal), UAVFOG_FIELD(accel_global),
      UAVFOG_FIELD(inertia_weight), UAVFOG_FIELD(stagnation_rounds),
      UAVFOG_FIELD(stagnation_tol), UAVFOG_FIELD(pso_max_iterations),
      UAVFOG_FIELD(velocity_clamp), UAVFOG_FIELD(penalty_weight),
      UAVFOG_FIELD(cruise_speed), UAVFOG_FIELD(track_tolerance),
      UAVFOG_FIELD(guidance_gain), UAVFOG_FIELD(vel_kp), UAVFOG_FIELD(vel_ki),
      UAVFOG_FIELD(vel_kd), UAVFOG_FIELD(att_kp), UAVFOG_FIELD(att_ki), UAVFOG_FIELD(att_kd),
      UAVFOG_FIELD(yaw_kp), UAVFOG_FIELD(yaw_ki), UAVFOG_FIELD(yaw_kd),
      UAVFOG_FIELD(fuzzy_vel_range), UAVFOG_FIELD(fuzzy_att_range),
      UAVFOG_FIELD(fuzzy_yaw_range), UAVFOG_FIELD(fuzzy_rate_factor),
      UAVFOG_FIELD(fuzzy_kp_scale),
      UAVFOG_FIELD(fuzzy_ki_scale), UAVFOG_FIELD(fuzzy_kd_scale), UAVFOG_FIELD(rng_seed),
  };
  return fields;
}
#undef UAVFOG_FIELD

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : detail::config_fields()) out.emplace_back(f.name);
  return out;
}

/// Relative slack used on the propeller/arm structural bounds.
inline constexpr double kStructureTolerance = 1e-9;

/// Rejects (never clamps) any invariant violation.
inline void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("value must be positive: ") + key, key);
  };
  positive(c.area_side, "area_side");
  positive(c.area_height, "area_height");
  positive(c.cell_size, "cell_size");
  positive(c.slot_len, "slot_len");
  positive(c.battery_capacity_wh, "battery_capacity_wh");
  positive(c.v_max, "v_max");
  positive(c.z_max, "z_max");
  positive(c.uav_mass, "uav_mass");
  positive(c.gravity, "gravity");
  positive(c.max_accel, "max_accel");
  positive(c.arm_length_mm, "arm_length_mm");
  positive(c.inertia_x, "inertia_x");
  positive(c.inertia_y, "inertia_y");
  positive(c.inertia_z, "inertia_z");
  positive(c.thrust_coeff, "thrust_coeff");
  positive(c.torque_coeff, "torque_coeff");
  positive(c.rotor_speed_max, "rotor_speed_max");
  positive(c.motor_voltage, "motor_voltage");
  positive(c.motor_resistance, "motor_resistance");
  positive(c.motor_potential, "motor_potential");
  positive(c.gas_pressure, "gas_pressure");
  positive(c.gas_molar_mass_g, "gas_molar_mass_g");
  positive(c.gas_constant, "gas_constant");
  positive(c.ambient_temperature, "ambient_temperature");
  positive(c.prop_radius_mm, "prop_radius_mm");
  positive(c.hub_radius_mm, "hub_radius_mm");
  positive(c.blade_width_mm, "blade_width_mm");
  positive(c.blade_thickness_mm, "blade_thickness_mm");
  positive(c.mount_angle, "mount_angle");
  positive(c.carrier_freq, "carrier_freq");
  positive(c.bandwidth_md_uav, "bandwidth_md_uav");
  positive(c.bandwidth_uav_dc, "bandwidth_uav_dc");
  positive(c.noise_power, "noise_power");
  positive(c.obstruction, "obstruction");
  positive(c.p_dc, "p_dc");
  positive(c.gamma_rate, "gamma_rate");
  positive(c.delta_uav, "delta_uav");
  positive(c.delta_md, "delta_md");
  positive(c.arrival_rate, "arrival_rate");
  positive(c.task_size_mean, "task_size_mean");
  positive(c.cycles_per_bit, "cycles_per_bit");
  positive(c.queue_qbar, "queue_qbar");
  positive(c.queue_tau, "queue_tau");
  positive(c.pheromone_init, "pheromone_init");
  positive(c.heuristic_base, "heuristic_base");
  positive(c.scan_radius, "scan_radius");
  positive(c.backtrack_depth, "backtrack_depth");
  positive(c.deposit_scale, "deposit_scale");
  positive(c.cruise_speed, "cruise_speed");
  positive(c.track_tolerance, "track_tolerance");
  positive(c.velocity_clamp, "velocity_clamp");
  positive(c.penalty_weight, "penalty_weight");
  positive(c.guidance_gain, "guidance_gain");
  positive(c.fuzzy_vel_range, "fuzzy_vel_range");
  positive(c.fuzzy_att_range, "fuzzy_att_range");
  positive(c.fuzzy_yaw_range, "fuzzy_yaw_range");
  positive(c.fuzzy_rate_factor, "fuzzy_rate_factor");
  if (c.cruise_speed > c.v_max) throw ConfigError("cruise_speed exceeds v_max", "cruise_speed");

  if (c.num_mds < 0) throw ConfigError("num_mds must be >= 0", "num_mds");
  if (c.num_channels < 1) throw ConfigError("num_channels must be >= 1", "num_channels");
  if (c.epsilon < 0.05 || c.epsilon > 1.0)
    throw ConfigError("epsilon must lie in [0.05, 1.00]", "epsilon");
  if (c.z_max > c.area_height) throw ConfigError("z_max exceeds area_height", "z_max");
  if (c.terrain_max_height < 0.0 || c.terrain_max_height >= c.z_max)
    throw ConfigError("terrain_max_height must lie in [0, z_max)", "terrain_max_height");
  if (c.terrain_octaves < 1) throw ConfigError("terrain_octaves must be >= 1", "terrain_octaves");
  if (c.evaporation <= 0.0 || c.evaporation >= 1.0)
    throw ConfigError("evaporation must lie in (0, 1)", "evaporation");
  if (c.pheromone_floor < 0.0) throw ConfigError("pheromone_floor must be >= 0", "pheromone_floor");
  if (c.ants < 1) throw ConfigError("ants must be >= 1", "ants");
  if (c.acs_iterations < 1) throw ConfigError("acs_iterations must be >= 1", "acs_iterations");
  if (c.particles < 1) throw ConfigError("particles must be >= 1", "particles");
  if (c.stagnation_rounds < 1)
    throw ConfigError("stagnation_rounds must be >= 1", "stagnation_rounds");
  if (c.pso_max_iterations < 1)
    throw ConfigError("pso_max_iterations must be >= 1", "pso_max_iterations");
  if (c.gamma_shape < 1) throw ConfigError("gamma_shape must be a positive integer", "gamma_shape");
  if (c.blade_count < 2 || c.blade_count > 4)
    throw ConfigError("blade_count must be 2, 3 or 4", "blade_count");
  if (c.hub_radius_mm >= c.prop_radius_mm)
    throw ConfigError("hub_radius_mm must be smaller than prop_radius_mm", "hub_radius_mm");

  auto ordered = [](double lo, double hi, const char* key) {
    if (lo > hi) throw ConfigError(std::string("min bound exceeds max bound: ") + key, key);
  };
  ordered(c.f_uav_min, c.f_uav_max, "f_uav_min");
  ordered(c.f_md_min, c.f_md_max, "f_md_min");
  ordered(c.p_uav_min, c.p_uav_max, "p_uav_min");
  ordered(c.p_md_min, c.p_md_max, "p_md_min");
  positive(c.f_uav_min, "f_uav_min");
  positive(c.f_md_min, "f_md_min");
  positive(c.p_uav_min, "p_uav_min");
  positive(c.p_md_min, "p_md_min");

  if (c.motor_potential * c.rotor_speed_max > c.motor_voltage)
    throw ConfigError("motor_potential * rotor_speed_max exceeds motor_voltage",
                      "motor_potential");

  const double l = c.arm_length_mm, r = c.prop_radius_mm;
  const double upper = std::sqrt(2.0) / 2.0 * l, lower = l / 3.0;
  if (r > upper * (1.0 + kStructureTolerance))
    throw StructuralError("propeller radius " + detail::format_double(r) +
                          " mm violates (sqrt(2)/2)l >= R >= l/3: neighbouring propellers collide "
                          "(upper bound " + detail::format_double(upper) + " mm)");
  if (r < lower * (1.0 - kStructureTolerance))
    throw StructuralError("propeller radius " + detail::format_double(r) +
                          " mm violates (sqrt(2)/2)l >= R >= l/3: underpowered (lower bound " +
                          detail::format_double(lower) + " mm)");
}

/// Parses flat `key = value` text (`#` starts a comment). Unknown keys and
/// duplicate keys are rejected. Keys not present keep their defaults unless
/// `strict` is set, in which case every schema key must appear.
inline ScenarioConfig parse_config(std::string_view text, bool strict = false) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    const auto& fields = detail::config_fields();
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const detail::FieldDef& f) { return f.name == key; });
    if (it == fields.end()) throw ConfigError("unknown key: " + key, key);
    if (!seen.insert(key).second) throw ConfigError("duplicate key: " + key, key);
    if (value.empty()) throw ConfigError("missing value for key: " + key, key);
    try {
      std::size_t used = 0;
      std::visit(
          [&](auto ptr) {
            using T = std::remove_reference_t<decltype(cfg.*ptr)>;
            if constexpr (std::is_same_v<T, double>) {
              cfg.*ptr = std::stod(value, &used);
            } else if constexpr (std::is_same_v<T, int>) {
              cfg.*ptr = std::stoi(value, &used);
            } else {
              cfg.*ptr = std::stoull(value, &used);
            }
          },
          it->ptr);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw ConfigError("malformed value for key " + key + ": " + value, key);
    }
  }
  if (strict) {
    for (const auto& f : detail::config_fields())
      if (!seen.count(std::string(f.name)))
        throw ConfigError("missing key: " + std::string(f.name), std::string(f.name));
  }
  validate(cfg);
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path, bool strict = false) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), strict);
}

/// Canonical `key = value` dump in schema order; round-trips through
/// parse_config bit-exactly.
inline std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& f : detail::config_fields()) {
    out += f.name;
    out += " = ";
    std::visit(
        [&](auto ptr) {
          using T = std::remove_cvref_t<decltype(cfg.*ptr)>;
          if constexpr (std::is_same_v<T, double>)
            out += detail::format_double(cfg.*ptr);
          else
            out += std::to_string(cfg.*ptr);
        },
        f.ptr);
    out += '\n';
  }
  return out;
}

/// FNV-1a digest of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace uavfog
