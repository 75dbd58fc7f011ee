#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <istream>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavfog/acs.hpp"
#include "uavfog/comms.hpp"
#include "uavfog/config.hpp"
#include "uavfog/control.hpp"
#include "uavfog/core_model.hpp"
#include "uavfog/cost_model.hpp"
#include "uavfog/dynamics.hpp"
#include "uavfog/error.hpp"
#include "uavfog/pso.hpp"
#include "uavfog/rng.hpp"
#include "uavfog/terrain.hpp"

namespace uavfog {

// ------------------------------------------------------------ baselines

enum class Baseline { ran, pso, acs, acs_atc, acs_d, acs_d_atc, acs_ds, acs_ds_atc };

inline constexpr std::array<Baseline, 8> kBaselines{
    Baseline::ran,   Baseline::pso,       Baseline::acs,    Baseline::acs_atc,
    Baseline::acs_d, Baseline::acs_d_atc, Baseline::acs_ds, Baseline::acs_ds_atc};

inline const char* to_string(Baseline b) {
  switch (b) {
    case Baseline::ran: return "RAN";
    case Baseline::pso: return "PSO";
    case Baseline::acs: return "ACS";
    case Baseline::acs_atc: return "ACS+ATC";
    case Baseline::acs_d: return "ACS-D";
    case Baseline::acs_d_atc: return "ACS-D+ATC";
    case Baseline::acs_ds: return "ACS-DS";
    case Baseline::acs_ds_atc: return "ACS-DS+ATC";
  }
  return "?";
}

inline Baseline parse_baseline(const std::string& s) {
  for (Baseline b : kBaselines)
    if (s == to_string(b)) return b;
  throw DomainError("unknown baseline: " + s);
}

/// Module composition of one baseline.
struct BaselineSpec {
  bool random_assignment = false;
  std::optional<PlannerVariant> planner;  // none: unplanned route
  bool atc = false;
};

inline BaselineSpec spec_of(Baseline b) {
  switch (b) {
    case Baseline::ran: return {true, std::nullopt, false};
    case Baseline::pso: return {false, std::nullopt, false};
    case Baseline::acs: return {false, PlannerVariant::acs, false};
    case Baseline::acs_atc: return {false, PlannerVariant::acs, true};
    case Baseline::acs_d: return {false, PlannerVariant::acs_d, false};
    case Baseline::acs_d_atc: return {false, PlannerVariant::acs_d, true};
    case Baseline::acs_ds: return {false, PlannerVariant::acs_ds, false};
    case Baseline::acs_ds_atc: return {false, PlannerVariant::acs_ds, true};
  }
  throw DomainError("bad baseline");
}

class BaselineError : public Error {
public:
  BaselineError(Baseline b, const Error& cause)
      : Error(cause.kind(), std::string(to_string(b)) + ": " + cause.what()), baseline_(b) {}
  Baseline baseline() const noexcept { return baseline_; }

private:
  Baseline baseline_;
};

// ------------------------------------------------------------- scenario

struct Scenario {
  ScenarioConfig cfg;
  std::uint64_t seed = 0;
  TerrainGrid terrain;
  std::vector<MobileDevice> mds;
  PlanTargets targets;
};

inline Scenario make_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const Rng rng(seed);
  Scenario s{cfg, seed, make_terrain(cfg, rng), {}, {}};
  s.mds = generate_mds(cfg, s.terrain, rng);
  s.targets = make_targets(cfg, s.terrain, s.mds);
  return s;
}

/// ε ~ U[0.05, 1], one draw per seed shared by every baseline.
inline double sample_epsilon(std::uint64_t seed) {
  return Rng(seed).child(stream::epsilon).uniform(0.05, 1.0);
}

struct Route {
  std::vector<Cell> cells;
  std::vector<Vec3> waypoints;
  double length = 0.0;
  int iterations_to_best = 0;  // planner iteration that produced the final best
  std::optional<PlanResult> plan;
};

inline Route plan_route(const Scenario& s, std::optional<PlannerVariant> variant) {
  Route r;
  if (!variant) {
    check_reachable(s.terrain, s.targets);
    r.cells = unplanned_route(s.terrain, s.targets);
    for (const Cell& c : r.cells) r.waypoints.push_back(s.terrain.center(c));
    r.length = path_length(s.terrain, r.cells);
    return r;
  }
  PlanResult p = plan_on_targets(s.terrain, s.targets, PlannerParams::from(s.cfg), *variant,
                                 Rng(s.seed));
  r.cells = p.cells;
  r.waypoints = p.waypoints;
  r.length = p.length;
  for (const auto& h : p.history)
    if (h.best_cost == p.cost) {
      r.iterations_to_best = h.iteration + 1;
      break;
    }
  r.plan = std::move(p);
  return r;
}

inline FlightLog fly_route(const ScenarioConfig& cfg, const std::vector<Vec3>& waypoints, bool atc) {
  const FlightParams fp = FlightParams::from(cfg);
  return atc ? fly_path_closed_loop(waypoints, ControllerKind::fuzzy, fp)
             : fly_path_nominal(waypoints, fp);
}

/// Reads waypoints written by write_path_csv (header slot,x,y,z).
inline std::vector<Vec3> read_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != "slot,x,y,z")
    throw DomainError("path file must start with the header slot,x,y,z");
  std::vector<Vec3> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::array<double, 4> v{};
    std::size_t pos = 0;
    for (int k = 0; k < 4; ++k) {
      const auto comma = line.find(',', pos);
      const std::string field = detail::trim(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      try {
        std::size_t used = 0;
        v[k] = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::logic_error&) {
        throw DomainError("path line " + std::to_string(lineno) + ": bad number '" + field + "'");
      }
      if ((comma == std::string::npos) != (k == 3))
        throw DomainError("path line " + std::to_string(lineno) + ": expected 4 fields");
      pos = comma + 1;
    }
    out.push_back({v[1], v[2], v[3]});
  }
  if (out.empty()) throw DomainError("path file has no waypoints");
  return out;
}

// -------------------------------------------------------------- mission

struct MissionResult {
  std::vector<SlotRecord> slots;
  double energy = 0.0, delay = 0.0, score = 0.0;
  int tasks = 0;
  int swarm_runs = 0;
  int swarm_not_converged = 0;
  FeasibilityReport feasibility;
};

/// Channel counts for one slot from the per-device workload.
inline std::vector<int> slot_channels(const ScenarioConfig& cfg, const std::vector<TaskInstance>& tasks,
                                      std::size_t k) {
  std::vector<double> size(k, 0.0), share(k, 0.0);
  std::vector<bool> active(k, false);
  for (const auto& t : tasks) {
    size[t.md] += t.size;
    active[t.md] = true;
  }
  for (std::size_t j = 0; j < k; ++j)
    if (active[j]) share[j] = channel_share(size[j] / cfg.task_size_mean, cfg.gamma_shape, cfg.gamma_rate);
  return allocate_channels(share, active, cfg.num_channels).channels;
}

/// Executes the per-slot assignment along a flown profile. Tasks arrive over
/// the flight's own timeline; the swarm runs only in slots with tasks.
inline MissionResult run_mission(const Scenario& s, const FlightLog& log, double epsilon,
                                 bool random_assignment) {
  const ScenarioConfig& cfg = s.cfg;
  const std::size_t k = s.mds.size();
  const Timeline timeline{static_cast<int>(std::max<std::size_t>(log.slots(), 1)), cfg.slot_len};
  const auto all = generate_all_tasks(cfg, s.mds, timeline, Rng(s.seed));
  std::vector<std::vector<TaskInstance>> by_slot(timeline.slots);
  for (const auto& t : all) by_slot[t.slot].push_back(t);

  const SwarmParams sp = SwarmParams::from(cfg);
  const Rng swarm_rng = Rng(s.seed).child(stream::swarm);
  const Rng ran_rng = Rng(s.seed).child(stream::baseline);
  MissionResult out;
  double used = 0.0;
  std::optional<SwarmProblem> prev;
  std::optional<SwarmSolution> prev_sol;

  for (int t = 0; t < timeline.slots; ++t) {
    SlotScenario sc;
    sc.slot = t;
    if (log.slots()) {
      sc.uav = log.slot_position()[t];
      sc.speed = log.slot_speed()[t];
      sc.e_mov = log.slot_energy()[t];
    }
    sc.tasks = std::move(by_slot[t]);
    SlotRecord rec;
    rec.slot = t;
    rec.speed = sc.speed;
    rec.altitude = sc.uav.z;
    if (sc.tasks.empty()) {
      sc.channels.assign(k, 0);
      rec.channels = sc.channels;
      Resources idle{cfg.f_uav_min, cfg.p_uav_min, std::vector<double>(k, cfg.p_md_min),
                     std::vector<double>(k, cfg.f_md_min)};
      rec.resources = idle;
      rec.cost = evaluate_slot(cfg, s.mds, sc, {}, idle, epsilon);
    } else if (random_assignment) {
      Rng r = ran_rng.child(static_cast<std::uint64_t>(t));
      std::vector<double> w(k, 0.0);
      std::vector<bool> active(k, false);
      for (const auto& task : sc.tasks) active[task.md] = true;
      for (std::size_t j = 0; j < k; ++j)
        if (active[j]) w[j] = r.uniform(1e-6, 1.0);
      sc.channels = allocate_channels(w, active, cfg.num_channels).channels;
      std::vector<Place> x;
      for (std::size_t i = 0; i < sc.tasks.size(); ++i) x.push_back(static_cast<Place>(r.below(3)));
      Resources res;
      res.f_uav = r.uniform(cfg.f_uav_min, cfg.f_uav_max);
      res.p_uav = r.uniform(cfg.p_uav_min, cfg.p_uav_max);
      for (std::size_t j = 0; j < k; ++j) {
        res.p_md.push_back(r.uniform(cfg.p_md_min, cfg.p_md_max));
        res.f_md.push_back(r.uniform(cfg.f_md_min, cfg.f_md_max));
      }
      rec.channels = sc.channels;
      rec.resources = res;
      for (Place p : x) rec.assignment.push_back(Assignment::of(p));
      rec.cost = evaluate_slot(cfg, s.mds, sc, x, res, epsilon);
      out.tasks += static_cast<int>(sc.tasks.size());
    } else {
      sc.channels = slot_channels(cfg, sc.tasks, k);
      SwarmProblem prob(cfg, s.mds, sc, epsilon, used);
      std::vector<double> warm;
      if (prev) warm = warm_start(prob, *prev, *prev_sol);
      SwarmSolution sol = optimize(prob, sp, swarm_rng.child(static_cast<std::uint64_t>(t)),
                                   prev ? &warm : nullptr);
      ++out.swarm_runs;
      out.swarm_not_converged += !sol.converged;
      out.tasks += static_cast<int>(sc.tasks.size());
      rec = to_slot_record(prob, sol);
      prev.emplace(std::move(prob));
      prev_sol = std::move(sol);
    }
    used += rec.cost.e_uav;
    out.energy += rec.cost.energy;
    out.delay += rec.cost.delay;
    out.score += rec.cost.score;
    out.slots.push_back(std::move(rec));
  }
  out.feasibility = check_constraints(out.slots, cfg);
  return out;
}

// -------------------------------------------------------- result record

struct ResultRecord {
  std::string baseline;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double energy = 0.0, delay = 0.0, score = 0.0;
  int iterations = 0;  // planner iterations to its final best; 0 without a planner
  double path_length = 0.0;
  double flight_time = 0.0;
  int tasks = 0;
  bool feasible = false;
  std::string config_hash;
  double wall_time = 0.0;  // kept out of the serialized record
};

inline const char* kResultCsvHeader =
    "baseline,seed,epsilon,E,D,S,iterations,path_length,flight_time,tasks,feasible,config_hash";

inline void write_csv_row(std::ostream& os, const ResultRecord& r) {
  os << r.baseline << ',' << r.seed << ',' << detail::format_double(r.epsilon) << ','
     << detail::format_double(r.energy) << ',' << detail::format_double(r.delay) << ','
     << detail::format_double(r.score) << ',' << r.iterations << ','
     << detail::format_double(r.path_length) << ',' << detail::format_double(r.flight_time) << ','
     << r.tasks << ',' << (r.feasible ? 1 : 0) << ',' << r.config_hash << '\n';
}

inline nlohmann::json to_json(const ResultRecord& r) {
  return {{"baseline", r.baseline}, {"seed", r.seed},       {"epsilon", r.epsilon},
          {"E", r.energy},          {"D", r.delay},         {"S", r.score},
          {"iterations", r.iterations}, {"path_length", r.path_length},
          {"flight_time", r.flight_time}, {"tasks", r.tasks}, {"feasible", r.feasible},
          {"config_hash", r.config_hash}};
}

inline ResultRecord record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.baseline = j.at("baseline").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.epsilon = j.at("epsilon").get<double>();
  r.energy = j.at("E").get<double>();
  r.delay = j.at("D").get<double>();
  r.score = j.at("S").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.path_length = j.at("path_length").get<double>();
  r.flight_time = j.at("flight_time").get<double>();
  r.tasks = j.at("tasks").get<int>();
  r.feasible = j.at("feasible").get<bool>();
  r.config_hash = j.at("config_hash").get<std::string>();
  return r;
}

inline bool same_record(const ResultRecord& a, const ResultRecord& b) {
  return a.baseline == b.baseline && a.seed == b.seed && a.epsilon == b.epsilon &&
         a.energy == b.energy && a.delay == b.delay && a.score == b.score &&
         a.iterations == b.iterations && a.path_length == b.path_length &&
         a.flight_time == b.flight_time && a.tasks == b.tasks && a.feasible == b.feasible &&
         a.config_hash == b.config_hash;
}

/// One baseline on an existing scenario and route.
inline ResultRecord evaluate_baseline(const Scenario& s, Baseline b, const Route& route,
                                      double epsilon) {
  const auto t0 = std::chrono::steady_clock::now();
  const BaselineSpec spec = spec_of(b);
  ResultRecord r;
  r.baseline = to_string(b);
  r.seed = s.seed;
  r.epsilon = epsilon;
  r.config_hash = config_hash(s.cfg);
  try {
    const FlightLog log = fly_route(s.cfg, route.waypoints, spec.atc);
    const MissionResult m = run_mission(s, log, epsilon, spec.random_assignment);
    r.energy = m.energy;
    r.delay = m.delay;
    r.score = m.score;
    r.tasks = m.tasks;
    r.feasible = m.feasibility.all_passed();
    r.flight_time = log.total_time();
  } catch (const Error& e) {
    throw BaselineError(b, e);
  }
  r.iterations = route.iterations_to_best;
  r.path_length = route.length;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline ResultRecord run_baseline(const ScenarioConfig& cfg, Baseline b, std::uint64_t seed) {
  const Scenario s = make_scenario(cfg, seed);
  Route route;
  try {
    route = plan_route(s, spec_of(b).planner);
  } catch (const Error& e) {
    throw BaselineError(b, e);
  }
  return evaluate_baseline(s, b, route, sample_epsilon(seed));
}

/// All eight baselines on one seed. Planner routes are shared between a
/// baseline and its +ATC twin.
inline std::vector<ResultRecord> compare_seed(const ScenarioConfig& cfg, std::uint64_t seed) {
  const Scenario s = make_scenario(cfg, seed);
  const double eps = sample_epsilon(seed);
  std::map<int, Route> routes;
  std::vector<ResultRecord> out;
  for (Baseline b : kBaselines) {
    const auto planner = spec_of(b).planner;
    const int key = planner ? static_cast<int>(*planner) : -1;
    const auto t0 = std::chrono::steady_clock::now();
    double plan_time = 0.0;
    if (!routes.count(key)) {
      try {
        routes[key] = plan_route(s, planner);
      } catch (const Error& e) {
        throw BaselineError(b, e);
      }
      plan_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    out.push_back(evaluate_baseline(s, b, routes[key], eps));
    out.back().wall_time += plan_time;
  }
  return out;
}

// ------------------------------------------------------ propeller sweep

struct PropellerCandidate {
  int blades = 2;
  double radius_mm = 512.0;
  double width_mm = 250.0;
  double mount_angle = 0.2;
  double thickness_mm = 7.5;
};

struct SweepRow {
  std::string axis;
  PropellerCandidate candidate;
  std::string status;  // ok, collision, underpowered, rotor_limit
  double thrust_coeff = 0.0;
  double energy = 0.0;  // J over the reference mission, 0 when skipped
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::map<std::string, std::size_t> argmin;  // axis -> row index
  std::size_t best = 0;
  std::vector<double> random_energy;  // random valid specs
};

/// Take-off, a 2 km square at 300 m, landing.
inline std::vector<Vec3> reference_mission() {
  return {{0, 0, 0}, {0, 0, 300}, {2000, 0, 300}, {2000, 2000, 300},
          {0, 2000, 300}, {0, 0, 300}, {0, 0, 0}};
}

inline PropellerCandidate reference_candidate(const ScenarioConfig& c) {
  return {c.blade_count, c.prop_radius_mm, c.blade_width_mm, c.mount_angle, c.blade_thickness_mm};
}

/// Thrust coefficient of a candidate: the blade-geometry model scaled so the
/// reference propeller reproduces the configured coefficient.
inline double candidate_thrust_coeff(const ScenarioConfig& c, const PropellerCandidate& p) {
  const double rho = air_density(c.ambient_temperature, c.gas_pressure, c.gas_molar_mass(), c.gas_constant);
  auto model = [&](const PropellerCandidate& q) {
    PropellerSpec s = PropellerSpec::from(c);
    s.blades = q.blades;
    s.radius = q.radius_mm;
    s.width = q.width_mm;
    s.mount_angle = q.mount_angle;
    s.thickness = q.thickness_mm;
    return torque_and_thrust_coeffs(s, rho).thrust;
  };
  return c.thrust_coeff * model(p) / model(reference_candidate(c));
}

inline SweepRow evaluate_candidate(const ScenarioConfig& c, const PropellerCandidate& p,
                                   const std::vector<Vec3>& mission, std::string axis) {
  SweepRow row{std::move(axis), p, "ok", 0.0, 0.0};
  const StructureStatus st = check_structure(p.radius_mm, c.arm_length_mm);
  if (st != StructureStatus::ok) {
    row.status = to_string(st);
    return row;
  }
  row.thrust_coeff = candidate_thrust_coeff(c, p);
  FlightParams fp = FlightParams::from(c);
  fp.airframe.thrust_coeff = row.thrust_coeff;
  try {
    row.energy = fly_path_nominal(mission, fp).total_energy();
  } catch (const DomainError&) {
    row.status = "rotor_limit";
  }
  return row;
}

/// One-axis-at-a-time sweep around the configured propeller, plus `n_random`
/// random valid candidates for comparison.
inline SweepResult propeller_sweep(const ScenarioConfig& c, std::uint64_t seed, int n_random = 50) {
  validate(c);
  const auto mission = reference_mission();
  const PropellerCandidate ref = reference_candidate(c);
  const double r_lo = c.arm_length_mm / 3.0, r_hi = std::sqrt(2.0) / 2.0 * c.arm_length_mm;
  SweepResult out;
  auto add = [&](const PropellerCandidate& p, const std::string& axis) {
    out.rows.push_back(evaluate_candidate(c, p, mission, axis));
  };
  for (int nb : {2, 3, 4}) {
    auto p = ref;
    p.blades = nb;
    add(p, "blades");
  }
  for (double r = std::floor((r_lo - 50) / 10) * 10; r <= r_hi + 50; r += 10) {
    auto p = ref;
    p.radius_mm = r;
    add(p, "radius");
  }
  for (double w = 150; w <= 350 + 1e-9; w += 10) {
    auto p = ref;
    p.width_mm = w;
    add(p, "width");
  }
  for (double g = 0.10; g <= 0.40 + 1e-9; g += 0.01) {
    auto p = ref;
    p.mount_angle = g;
    add(p, "mount_angle");
  }
  for (double t = 5.0; t <= 10.0 + 1e-9; t += 0.25) {
    auto p = ref;
    p.thickness_mm = t;
    add(p, "thickness");
  }
  bool any = false;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& r = out.rows[i];
    if (r.status != "ok") continue;
    auto it = out.argmin.find(r.axis);
    if (it == out.argmin.end() || r.energy < out.rows[it->second].energy) out.argmin[r.axis] = i;
    if (!any || r.energy < out.rows[out.best].energy) out.best = i;
    any = true;
  }
  if (!any) throw DomainError("no propeller candidate can fly the reference mission");

  Rng rng = Rng(seed).child(stream::baseline);
  int draws = 0;
  while (static_cast<int>(out.random_energy.size()) < n_random) {
    if (++draws > 1000 * std::max(n_random, 1))
      throw DomainError("could not draw enough valid random propellers");
    PropellerCandidate p;
    p.blades = 2 + static_cast<int>(rng.below(3));
    p.radius_mm = rng.uniform(r_lo, r_hi);
    p.width_mm = rng.uniform(150, 350);
    p.mount_angle = rng.uniform(0.10, 0.40);
    p.thickness_mm = rng.uniform(5.0, 10.0);
    const auto row = evaluate_candidate(c, p, mission, "random");
    if (row.status == "ok") out.random_energy.push_back(row.energy);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
  os << "axis,blades,radius_mm,width_mm,mount_angle,thickness_mm,status,thrust_coeff,energy\n";
  for (const auto& r : s.rows)
    os << r.axis << ',' << r.candidate.blades << ',' << detail::format_double(r.candidate.radius_mm)
       << ',' << detail::format_double(r.candidate.width_mm) << ','
       << detail::format_double(r.candidate.mount_angle) << ','
       << detail::format_double(r.candidate.thickness_mm) << ',' << r.status << ','
       << detail::format_double(r.thrust_coeff) << ',' << detail::format_double(r.energy) << '\n';
}

inline nlohmann::json to_json(const SweepResult& s) {
  auto row = [](const SweepRow& r) {
    return nlohmann::json{{"axis", r.axis},
                          {"blades", r.candidate.blades},
                          {"radius_mm", r.candidate.radius_mm},
                          {"width_mm", r.candidate.width_mm},
                          {"mount_angle", r.candidate.mount_angle},
                          {"thickness_mm", r.candidate.thickness_mm},
                          {"status", r.status},
                          {"thrust_coeff", r.thrust_coeff},
                          {"energy", r.energy}};
  };
  nlohmann::json rows = nlohmann::json::array(), arg = nlohmann::json::object();
  for (const auto& r : s.rows) rows.push_back(row(r));
  for (const auto& [axis, i] : s.argmin) arg[axis] = row(s.rows[i]);
  double mean = 0.0;
  for (double e : s.random_energy) mean += e;
  if (!s.random_energy.empty()) mean /= s.random_energy.size();
  return {{"rows", std::move(rows)},
          {"argmin", std::move(arg)},
          {"best", row(s.rows[s.best])},
          {"random_mean_energy", mean},
          {"random_count", s.random_energy.size()}};
}

// ----------------------------------------------------------- fixtures

/// Wall of `height` on one column.
inline void raise_column(std::vector<double>& h, int n, int x, int y, double height = 1000.0) {
  if (x >= 0 && y >= 0 && x < n && y < n) h[static_cast<std::size_t>(y) * n + x] = height;
}

/// 20×20×10 map with two comb-shaped wall blocks between the start and the
/// targets; three free layers under the ceiling.
inline TerrainGrid comb_map() {
  const int n = 20;
  std::vector<double> h(n * n, 0.0);
  auto comb = [&](int x0, int x1, int pass) {
    for (int y = 2; y <= 18; y += 2)
      for (int x = x0; x <= x1; ++x) raise_column(h, n, x, y);
    for (int y = 2; y <= 18; ++y)
      if (y != pass) raise_column(h, n, x1, y);
  };
  comb(3, 8, 11);
  comb(11, 16, 9);
  return TerrainGrid({n, n, 10, 100.0}, h, 350.0);
}

inline PlanTargets comb_targets() { return {{0, 10, 1}, {{19, 10, 1}, {19, 2, 1}, {19, 17, 1}}}; }

/// U-shaped trap open toward the start plus a ringed room with a one-cell
/// door; one target sits behind the trap, one inside the room.
inline TerrainGrid trap_map() {
  const int n = 20;
  std::vector<double> h(n * n, 0.0);
  for (int y = 6; y <= 14; ++y) raise_column(h, n, 13, y);
  for (int x = 8; x <= 13; ++x) {
    raise_column(h, n, x, 6);
    raise_column(h, n, x, 14);
  }
  for (int x = 2; x <= 6; ++x) {
    raise_column(h, n, x, 16);
    raise_column(h, n, x, 19);
  }
  for (int y = 16; y <= 19; ++y) {
    raise_column(h, n, 2, y);
    raise_column(h, n, 6, y);
  }
  h[16 * n + 4] = 0.0;  // door
  return TerrainGrid({n, n, 10, 100.0}, h, 350.0);
}

inline PlanTargets trap_targets() { return {{0, 10, 1}, {{18, 10, 1}, {4, 17, 1}}}; }

// ---------------------------------------------------- convergence bench

struct VariantBench {
  PlannerVariant variant = PlannerVariant::acs;
  std::vector<double> mean_curve;  // mean best cost per iteration
  std::vector<int> iterations_to_5;
  std::vector<double> final_cost;
  long stuck = 0, failed = 0;
  double mean_iterations() const {
    double s = 0;
    for (int v : iterations_to_5) s += v;
    return iterations_to_5.empty() ? 0.0 : s / iterations_to_5.size();
  }
  double mean_final() const {
    double s = 0;
    for (double v : final_cost) s += v;
    return final_cost.empty() ? 0.0 : s / final_cost.size();
  }
};

struct BenchResult {
  std::array<VariantBench, 3> variants;
  std::vector<std::uint64_t> seeds;
};

/// First iteration (1-based) whose best cost is within 5% of `reference`;
/// runs that never get there count as the full horizon.
inline int iterations_to_within(const std::vector<IterationStats>& h, double reference, double frac = 0.05) {
  for (const auto& s : h)
    if (s.best_cost <= (1.0 + frac) * reference) return s.iteration + 1;
  return static_cast<int>(h.size());
}

/// All three planner variants on the comb map, one run per seed. The 5%
/// reference is the best cost any variant found on that seed.
inline BenchResult convergence_bench(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  validate(cfg);
  const TerrainGrid g = comb_map();
  const PlanTargets t = comb_targets();
  const PlannerParams p = PlannerParams::from(cfg);
  BenchResult out;
  out.seeds = seeds;
  for (int v = 0; v < 3; ++v) {
    out.variants[v].variant = static_cast<PlannerVariant>(v);
    out.variants[v].mean_curve.assign(p.iterations, 0.0);
  }
  for (std::uint64_t seed : seeds) {
    std::array<PlanResult, 3> r;
    for (int v = 0; v < 3; ++v) r[v] = plan_on_targets(g, t, p, static_cast<PlannerVariant>(v), Rng(seed));
    const double best = std::min({r[0].cost, r[1].cost, r[2].cost});
    for (int v = 0; v < 3; ++v) {
      auto& vb = out.variants[v];
      vb.iterations_to_5.push_back(iterations_to_within(r[v].history, best));
      vb.final_cost.push_back(r[v].cost);
      vb.stuck += r[v].stuck_ants;
      vb.failed += r[v].failed_ants;
      for (const auto& h : r[v].history)
        vb.mean_curve[h.iteration] += (std::isfinite(h.best_cost) ? h.best_cost : 0.0) / seeds.size();
    }
  }
  return out;
}

inline void write_bench_history_csv(std::ostream& os, const VariantBench& v) {
  os << "iteration,mean_best_cost\n";
  for (std::size_t i = 0; i < v.mean_curve.size(); ++i)
    os << i << ',' << detail::format_double(v.mean_curve[i]) << '\n';
}

inline nlohmann::json bench_summary(const BenchResult& b) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& v : b.variants)
    j[to_string(v.variant)] = {{"mean_iterations_to_5pct", v.mean_iterations()},
                               {"mean_final_cost", v.mean_final()},
                               {"iterations_to_5pct", v.iterations_to_5},
                               {"stuck_ants", v.stuck},
                               {"failed_ants", v.failed}};
  const double base = b.variants[0].mean_iterations();
  j["ratio_ACS-D"] = base > 0 ? b.variants[1].mean_iterations() / base : 0.0;
  j["ratio_ACS-DS"] = base > 0 ? b.variants[2].mean_iterations() / base : 0.0;
  j["seeds"] = b.seeds;
  return j;
}

}  // namespace uavfog
