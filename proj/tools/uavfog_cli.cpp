#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uavfog/uavfog.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uavfog;

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  int reps = 1;
  std::string out;
  std::string format = "csv";
  std::string variant = "ACS-DS";
  std::string path;
  bool atc = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "scenario config file");
  sub->add_option("--seed", o.seed, "base seed");
  sub->add_option("--reps", o.reps, "replications (seeds seed..seed+reps-1)")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

ScenarioConfig load(const Options& o) { return o.config.empty() ? ScenarioConfig{} : load_config(o.config); }

std::vector<std::uint64_t> seeds(const Options& o) {
  std::vector<std::uint64_t> s;
  for (int r = 0; r < o.reps; ++r) s.push_back(o.seed + static_cast<std::uint64_t>(r));
  return s;
}

PlannerVariant parse_variant(const std::string& s) {
  for (auto v : {PlannerVariant::acs, PlannerVariant::acs_d, PlannerVariant::acs_ds})
    if (s == to_string(v)) return v;
  throw DomainError("unknown planner variant: " + s);
}

std::ofstream open_out(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  std::ofstream f(fs::path(o.out) / name);
  if (!f) throw Error("io", "cannot write " + (fs::path(o.out) / name).string());
  f.precision(17);
  return f;
}

/// Main document of a subcommand: stdout, or <out>/<name>.<format>.
void emit(const Options& o, const std::string& name, const std::string& body) {
  if (o.out.empty()) {
    std::cout << body;
    return;
  }
  auto f = open_out(o, name + "." + o.format);
  f << body;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ------------------------------------------------------------------ plan

int cmd_plan(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const PlannerVariant v = parse_variant(o.variant);
  std::ostringstream csv;
  csv.precision(17);
  csv << "seed,variant,length,cost,iterations_to_best,completed_ants,stuck_ants,failed_ants,fallback\n";
  json doc = json::array();
  for (std::uint64_t seed : seeds(o)) {
    const Scenario s = make_scenario(cfg, seed);
    const Route r = plan_route(s, v);
    const PlanResult& p = *r.plan;
    csv << seed << ',' << to_string(v) << ',' << detail::format_double(r.length) << ','
        << detail::format_double(p.cost) << ',' << r.iterations_to_best << ',' << p.completed_ants
        << ',' << p.stuck_ants << ',' << p.failed_ants << ',' << (p.fallback ? 1 : 0) << '\n';
    json wp = json::array();
    for (const auto& w : r.waypoints) wp.push_back({w.x, w.y, w.z});
    doc.push_back({{"seed", seed},
                   {"variant", to_string(v)},
                   {"length", r.length},
                   {"cost", p.cost},
                   {"iterations_to_best", r.iterations_to_best},
                   {"completed_ants", p.completed_ants},
                   {"stuck_ants", p.stuck_ants},
                   {"failed_ants", p.failed_ants},
                   {"fallback", p.fallback},
                   {"config_hash", config_hash(cfg)},
                   {"waypoints", std::move(wp)}});
    if (!o.out.empty()) {
      auto pf = open_out(o, "path_" + std::to_string(seed) + ".csv");
      write_path_csv(pf, r.waypoints);
      auto hf = open_out(o, "history_" + std::to_string(seed) + ".csv");
      write_history_csv(hf, p.history);
    }
  }
  emit(o, "plan", o.format == "json" ? dump(doc) : csv.str());
  return 0;
}

// ---------------------------------------------------------------- assign

int cmd_assign(const Options& o) {
  const ScenarioConfig cfg = load(o);
  std::optional<std::vector<Vec3>> given;
  if (!o.path.empty()) {
    std::ifstream in(o.path);
    if (!in) throw Error("io", "cannot read path file " + o.path);
    given = read_path_csv(in);
  }
  std::ostringstream csv;
  csv << "seed,slot,tasks,md,uav,dc,f_uav,p_uav,E,D,S\n";
  json doc = json::array();
  for (std::uint64_t seed : seeds(o)) {
    const Scenario s = make_scenario(cfg, seed);
    const std::vector<Vec3> wp = given ? *given : plan_route(s, parse_variant(o.variant)).waypoints;
    const FlightLog log = fly_route(cfg, wp, o.atc);
    const MissionResult m = run_mission(s, log, cfg.epsilon, false);
    json slots = json::array();
    for (const auto& r : m.slots) {
      if (r.assignment.empty()) continue;
      std::array<int, 3> n{0, 0, 0};
      json places = json::array();
      for (const auto& a : r.assignment) {
        ++n[static_cast<int>(a.place())];
        places.push_back(to_string(a.place()));
      }
      csv << seed << ',' << r.slot << ',' << r.assignment.size() << ',' << n[0] << ',' << n[1] << ','
          << n[2] << ',' << detail::format_double(r.resources.f_uav) << ','
          << detail::format_double(r.resources.p_uav) << ',' << detail::format_double(r.cost.energy)
          << ',' << detail::format_double(r.cost.delay) << ',' << detail::format_double(r.cost.score)
          << '\n';
      slots.push_back({{"slot", r.slot},
                       {"placements", std::move(places)},
                       {"f_uav", r.resources.f_uav},
                       {"p_uav", r.resources.p_uav},
                       {"E", r.cost.energy},
                       {"D", r.cost.delay},
                       {"S", r.cost.score}});
    }
    doc.push_back({{"seed", seed},
                   {"epsilon", cfg.epsilon},
                   {"E", m.energy},
                   {"D", m.delay},
                   {"S", m.score},
                   {"tasks", m.tasks},
                   {"feasibility", to_json(m.feasibility)},
                   {"config_hash", config_hash(cfg)},
                   {"slots", std::move(slots)}});
  }
  emit(o, "assign", o.format == "json" ? dump(doc) : csv.str());
  return 0;
}

// ----------------------------------------------------------------- sweep

int cmd_sweep(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const SweepResult r = propeller_sweep(cfg, o.seed);
  std::ostringstream csv;
  write_sweep_csv(csv, r);
  emit(o, "sweep", o.format == "json" ? dump(to_json(r)) : csv.str());
  return 0;
}

// ----------------------------------------------------------------- bench

int cmd_bench(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const BenchResult b = convergence_bench(cfg, seeds(o));
  const json summary = bench_summary(b);
  if (!o.out.empty()) {
    for (const auto& v : b.variants) {
      auto f = open_out(o, std::string("history_") + to_string(v.variant) + ".csv");
      write_bench_history_csv(f, v);
    }
    auto f = open_out(o, "summary.json");
    f << dump(summary);
    return 0;
  }
  if (o.format == "json") {
    std::cout << dump(summary);
    return 0;
  }
  std::cout << "iteration,ACS,ACS-D,ACS-DS\n";
  for (std::size_t i = 0; i < b.variants[0].mean_curve.size(); ++i)
    std::cout << i << ',' << detail::format_double(b.variants[0].mean_curve[i]) << ','
              << detail::format_double(b.variants[1].mean_curve[i]) << ','
              << detail::format_double(b.variants[2].mean_curve[i]) << '\n';
  return 0;
}

// --------------------------------------------------------------- compare

int cmd_compare(const Options& o) {
  const ScenarioConfig cfg = load(o);
  std::vector<ResultRecord> all;
  for (std::uint64_t seed : seeds(o)) {
    auto rs = compare_seed(cfg, seed);
    all.insert(all.end(), rs.begin(), rs.end());
  }
  std::ostringstream body;
  if (o.format == "json") {
    json doc = json::array();
    for (const auto& r : all) doc.push_back(to_json(r));
    body << dump(doc);
  } else {
    body << kResultCsvHeader << '\n';
    for (const auto& r : all) write_csv_row(body, r);
  }
  emit(o, "results", body.str());
  if (!o.out.empty()) {
    auto f = open_out(o, "timing.csv");
    f << "baseline,seed,wall_time_s\n";
    for (const auto& r : all) f << r.baseline << ',' << r.seed << ',' << r.wall_time << '\n';
  }
  return 0;
}

// -------------------------------------------------------- validate-config

int cmd_validate(const Options& o) {
  if (o.config.empty()) throw ConfigError("validate-config needs --config");
  const ScenarioConfig cfg = load_config(o.config, true);
  std::cout << json{{"valid", true}, {"config", o.config}, {"config_hash", config_hash(cfg)}}.dump()
            << '\n';
  return 0;
}

void print_error(const std::string& kind, const std::string& message, const std::string& key = {}) {
  json j{{"error", {{"kind", kind}, {"message", message}}}};
  if (!key.empty()) j["error"]["key"] = key;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV fog-computing simulator"};
  app.require_subcommand(1);
  Options o;

  auto* plan = app.add_subcommand("plan", "plan a trajectory");
  add_common(plan, o);
  plan->add_option("--variant", o.variant, "ACS, ACS-D or ACS-DS");

  auto* assign = app.add_subcommand("assign", "per-slot task assignment along a path");
  add_common(assign, o);
  assign->add_option("--path", o.path, "waypoint CSV (slot,x,y,z); planned when omitted");
  assign->add_option("--variant", o.variant, "planner used when --path is omitted");
  assign->add_flag("--atc", o.atc, "fly with the fuzzy attitude controller");

  auto* sweep = app.add_subcommand("sweep", "propeller parameter sweep");
  add_common(sweep, o);
  auto* bench = app.add_subcommand("bench", "planner convergence benchmark");
  add_common(bench, o);
  auto* compare = app.add_subcommand("compare", "all eight baselines");
  add_common(compare, o);
  auto* validate_cmd = app.add_subcommand("validate-config", "strict config check");
  add_common(validate_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (plan->parsed()) return cmd_plan(o);
    if (assign->parsed()) return cmd_assign(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (bench->parsed()) return cmd_bench(o);
    if (compare->parsed()) return cmd_compare(o);
    if (validate_cmd->parsed()) return cmd_validate(o);
  } catch (const ConfigError& e) {
    print_error(e.kind(), e.what(), e.key());
    return 1;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 2;
}
