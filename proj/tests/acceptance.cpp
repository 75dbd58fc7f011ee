// Acceptance runner: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "uavfog/uavfog.hpp"

using namespace uavfog;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

double rel_err(double got, double want) {
  const double d = std::abs(got - want);
  return want == 0.0 ? d : d / std::abs(want);
}

// Collects worst relative error across oracle comparisons.
struct Oracle {
  double worst = 0.0;
  std::string where;
  int count = 0;
  void check(const std::string& name, double got, double want) {
    ++count;
    const double e = rel_err(got, want);
    if (!(e <= worst)) {
      worst = e;
      where = name;
    }
  }
};

// ------------------------------------------------------------ criterion 1

Outcome formulas() {
  Oracle o;
  const double pi = std::numbers::pi;

  const double rho = air_density(288.15, 101325.0, 0.029, 8.314);
  o.check("air density", rho, 101325.0 * 0.029 / (8.314 * 288.15));
  const bool rho_ref = std::abs(rho - 1.2265) < 1e-4;

  const auto u = control_inputs({1, 2, 3, 4}, 1.0, 1.0);
  const bool u_ref = u.u1 == 30.0 && u.u2 == 12.0 && u.u3 == 8.0 && u.u4 == 10.0;
  {
    const RotorSpeeds w{9.5, 11.25, 7.75, 13.0};
    const double ct = 1.483, cm = 2.925;
    const auto v = control_inputs(w, ct, cm);
    const double a = w[0] * w[0], b = w[1] * w[1], c = w[2] * w[2], d = w[3] * w[3];
    o.check("U1", v.u1, ct * (a + b + c + d));
    o.check("U2", v.u2, ct * (d - b));
    o.check("U3", v.u3, ct * (c - a));
    o.check("U4", v.u4, cm * (b + d - a - c));
  }
  {
    PropellerSpec s;
    const double r = 1.21;
    const double integral = std::pow(s.thickness, 4) * s.width * std::sin(s.mount_angle) * (s.radius - s.hub_radius);
    const double cm = std::pow(1 / (2 * pi), 2) * r * std::pow(2 * s.radius, 5) / (s.blades * integral);
    const auto k = torque_and_thrust_coeffs(s, r);
    o.check("C_M", k.torque, cm);
    o.check("C_T", k.thrust, cm / (2 * s.radius));
  }
  {
    const MotorParams m{12.0, 1.5, 0.6};
    o.check("motor current", motor_current(7.0, m), (12.0 - 7.0 * 0.6) / 1.5);
    const RotorSpeeds w{1, 2, 3, 4};
    double e = 0;
    for (double v : w) e += (12.0 - v * 0.6) / 1.5 * 0.1;
    o.check("movement energy", movement_energy(w, m, 0.1), e);
  }
  for (double s : {0.2, 0.5, 1.0, 2.3}) o.check("channel share", channel_share(s), 4.0 * s * std::exp(-2.0 * s));
  o.check("channel share general", channel_share(0.8, 3, 1.5), 3.375 / 2.0 * 0.64 * std::exp(-1.2));
  o.check("LoS probability", los_probability(0.9, 0.5), 1.0 / (1.0 + 0.5 * std::exp(-(0.9 - 0.5))));
  o.check("elevation", elevation_angle({0, 0, 0}, {300, 400, 500}), std::atan2(500.0, 500.0));
  {
    const LinkEndpoints e{1234.0, 0.3, 0.5, false};
    const LinkBudget b{0.2, 1e6, 1e-13, 2e-14};
    const auto r = link_rate(e, b, 2.4e9);
    const double plos = 1.0 / (1.0 + 0.5 * std::exp(-(0.3 - 0.5)));
    const double loss = plos * 4.0 * pi * 2.4e9 / 299792458.0 * 1234.0;
    const double xi = 0.2 / (loss * (2e-14 + 1e-13));
    o.check("path loss", r.loss, loss);
    o.check("SINR", r.sinr, xi);
    o.check("rate", r.rate, 1e6 * std::log2(1 + xi));
  }
  {
    const LinkRates lr{2e6, 3e6, 5e5, 7e5};
    const double s = 4e6;
    const int ch = 5;
    o.check("DC transmission energy", transmission_energy(Place::dc, s, ch, 0.3, 1.2, 5.0, lr),
            0.3 * s / (ch * 2e6) + 1.2 * s / (ch * 3e6) + 1.2 * s / (ch * 5e5) + 5.0 * s / (ch * 7e5));
    o.check("UAV transmission delay", transmission_delay(Place::uav, s, ch, lr), s / (ch * 2e6) + s / (ch * 3e6));
    o.check("UAV compute energy", computation_energy(Place::uav, s, 500, 2e9, 1e9, 1e-27, 1e-27),
            1e-27 * s * 500 * 4e18);
    o.check("MD compute delay", computation_delay(Place::md, s, 500, 2e9, 1.25e9), s * 500 / 1.25e9);
    const double load = 0.2 * (1 - 0.25) * s, cap = 0.1 * ch * 2e6;
    o.check("transmission queue", transmission_queue_delay(0.2, 0.25, s, 0.1, ch, 2e6), load * s / (cap * (cap - load)));
    const std::vector<UavQueueInput> q{{0.1, 2e6, 500}, {0.05, 1e6, 800}};
    const double lam = 0.15, work = 0.1 * 2e6 * 500 + 0.05 * 1e6 * 800;
    o.check("UAV queue", uav_queue_delay(20.0, 1.0, 2e9, q).delay, 20.0 / lam - work / (2e9 * lam));
    o.check("objective", objective(3.5, 1200.0, 0.4), 3.5 + 0.4 * 1200.0);
  }
  o.check("safety ratio", safety_ratio(8, 2), 0.75);
  {
    const std::vector<double> sg{0.4, 1.7, 3.9, 2.2}, eta{1.1, 0.3, 2.5, 1.0};
    const auto p = transition_probabilities(sg, eta, 1.3, 2.0);
    double z = 0;
    for (std::size_t i = 0; i < sg.size(); ++i) z += std::pow(sg[i], 1.3) * eta[i] * eta[i];
    for (std::size_t i = 0; i < sg.size(); ++i)
      o.check("transition probability", p[i], std::pow(sg[i], 1.3) * eta[i] * eta[i] / z);
  }
  {
    const TerrainGrid g({5, 5, 4, 100.0}, std::vector<double>(25, 0.0), 300.0);
    PlannerParams p;
    GuidanceField f(g, p, false);
    const std::vector<Cell> path{{1, 1, 1}, {2, 1, 1}, {3, 2, 1}};
    for (int h = 1; h <= 10; ++h) f.update(path, 1.7);
    o.check("pheromone recursion", f.pheromone(path[1], path[2]), 1.7 + (p.tau0 - 1.7) * std::pow(1 - p.rho, 10));
  }
  {
    // particle update with zero acceleration terms: v' = F_I v, G' = G + v'
    ScenarioConfig c;
    MobileDevice md{0, {0, 0, 0}, c.arrival_rate, c.p_md_min, c.p_md_max, c.f_md_min, c.f_md_max};
    SlotScenario sc;
    sc.uav = {100, 0, 150};
    sc.channels = {10};
    sc.tasks = {{0, 0, 2e6, 500, 0}};
    SwarmProblem prob(c, {md}, sc, 0.5);
    SwarmParams sp;
    sp.accel_personal = sp.accel_global = 0.0;
    sp.velocity_clamp = 1.0;
    auto s = init_swarm(prob, sp, Rng(9));
    const auto before = s.particles;
    step_swarm(s, prob, sp);
    for (std::size_t h = 0; h < before.size(); ++h)
      for (std::size_t d = 0; d < before[h].v.size(); ++d) {
        const double v = sp.inertia * before[h].v[d];
        o.check("particle velocity", s.particles[h].v[d], v);
        o.check("particle position", s.particles[h].x[d], std::clamp(before[h].x[d] + v, 0.0, 1.0));
      }
  }
  const bool ok = o.worst <= 1e-9 && rho_ref && u_ref;
  return {ok, std::to_string(o.count) + " oracle checks, worst rel err " + fmt(o.worst, 3) +
                  (o.worst > 0 ? " (" + o.where + ")" : "") + ", rho(288.15 K)=" + fmt(rho, 6) +
                  ", U(1,2,3,4)=(" + fmt(u.u1) + "," + fmt(u.u2) + "," + fmt(u.u3) + "," + fmt(u.u4) + ")"};
}

// ------------------------------------------------------------ criterion 2

constexpr int kTable[7][7][3] = {
    {{3, -3, 1}, {3, -3, -1}, {2, -2, -3}, {2, -2, -3}, {1, -1, -3}, {0, 0, -2}, {0, 0, 1}},
    {{3, -3, 1}, {3, -3, -1}, {2, -2, -3}, {1, -1, -2}, {1, -1, -2}, {0, 0, -1}, {-1, 1, 0}},
    {{2, -3, 0}, {2, -2, -1}, {2, -1, -2}, {1, -1, -2}, {0, 0, -1}, {-1, 2, -1}, {-1, 2, 0}},
    {{2, -2, 0}, {2, -2, -1}, {1, -1, -1}, {0, 0, -1}, {-1, 1, -1}, {-2, 2, -1}, {-2, 2, 0}},
    {{1, -2, 0}, {1, -1, 0}, {0, 0, 0}, {-1, 1, 0}, {-1, 1, 0}, {-2, 2, 0}, {-2, 3, 0}},
    {{1, 0, 3}, {0, 0, 2}, {-1, 1, 2}, {-2, 1, 2}, {-2, 2, 1}, {-2, 3, 1}, {-3, 3, 3}},
    {{0, 0, 3}, {0, 0, 2}, {-2, 1, 2}, {-2, 2, 2}, {-2, 2, 1}, {-3, 3, 1}, {-3, 3, 3}},
};

Outcome fuzzy_table() {
  int match = 0;
  for (int e = 0; e < 7; ++e)
    for (int ec = 0; ec < 7; ++ec) {
      const auto d = fuzzy_adjust(-6.0 + 2 * e, -6.0 + 2 * ec);
      match += d.kp == kTable[e][ec][0] && d.ki == kTable[e][ec][1] && d.kd == kTable[e][ec][2];
    }
  return {match == 49, std::to_string(match) + "/49 crisp lookups match"};
}

// ------------------------------------------------------------ criterion 3

Outcome dynamics_invariants() {
  double orth = 0.0;
  for (double phi = -1.5; phi <= 1.5; phi += 0.25)
    for (double th = -1.5; th <= 1.5; th += 0.25)
      for (double psi = -3.1; psi <= 3.1; psi += 0.31) {
        const auto r = rotation_body_to_earth(phi, th, psi);
        const auto m = multiply(transpose(r), r);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) orth = std::max(orth, std::abs(m[i][j] - (i == j)));
      }
  AirframeParams p;
  UavState hover;
  hover.position = {0, 0, 100};
  const double zdd = std::abs(accelerations(hover, {p.mass * p.gravity, 0, 0, 0}, p).first.z);

  UavState s0;
  s0.position = {10, -5, 300};
  s0.velocity = {3, -1, 0.5};
  s0.attitude = {0.2, -0.15, 0.4};
  s0.rates = {0.3, -0.2, 0.5};
  const ControlInput u{850, 0.02, -0.015, 0.03};
  auto integrate = [&](double dt) {
    UavState s = s0;
    const int n = static_cast<int>(std::lround(2.0 / dt));
    for (int i = 0; i < n; ++i) s = step_dynamics(s, u, dt, p, false);
    return s;
  };
  auto err = [](const UavState& a, const UavState& b) {
    double e = 0;
    for (const auto& [x, y] : {std::pair{a.position, b.position}, {a.velocity, b.velocity},
                               {a.attitude, b.attitude}, {a.rates, b.rates}})
      e = std::max(e, (x - y).norm());
    return e;
  };
  const double dt = 0.1;
  const UavState ref = integrate(dt / 4);
  const double ratio = err(integrate(dt), ref) / err(integrate(dt / 2), ref);
  const bool ok = orth < 1e-12 && zdd < 1e-6 && ratio >= 12 && ratio <= 20;
  return {ok, "max|R'R-I|=" + fmt(orth, 3) + ", hover |zdd|=" + fmt(zdd, 3) + ", RK4 halving ratio=" + fmt(ratio)};
}

// ------------------------------------------------------------ criterion 4

std::vector<std::uint64_t> seed_range(int n) {
  std::vector<std::uint64_t> s;
  for (int i = 1; i <= n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

Outcome convergence(const ScenarioConfig& cfg) {
  const BenchResult b = convergence_bench(cfg, seed_range(30));
  const double acs = b.variants[0].mean_iterations(), d = b.variants[1].mean_iterations(),
               ds = b.variants[2].mean_iterations();
  const double fa = b.variants[0].mean_final(), fd = b.variants[1].mean_final(), fds = b.variants[2].mean_final();
  const bool ok = ds <= 0.90 * acs && d <= 0.95 * acs && fds <= fd && fd <= fa;
  return {ok, "mean iterations-to-5%: ACS " + fmt(acs) + ", ACS-D " + fmt(d) + " (" + fmt(d / acs, 3) +
                  "x), ACS-DS " + fmt(ds) + " (" + fmt(ds / acs, 3) + "x); mean final cost ACS " + fmt(fa, 6) +
                  ", ACS-D " + fmt(fd, 6) + ", ACS-DS " + fmt(fds, 6)};
}

// ------------------------------------------------------------ criterion 5

Outcome deadlock(const ScenarioConfig& cfg) {
  const TerrainGrid g = trap_map();
  const PlanTargets t = trap_targets();
  const PlannerParams p = PlannerParams::from(cfg);
  int stuck_runs = 0, clean_runs = 0;
  long stuck = 0;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    const auto a = plan_on_targets(g, t, p, PlannerVariant::acs, Rng(s));
    const auto d = plan_on_targets(g, t, p, PlannerVariant::acs_ds, Rng(s));
    stuck_runs += a.stuck_ants > 0;
    stuck += a.stuck_ants;
    clean_runs += d.failed_ants == 0 && d.completed_ants == static_cast<long>(p.ants) * p.iterations;
  }
  return {stuck_runs == 30 && clean_runs == 30,
          "classical ACS stuck in " + std::to_string(stuck_runs) + "/30 runs (" + std::to_string(stuck) +
              " stuck ants); ACS-DS completed every construction in " + std::to_string(clean_runs) + "/30 runs"};
}

// ------------------------------------------------------------ criterion 6

Outcome guidance_bounds(const ScenarioConfig& cfg) {
  const TerrainGrid g = comb_map();
  const PlanTargets t{comb_targets().start, {comb_targets().cells.front()}};
  PlannerParams p = PlannerParams::from(cfg);
  const int horizon = p.iterations;
  p.iterations = 10 * horizon;
  const int half = p.iterations / 2;
  int bounded = 0, dominant = 0;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    double mid = 0.0, late = 0.0;
    GuidanceField::SigmaSummary last;
    plan_on_targets(g, t, p, PlannerVariant::acs_ds, Rng(s),
                    [&](const IterationStats& st, const GuidanceField& f, const std::vector<Cell>& best) {
                      if (st.iteration + 1 < half) return;
                      const auto sm = f.summarize(best);
                      if (st.iteration + 1 == half)
                        mid = sm.max_all;
                      else
                        late = std::max(late, sm.max_all);
                      last = sm;
                    });
    bounded += late <= mid * (1 + 1e-6);
    dominant += last.min_on >= last.max_off;
  }
  return {bounded >= 27 && dominant >= 27,
          std::to_string(p.iterations) + " iterations: max sigma bounded over the last half in " +
              std::to_string(bounded) + "/30 seeds, on-path min >= off-path max in " + std::to_string(dominant) +
              "/30 seeds"};
}

// ------------------------------------------------------------ criterion 7

Outcome pso_oracle() {
  ScenarioConfig c;
  auto device = [&](int j, Vec3 pos) {
    return MobileDevice{j, pos, c.arrival_rate, c.p_md_min, c.p_md_max, c.f_md_min, c.f_md_max};
  };
  const std::vector<MobileDevice> mds{device(0, {0, 0, 0}), device(1, {400, 0, 0})};
  SlotScenario sc;
  sc.slot = 3;
  sc.uav = {200, 0, 150};
  sc.channels = {20, 20};
  sc.tasks = {{0, 0, 2e6, 500, 3}, {0, 1, 6e5, 500, 3}, {1, 0, 3e6, 500, 3}, {1, 1, 1e6, 500, 3}};
  const double eps = 0.5;
  DecisionBounds b = DecisionBounds::from(c);
  b.f_uav = {2e9, 2e9};
  b.p_uav = {1.0, 1.0};
  auto level = [](const Range& r, int i) { return r.lo + (r.hi - r.lo) * i / 3.0; };
  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < 81; ++code) {
    std::vector<Place> x(4);
    for (int i = 0, k = code; i < 4; ++i, k /= 3) x[i] = static_cast<Place>(k % 3);
    for (int lv = 0; lv < 256; ++lv) {
      const Resources r{2e9, 1.0, {level(b.p_md, lv % 4), level(b.p_md, lv / 4 % 4)},
                        {level(b.f_md, lv / 16 % 4), level(b.f_md, lv / 64)}};
      const auto cost = evaluate_slot(c, mds, sc, x, r, eps);
      if (cost.infeasible == 0) best = std::min(best, cost.score);
    }
  }
  SwarmProblem prob(c, mds, sc, eps);
  prob.set_bounds(b);
  prob.set_levels(4);
  const SwarmParams sp = SwarmParams::from(c);
  int close = 0, valid = 0;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    const auto sol = optimize(prob, sp, Rng(s));
    close += sol.score <= 1.02 * best;
    valid += sol.feasible && check_constraints({to_slot_record(prob, sol)}, c).all_passed();
  }
  return {close >= 28 && valid == 30, std::to_string(close) + "/30 seeds within 2% of the enumerated optimum " +
                                          fmt(best, 8) + "; " + std::to_string(valid) + "/30 pass C1-C10"};
}

// ------------------------------------------------------------ criterion 8

Outcome end_to_end(const ScenarioConfig& cfg) {
  double s_ran = 0, s_acs = 0, s_best = 0;
  int wins = 0;
  const int n = 30;
  for (int seed = 1; seed <= n; ++seed) {
    const auto ran = run_baseline(cfg, Baseline::ran, seed);
    const auto acs = run_baseline(cfg, Baseline::acs, seed);
    const auto best = run_baseline(cfg, Baseline::acs_ds_atc, seed);
    s_ran += ran.score / n;
    s_acs += acs.score / n;
    s_best += best.score / n;
    wins += best.score < ran.score;
  }
  const bool ok = s_best <= 0.6 * s_ran && s_best <= 0.8 * s_acs && wins >= 27;
  return {ok, "mean S: RAN " + fmt(s_ran, 6) + ", ACS " + fmt(s_acs, 6) + ", ACS-DS+ATC " + fmt(s_best, 6) +
                  "; ratio vs RAN " + fmt(s_best / s_ran, 3) + " (<= 0.6), vs ACS " + fmt(s_best / s_acs, 3) +
                  " (<= 0.8); beats RAN in " + std::to_string(wins) + "/30 seeds"};
}

// ------------------------------------------------------------ criterion 9

Outcome propeller(const ScenarioConfig& cfg) {
  const SweepResult r = propeller_sweep(cfg, 1);
  double lo = 1e300, hi = -1e300;
  for (const auto& row : r.rows)
    if (row.axis == "radius") {
      lo = std::min(lo, row.candidate.radius_mm);
      hi = std::max(hi, row.candidate.radius_mm);
    }
  const double r_best = r.rows.at(r.argmin.at("radius")).candidate.radius_mm;
  const int nb = r.rows.at(r.argmin.at("blades")).candidate.blades;
  double mean = 0;
  for (double e : r.random_energy) mean += e / r.random_energy.size();
  const double best = r.rows.at(r.best).energy;
  const bool ok = r_best > lo && r_best < hi && nb == 2 && r.random_energy.size() == 50 && best <= 0.7 * mean;
  return {ok, "radius minimiser " + fmt(r_best) + " mm in (" + fmt(lo) + ", " + fmt(hi) + "), best blade count " +
                  std::to_string(nb) + ", optimum " + fmt(best, 6) + " vs random mean " + fmt(mean, 6) + " (" +
                  fmt(best / mean, 3) + "x)"};
}

// ----------------------------------------------------------- criterion 10

Outcome complexity(const ScenarioConfig& base) {
  std::vector<double> times;
  for (int n : {4, 8, 16}) {
    ScenarioConfig c = base;
    c.num_mds = n;
    double total = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Scenario s = make_scenario(c, seed);
      const auto t0 = std::chrono::steady_clock::now();
      plan_on_targets(s.terrain, s.targets, PlannerParams::from(c), PlannerVariant::acs_ds, Rng(seed));
      total += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    times.push_back(total / 3);
  }
  const double r1 = times[1] / times[0], r2 = times[2] / times[1];
  return {r1 <= 10 && r2 <= 10, "mean planner time n=4: " + fmt(times[0], 3) + " s, n=8: " + fmt(times[1], 3) +
                                    " s, n=16: " + fmt(times[2], 3) + " s; doubling ratios " + fmt(r1, 3) + ", " +
                                    fmt(r2, 3)};
}

// ----------------------------------------------------------- criterion 11

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Concatenated stdout plus every output file except wall-clock timing.
std::string run_capture(const std::string& cli, const std::string& args, const fs::path& dir, int& code) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = cli + " " + args + " --out " + (dir / "files").string() + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::string all = slurp(out);
  if (fs::exists(dir / "files")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "files")) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      if (f.filename() != "timing.csv") all += "\n== " + f.filename().string() + "\n" + slurp(f);
  }
  return all;
}

Outcome determinism(const std::string& cli, const std::string& config) {
  if (cli.empty()) return {false, "no --cli given"};
  const std::string base = "--config " + config + " --seed 3";
  const std::vector<std::pair<std::string, std::string>> cmds{
      {"plan", "plan " + base + " --reps 2 --format json"},
      {"assign", "assign " + base + " --format csv"},
      {"sweep", "sweep " + base + " --format json"},
      {"bench", "bench " + base + " --reps 3"},
      {"compare", "compare " + base + " --format csv"},
      {"validate-config", "validate-config " + base},
  };
  const fs::path root = fs::temp_directory_path() / "uavfog_acceptance";
  int same = 0;
  std::string bad;
  for (const auto& [name, args] : cmds) {
    int c1 = 0, c2 = 0;
    const std::string a = run_capture(cli, args, root / (name + "_1"), c1);
    const std::string b = run_capture(cli, args, root / (name + "_2"), c2);
    if (c1 == 0 && c2 == 0 && a == b && !a.empty())
      ++same;
    else
      bad += " " + name + "(exit " + std::to_string(c1) + "/" + std::to_string(c2) + ")";
  }
  fs::remove_all(root);
  return {same == static_cast<int>(cmds.size()),
          std::to_string(same) + "/" + std::to_string(cmds.size()) + " subcommands byte-identical across two runs" +
              (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli, config;
  std::vector<int> expect_fail, only;
  app.add_option("--cli", cli, "path to the uavfog_cli binary");
  app.add_option("--config", config, "reference config")->required();
  app.add_option("--expect-fail", expect_fail, "criteria known to be unattainable (still reported)");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  ScenarioConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const Error& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 2;
  }

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "formula fidelity", 1, formulas},
      {2, "fuzzy rule table", 1, fuzzy_table},
      {3, "dynamics invariants", 10, dynamics_invariants},
      {4, "planner convergence ordering", 300, [&] { return convergence(cfg); }},
      {5, "deadlock elimination", 120, [&] { return deadlock(cfg); }},
      {6, "guidance boundedness and dominance", 180, [&] { return guidance_bounds(cfg); }},
      {7, "swarm vs enumeration", 120, pso_oracle},
      {8, "end-to-end cost ordering", 900, [&] { return end_to_end(cfg); }},
      {9, "propeller sweep", 120, [&] { return propeller(cfg); }},
      {10, "planner complexity scaling", 600, [&] { return complexity(cfg); }},
      {11, "CLI determinism", 300, [&] { return determinism(cli, config); }},
  };
  const std::set<int> expected(expect_fail.begin(), expect_fail.end()), subset(only.begin(), only.end());

  int unexpected = 0;
  for (const auto& c : all) {
    if (!subset.empty() && !subset.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << fmt(secs, 3) << " s of " << fmt(c.budget_s) << " s" << (in_time ? "" : ", over budget") << "]";
    if (!pass && expected.count(c.id)) std::cout << " [expected failure]";
    if (pass && expected.count(c.id)) std::cout << " [expected failure now passes]";
    std::cout << std::endl;
    if (!pass && !expected.count(c.id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
