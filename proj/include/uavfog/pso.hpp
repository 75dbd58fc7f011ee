#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include <json.hpp>

#include "uavfog/config.hpp"
#include "uavfog/core_model.hpp"
#include "uavfog/cost_model.hpp"
#include "uavfog/error.hpp"
#include "uavfog/rng.hpp"

namespace uavfog {

struct SwarmParams {
  int particles = 40;
  double accel_personal = 2.0;  // F_A1
  double accel_global = 2.0;    // F_A2
  double inertia = 0.65;        // F_I
  int stagnation_rounds = 20;
  double stagnation_tol = 1e-4;  // relative to the initial gBest
  int max_iterations = 2000;
  double velocity_clamp = 0.2;  // per coordinate, unit box

  static SwarmParams from(const ScenarioConfig& c) {
    SwarmParams p;
    p.particles = c.particles;
    p.accel_personal = c.accel_personal;
    p.accel_global = c.accel_global;
    p.inertia = c.inertia_weight;
    p.stagnation_rounds = c.stagnation_rounds;
    p.stagnation_tol = c.stagnation_tol;
    p.max_iterations = c.pso_max_iterations;
    p.velocity_clamp = c.velocity_clamp;
    return p;
  }
};

struct Range {
  double lo = 0.0, hi = 0.0;
  double at(double u) const { return lo + (hi - lo) * u; }
  double unit(double v) const { return hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0; }
};

/// Search box for the continuous decisions. Set lo == hi to pin a decision.
struct DecisionBounds {
  Range f_uav, p_uav, f_md, p_md;
  static DecisionBounds from(const ScenarioConfig& c) {
    return {{c.f_uav_min, c.f_uav_max},
            {c.p_uav_min, c.p_uav_max},
            {c.f_md_min, c.f_md_max},
            {c.p_md_min, c.p_md_max}};
  }
};

struct Decision {
  std::vector<Place> placement;  // per task of the slot
  Resources resources;
};

struct Evaluation {
  SlotCost cost;
  int violations = 0;
  double fitness = 0.0;
};

/// One slot's assignment problem. Coordinates live in the unit box:
///   3 logits per task | (p_j, f_j) per active device | f_uav | p_uav
class SwarmProblem {
public:
  SwarmProblem(const ScenarioConfig& cfg, std::vector<MobileDevice> mds, SlotScenario sc,
               double epsilon, double energy_used_j = 0.0)
      : cfg_(cfg),
        mds_(std::move(mds)),
        sc_(std::move(sc)),
        epsilon_(epsilon),
        used_j_(energy_used_j),
        bounds_(DecisionBounds::from(cfg)),
        penalty_(cfg.penalty_weight) {
    if (sc_.tasks.empty()) throw DomainError("swarm needs at least one task in the slot");
    std::vector<bool> seen(mds_.size(), false);
    for (const auto& t : sc_.tasks) {
      if (t.md < 0 || t.md >= static_cast<int>(mds_.size()))
        throw DomainError("task refers to unknown MD " + std::to_string(t.md));
      seen[t.md] = true;
    }
    for (std::size_t j = 0; j < mds_.size(); ++j)
      if (seen[j]) active_.push_back(static_cast<int>(j));
    if (sc_.channels.size() != mds_.size()) throw DomainError("channel vector size mismatch");
    rescale();
  }

  /// Restrict placements; e.g. {true, true, false} disables the DC.
  void set_allowed(std::array<bool, 3> allowed) {
    if (!allowed[0] && !allowed[1] && !allowed[2]) throw DomainError("no placement allowed");
    allowed_ = allowed;
    rescale();
  }
  void set_bounds(const DecisionBounds& b) {
    bounds_ = b;
    rescale();
  }
  /// Snap continuous decisions to n evenly spaced levels (0 = continuous).
  void set_levels(int n) {
    if (n == 1 || n < 0) throw DomainError("levels must be 0 or >= 2");
    levels_ = n;
    rescale();
  }

  std::size_t dims() const { return 3 * sc_.tasks.size() + 2 * active_.size() + 2; }
  const SlotScenario& scenario() const { return sc_; }
  const std::vector<MobileDevice>& mds() const { return mds_; }
  const std::vector<int>& active() const { return active_; }
  const ScenarioConfig& config() const { return cfg_; }
  const DecisionBounds& bounds() const { return bounds_; }
  double epsilon() const { return epsilon_; }
  /// Penalty unit: S of all-local at mid-range resources.
  double scale() const { return scale_; }

  Decision decode(const std::vector<double>& u) const {
    Decision d;
    const std::size_t n = sc_.tasks.size();
    d.placement.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      int best = -1;
      for (int k = 0; k < 3; ++k)  // strict > keeps the earliest on ties: MD, UAV, DC
        if (allowed_[k] && (best < 0 || u[3 * i + k] > u[3 * i + best])) best = k;
      d.placement[i] = static_cast<Place>(best);
    }
    const std::size_t k = mds_.size();
    d.resources.p_md.assign(k, bounds_.p_md.lo);
    d.resources.f_md.assign(k, bounds_.f_md.lo);
    std::size_t o = 3 * n;
    for (int j : active_) {
      d.resources.p_md[j] = bounds_.p_md.at(snap(u[o++]));
      d.resources.f_md[j] = bounds_.f_md.at(snap(u[o++]));
    }
    d.resources.f_uav = bounds_.f_uav.at(snap(u[o++]));
    d.resources.p_uav = bounds_.p_uav.at(snap(u[o]));
    return d;
  }

  /// Inverse of decode for a known decision (used for warm starts).
  std::vector<double> encode(const Decision& d) const {
    std::vector<double> u(dims(), 0.0);
    for (std::size_t i = 0; i < sc_.tasks.size(); ++i) u[3 * i + static_cast<int>(d.placement[i])] = 1.0;
    std::size_t o = 3 * sc_.tasks.size();
    for (int j : active_) {
      u[o++] = bounds_.p_md.unit(d.resources.p_md[j]);
      u[o++] = bounds_.f_md.unit(d.resources.f_md[j]);
    }
    u[o++] = bounds_.f_uav.unit(d.resources.f_uav);
    u[o] = bounds_.p_uav.unit(d.resources.p_uav);
    return u;
  }

  Evaluation evaluate(const Decision& d) const {
    Evaluation e;
    e.cost = evaluate_slot(cfg_, mds_, sc_, d.placement, d.resources, epsilon_);
    e.violations = e.cost.infeasible;
    auto out = [](double v, double lo, double hi) {
      const double tol = 1e-9 * std::max(std::abs(lo), std::abs(hi));
      return v < lo - tol || v > hi + tol;
    };
    e.violations += out(d.resources.f_uav, cfg_.f_uav_min, cfg_.f_uav_max);
    e.violations += out(d.resources.p_uav, cfg_.p_uav_min, cfg_.p_uav_max);
    for (int j : active_) {
      e.violations += out(d.resources.f_md[j], cfg_.f_md_min, cfg_.f_md_max);
      e.violations += out(d.resources.p_md[j], cfg_.p_md_min, cfg_.p_md_max);
    }
    if ((used_j_ + e.cost.e_uav) / kJoulesPerWh > cfg_.battery_capacity_wh) ++e.violations;
    e.fitness = e.cost.score + e.violations * penalty_ * scale_;
    return e;
  }

  double fitness(const std::vector<double>& u) const { return evaluate(decode(u)).fitness; }

private:
  double snap(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (levels_ < 2) return u;
    return std::round(u * (levels_ - 1)) / (levels_ - 1);
  }

  void rescale() {
    Decision d;
    d.placement.assign(sc_.tasks.size(), Place::md);
    const std::size_t k = mds_.size();
    d.resources.p_md.assign(k, bounds_.p_md.at(0.5));
    d.resources.f_md.assign(k, bounds_.f_md.at(0.5));
    d.resources.f_uav = bounds_.f_uav.at(0.5);
    d.resources.p_uav = bounds_.p_uav.at(0.5);
    const double s = evaluate_slot(cfg_, mds_, sc_, d.placement, d.resources, epsilon_).score;
    scale_ = std::isfinite(s) && s > 0.0 ? s : 1.0;
  }

  ScenarioConfig cfg_;
  std::vector<MobileDevice> mds_;
  SlotScenario sc_;
  double epsilon_;
  double used_j_;
  DecisionBounds bounds_;
  std::array<bool, 3> allowed_{true, true, true};
  double penalty_;
  int levels_ = 0;
  double scale_ = 1.0;
  std::vector<int> active_;
};

struct Particle {
  std::vector<double> x, v, best;
  double fit = 0.0, best_fit = 0.0;
  Rng rng;  // velocity-update draws
};

struct SwarmState {
  std::vector<Particle> particles;
  std::vector<double> gbest;
  double gbest_fit = std::numeric_limits<double>::infinity();
  double threshold = 0.0;     // ð
  std::deque<double> window;  // last stagnation_rounds + 1 gBest values
  std::vector<double> trace;  // gBest after init and after every step
  int iteration = 0;
  Rng rng;
};

/// Uniform positions in the unit box, small uniform velocities. An optional
/// warm start replaces particle 0.
inline SwarmState init_swarm(const SwarmProblem& prob, const SwarmParams& sp, const Rng& rng,
                             const std::vector<double>* warm = nullptr) {
  if (sp.particles < 1) throw DomainError("swarm needs at least one particle");
  SwarmState s;
  s.rng = rng;
  const std::size_t n = prob.dims();
  for (int h = 0; h < sp.particles; ++h) {
    Rng r = rng.child(0, static_cast<std::uint64_t>(h));
    Particle p;
    p.rng = rng.child(1, static_cast<std::uint64_t>(h));
    p.x.resize(n);
    p.v.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
      p.x[d] = r.uniform();
      p.v[d] = r.uniform(-0.5, 0.5) * sp.velocity_clamp;
    }
    if (h == 0 && warm) {
      if (warm->size() != n) throw DomainError("warm start has the wrong dimension");
      p.x = *warm;
    }
    p.fit = prob.fitness(p.x);
    p.best = p.x;
    p.best_fit = p.fit;
    if (p.fit < s.gbest_fit) {
      s.gbest_fit = p.fit;
      s.gbest = p.x;
    }
    s.particles.push_back(std::move(p));
  }
  s.threshold = sp.stagnation_tol * std::abs(s.gbest_fit);
  s.window.push_back(s.gbest_fit);
  s.trace.push_back(s.gbest_fit);
  return s;
}

/// v ← F_I·v + F_A1·r₁·(pBest − G) + F_A2·r₂·(gBest − G); G ← G + v.
inline void step_swarm(SwarmState& s, const SwarmProblem& prob, const SwarmParams& sp) {
  ++s.iteration;
  const std::vector<double> g = s.gbest;  // synchronous: all particles see the same gBest
  for (std::size_t h = 0; h < s.particles.size(); ++h) {
    Particle& p = s.particles[h];
    Rng& r = p.rng;
    for (std::size_t d = 0; d < p.x.size(); ++d) {
      const double r1 = r.uniform(), r2 = r.uniform();
      double v = sp.inertia * p.v[d] + sp.accel_personal * r1 * (p.best[d] - p.x[d]) +
                 sp.accel_global * r2 * (g[d] - p.x[d]);
      v = std::clamp(v, -sp.velocity_clamp, sp.velocity_clamp);
      p.v[d] = v;
      p.x[d] = std::clamp(p.x[d] + v, 0.0, 1.0);
    }
    p.fit = prob.fitness(p.x);
    if (p.fit < p.best_fit) {
      p.best_fit = p.fit;
      p.best = p.x;
    }
  }
  for (const auto& p : s.particles)
    if (p.best_fit < s.gbest_fit) {
      s.gbest_fit = p.best_fit;
      s.gbest = p.best;
    }
  s.window.push_back(s.gbest_fit);
  if (static_cast<int>(s.window.size()) > sp.stagnation_rounds + 1) s.window.pop_front();
  s.trace.push_back(s.gbest_fit);
}

/// Sliding window: the last `stagnation_rounds` rounds moved gBest by less than ð.
inline bool stagnated(const SwarmState& s, const SwarmParams& sp) {
  if (static_cast<int>(s.window.size()) < sp.stagnation_rounds + 1) return false;
  return std::abs(s.window.front() - s.window.back()) < s.threshold;
}

struct SwarmSolution {
  int slot = 0;
  double score = 0.0;    // S of the decoded gBest
  double fitness = 0.0;  // S plus penalties
  Decision decision;
  SlotCost cost;
  int violations = 0;
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
  std::vector<double> position;  // unit-box gBest, reusable as a warm start
};

inline SwarmSolution optimize(const SwarmProblem& prob, const SwarmParams& sp, const Rng& rng,
                              const std::vector<double>* warm = nullptr) {
  SwarmState s = init_swarm(prob, sp, rng, warm);
  bool converged = false;
  while (s.iteration < sp.max_iterations) {
    step_swarm(s, prob, sp);
    if (stagnated(s, sp)) {
      converged = true;
      break;
    }
  }
  SwarmSolution out;
  out.slot = prob.scenario().slot;
  out.decision = prob.decode(s.gbest);
  const Evaluation e = prob.evaluate(out.decision);
  out.cost = e.cost;
  out.score = e.cost.score;
  out.fitness = e.fitness;
  out.violations = e.violations;
  out.feasible = e.violations == 0;
  out.converged = converged;
  out.iterations = s.iteration;
  out.trace = std::move(s.trace);
  out.position = std::move(s.gbest);
  return out;
}

/// Warm-start vector for a new slot: each device keeps its previous
/// placement and resources; the UAV keeps f and p.
inline std::vector<double> warm_start(const SwarmProblem& next, const SwarmProblem& prev,
                                      const SwarmSolution& sol) {
  const std::size_t k = next.mds().size();
  std::vector<Place> last(k, Place::md);
  for (std::size_t i = 0; i < prev.scenario().tasks.size(); ++i)
    last[prev.scenario().tasks[i].md] = sol.decision.placement[i];
  Decision d;
  for (const auto& t : next.scenario().tasks) d.placement.push_back(last[t.md]);
  d.resources = sol.decision.resources;
  d.resources.p_md.resize(k, next.bounds().p_md.lo);
  d.resources.f_md.resize(k, next.bounds().f_md.lo);
  return next.encode(d);
}

/// Constraint-checker view of a solved slot.
inline SlotRecord to_slot_record(const SwarmProblem& prob, const SwarmSolution& sol) {
  SlotRecord r;
  r.slot = sol.slot;
  r.speed = prob.scenario().speed;
  r.altitude = prob.scenario().uav.z;
  r.channels = prob.scenario().channels;
  r.resources = sol.decision.resources;
  for (Place p : sol.decision.placement) r.assignment.push_back(Assignment::of(p));
  r.cost = sol.cost;
  return r;
}

inline nlohmann::json to_json(const SwarmProblem& prob, const SwarmSolution& sol) {
  nlohmann::json a = nlohmann::json::array();
  const auto& tasks = prob.scenario().tasks;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    a.push_back({{"i", tasks[i].index}, {"j", tasks[i].md}, {"place", to_string(sol.decision.placement[i])}});
  nlohmann::json pm = nlohmann::json::object(), fm = nlohmann::json::object();
  for (int j : prob.active()) {
    pm[std::to_string(j)] = sol.decision.resources.p_md[j];
    fm[std::to_string(j)] = sol.decision.resources.f_md[j];
  }
  return {{"slot", sol.slot},
          {"S", sol.score},
          {"assignments", std::move(a)},
          {"powers", {{"uav", sol.decision.resources.p_uav}, {"md", std::move(pm)}}},
          {"frequencies", {{"uav", sol.decision.resources.f_uav}, {"md", std::move(fm)}}},
          {"feasible", sol.feasible},
          {"converged", sol.converged},
          {"iterations", sol.iterations}};
}

}  // namespace uavfog
