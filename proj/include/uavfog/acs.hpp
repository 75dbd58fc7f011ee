#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "uavfog/config.hpp"
#include "uavfog/core_model.hpp"
#include "uavfog/dynamics.hpp"
#include "uavfog/error.hpp"
#include "uavfog/rng.hpp"
#include "uavfog/terrain.hpp"

namespace uavfog {

enum class PlannerVariant { acs, acs_d, acs_ds };

inline const char* to_string(PlannerVariant v) {
  switch (v) {
    case PlannerVariant::acs: return "ACS";
    case PlannerVariant::acs_d: return "ACS-D";
    case PlannerVariant::acs_ds: return "ACS-DS";
  }
  return "?";
}

inline bool uses_decoupling(PlannerVariant v) { return v != PlannerVariant::acs; }
inline bool uses_safety(PlannerVariant v) { return v == PlannerVariant::acs_ds; }

struct PlannerParams {
  int ants = 30;
  int iterations = 60;
  double rho = 0.25;
  double tau0 = 3.8;
  double tau_floor = 0.38;
  double eta0 = 2.5;
  double alpha = 1.0;
  double beta = 2.0;
  double scan_radius = 200.0;
  double backtrack_depth = 200.0;
  double deposit_scale = 1.0;
  int quiet_limit = 25;
  double approach_radius = 200.0;
  double hover_power = 13.5;  // W, for the edge cost
  double cruise_speed = 10.0;
  int backtrack_budget = 500;  // per target

  static PlannerParams from(const ScenarioConfig& c) {
    PlannerParams p;
    p.ants = c.ants;
    p.iterations = c.acs_iterations;
    p.rho = c.evaporation;
    p.tau0 = c.pheromone_init;
    p.tau_floor = c.pheromone_floor;
    p.eta0 = c.heuristic_base;
    p.alpha = c.acs_alpha;
    p.beta = c.acs_beta;
    p.scan_radius = c.scan_radius;
    p.backtrack_depth = c.backtrack_depth;
    p.deposit_scale = c.deposit_scale;
    p.quiet_limit = c.quiet_limit;
    p.approach_radius = c.approach_radius;
    p.cruise_speed = c.cruise_speed;
    const auto af = AirframeParams::from(c);
    const double w = equal_rotor_speed(af.mass * af.gravity, af.thrust_coeff);
    p.hover_power = movement_energy({w, w, w, w}, MotorParams::from(c), 1.0);
    return p;
  }
};

// ---------------------------------------------------------- guidance

/// Per directed edge pheromone V_P and safety κ; σ = V_P + κ when the safety
/// mechanism is on, V_P otherwise.
class GuidanceField {
public:
  GuidanceField(const TerrainGrid& grid, const PlannerParams& p, bool safety)
      : grid_(&grid), p_(p), safety_(safety),
        vp_(grid.cell_count() * 26, p.tau0),
        k0_(grid.cell_count() * 26, std::numeric_limits<double>::quiet_NaN()),
        kval_(grid.cell_count() * 26, 0.0), kiter_(grid.cell_count() * 26, -1) {}

  std::size_t edge(const Cell& from, const Cell& to) const {
    return grid_->index(from) * 26 + static_cast<std::size_t>(direction_id(from, to));
  }
  bool safety() const { return safety_; }
  double pheromone(const Cell& from, const Cell& to) const { return vp_[edge(from, to)]; }

  /// Cone-scan safety value of the edge (the initial κ); cached.
  double scan_kappa(const Cell& from, const Cell& to) const {
    const auto e = edge(from, to);
    if (std::isnan(k0_[e])) k0_[e] = grid_->safety_value(from, to, p_.scan_radius);
    return k0_[e];
  }

  /// Current κ: evaporates with ρ like the pheromone and is re-deposited at
  /// its scan value on the global-best path. Decay is applied lazily.
  double kappa(const Cell& from, const Cell& to) const {
    const auto e = edge(from, to);
    if (std::isnan(k0_[e])) scan_kappa(from, to);
    if (kiter_[e] < 0) return k0_[e] * std::pow(1.0 - p_.rho, iteration_);
    return kval_[e] * std::pow(1.0 - p_.rho, iteration_ - kiter_[e]);
  }

  double sigma(const Cell& from, const Cell& to) const {
    return pheromone(from, to) + (safety_ ? kappa(from, to) : 0.0);
  }

  int iteration() const { return iteration_; }

  /// V ← max(floor, (1−ρ)V) and κ ← (1−ρ)κ everywhere, then V ← V + ρΔ and
  /// κ ← κ + ρκ_scan on `best`.
  void update(const std::vector<Cell>& best, double deposit) {
    const double keep = 1.0 - p_.rho;
    for (double& v : vp_) v = std::max(p_.tau_floor, keep * v);
    std::vector<double> kb(best.size(), 0.0);
    if (safety_)
      for (std::size_t i = 1; i < best.size(); ++i) kb[i] = kappa(best[i - 1], best[i]);
    ++iteration_;
    for (std::size_t i = 1; i < best.size(); ++i) {
      const auto e = edge(best[i - 1], best[i]);
      // the floor never binds on deposited edges
      vp_[e] += p_.rho * deposit;
      if (safety_ && kiter_[e] != iteration_) {
        kval_[e] = keep * kb[i] + p_.rho * k0_[e];
        kiter_[e] = iteration_;
      }
    }
  }

  /// σ over feasible edges, split by membership in `path`.
  struct SigmaSummary {
    double max_all = 0.0, min_on = std::numeric_limits<double>::infinity(), max_off = 0.0;
  };
  SigmaSummary summarize(const std::vector<Cell>& path) const {
    std::vector<char> on(vp_.size(), 0);
    for (std::size_t i = 1; i < path.size(); ++i) on[edge(path[i - 1], path[i])] = 1;
    SigmaSummary s;
    for (std::size_t c = 0; c < grid_->cell_count(); ++c) {
      const Cell from = grid_->cell_at(c);
      if (grid_->blocked(from)) continue;
      for (const Cell& to : grid_->neighbors(from)) {
        const auto e = edge(from, to);
        const double sg = sigma(from, to);
        s.max_all = std::max(s.max_all, sg);
        if (on[e]) s.min_on = std::min(s.min_on, sg);
        else s.max_off = std::max(s.max_off, sg);
      }
    }
    return s;
  }

private:
  const TerrainGrid* grid_;
  PlannerParams p_;
  bool safety_;
  std::vector<double> vp_;
  mutable std::vector<double> k0_;
  std::vector<double> kval_;
  std::vector<int> kiter_;
  int iteration_ = 0;
};

/// Transition weights σ^α η^β normalised over the candidates.
inline std::vector<double> transition_probabilities(const std::vector<double>& sigma,
                                                    const std::vector<double>& eta, double alpha,
                                                    double beta) {
  if (sigma.size() != eta.size()) throw DomainError("sigma/eta size mismatch");
  std::vector<double> w(sigma.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::pow(sigma[i], alpha) * std::pow(eta[i], beta);
    sum += w[i];
  }
  if (!(sum > 0.0)) throw DomainError("no candidate with positive weight");
  for (double& v : w) v /= sum;
  return w;
}

// --------------------------------------------------------- decoupling

enum class Trigger { none, cycle, kappa_drop, quiet, deadlock };

inline const char* to_string(Trigger t) {
  switch (t) {
    case Trigger::none: return "none";
    case Trigger::cycle: return "cycle";
    case Trigger::kappa_drop: return "kappa_drop";
    case Trigger::quiet: return "quiet";
    case Trigger::deadlock: return "deadlock";
  }
  return "?";
}

struct DecouplingInput {
  bool revisits_path = false;  // chosen waypoint was abandoned earlier in this leg
  double kappa_prev = 1.0;     // κ of the edge that led here
  double kappa_next = 1.0;     // κ of the chosen edge
  bool check_kappa = false;
  int quiet_steps = 0;         // waypoints since the last trigger
  int quiet_limit = 25;
  int iteration = 0;
  int iterations = 1;
};

/// Backtracking rules checked on each selection, in priority order.
inline Trigger detect_trigger(const DecouplingInput& in) {
  if (in.revisits_path) return Trigger::cycle;
  if (in.check_kappa && in.kappa_next < 0.5 * in.kappa_prev) return Trigger::kappa_drop;
  if (3 * in.iteration < in.iterations && in.quiet_steps > in.quiet_limit) return Trigger::quiet;
  return Trigger::none;
}

// --------------------------------------------------------------- ants

struct AntOutcome {
  std::vector<Cell> path;
  double cost = std::numeric_limits<double>::infinity();
  bool completed = false;
  bool stuck = false;  // empty candidate set without decoupling
  int backtracks = 0;
  int steps = 0;
};

struct PlanTargets {
  Cell start;
  std::vector<Cell> cells;  // one per device
};

inline double path_length(const TerrainGrid& g, const std::vector<Cell>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(g.center(path[i - 1]), g.center(path[i]));
  return len;
}

/// Planner cost of a path: hover power over the cruise flight time.
inline double path_cost(const TerrainGrid& g, const std::vector<Cell>& path, const PlannerParams& p) {
  return p.hover_power * path_length(g, path) / p.cruise_speed;
}

class AntBuilder {
public:
  AntBuilder(const TerrainGrid& g, const GuidanceField& f, const PlannerParams& p,
             PlannerVariant v, const PlanTargets& t)
      : g_(g), f_(f), p_(p), v_(v), t_(t), on_leg_(g.cell_count(), 0) {}

  AntOutcome run(Rng& rng, int iteration) {
    AntOutcome out;
    const std::size_t n_targets = t_.cells.size();
    std::vector<char> done(n_targets, 0);
    std::size_t remaining = n_targets;
    std::unordered_set<std::size_t> tabu;  // edges, per ant
    std::unordered_set<std::size_t> dropped;  // edges that already fired the κ rule
    std::size_t leg_goal = static_cast<std::size_t>(-1);
    const double reach = p_.approach_radius / g_.cell() + 1e-9;
    const int depth = std::max(1, static_cast<int>(std::lround(p_.backtrack_depth / g_.cell())));
    const long max_steps = 50L * (g_.nx() + g_.ny() + g_.nz()) * std::max<std::size_t>(1, n_targets);
    const int budget = p_.backtrack_budget * static_cast<int>(std::max<std::size_t>(1, n_targets));

    auto& path = out.path;
    path = {t_.start};
    std::size_t leg_start = 0;
    on_leg_[g_.index(t_.start)] = 1;
    int quiet = 0;

    // on_leg_: 1 = on the current leg, 2 = abandoned by a rewind in this leg
    std::vector<std::size_t> abandoned;
    auto clear_leg = [&] {
      for (std::size_t i = leg_start; i < path.size(); ++i) on_leg_[g_.index(path[i])] = 0;
      for (auto i : abandoned) on_leg_[i] = 0;
      abandoned.clear();
    };
    auto cell_dist = [](const Cell& a, const Cell& b) {
      const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
      return std::sqrt(dx * dx + dy * dy + dz * dz);
    };
    auto finish = [&](bool ok) {
      clear_leg();
      out.completed = ok;
      if (ok) out.cost = path_cost(g_, path, p_);
      return out;
    };
    // rewinds `depth` waypoints within the current leg and bans the edge out
    // of the new tip; a leg too short to rewind restarts at its origin
    auto rewind = [&] {
      ++out.backtracks;
      quiet = 0;
      const std::size_t keep = path.size() - 1 >= leg_start + depth ? path.size() - depth : leg_start + 1;
      if (keep < path.size()) tabu.insert(f_.edge(path[keep - 1], path[keep]));
      const bool restart = keep == leg_start + 1;
      while (path.size() > keep) {
        const auto i = g_.index(path.back());
        on_leg_[i] = 2;
        abandoned.push_back(i);
        path.pop_back();
      }
      if (restart) {
        // back at the leg origin: start the leg afresh
        for (auto i : abandoned) on_leg_[i] = 0;
        abandoned.clear();
        tabu.clear();
        on_leg_[g_.index(path.back())] = 1;
      }
    };

    std::vector<Cell> cand;
    std::vector<double> sig, eta;
    while (remaining > 0) {
      const Cell cur = path.back();
      for (std::size_t k = 0; k < n_targets; ++k)
        if (!done[k] && cell_dist(cur, t_.cells[k]) <= reach) {
          done[k] = 1;
          --remaining;
        }
      if (remaining == 0) break;
      if (++out.steps > max_steps || out.backtracks > budget) return finish(false);

      // a leg commits to the nearest open target until that target is reached
      if (leg_goal >= n_targets || done[leg_goal]) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n_targets; ++k)
          if (!done[k] && cell_dist(cur, t_.cells[k]) < best) {
            best = cell_dist(cur, t_.cells[k]);
            leg_goal = k;
          }
        clear_leg();
        leg_start = path.size() - 1;
        on_leg_[g_.index(cur)] = 1;
        quiet = 0;
      }
      const std::size_t goal = leg_goal;
      const double best_d = cell_dist(cur, t_.cells[goal]);

      cand.clear();
      sig.clear();
      eta.clear();
      for (const Cell& n : g_.neighbors(cur)) {
        const auto e = f_.edge(cur, n);
        if (tabu.count(e)) continue;
        if (on_leg_[g_.index(n)] == 1) continue;
        cand.push_back(n);
        sig.push_back(f_.sigma(cur, n));
        eta.push_back(std::pow(p_.eta0, best_d - cell_dist(n, t_.cells[goal])));
      }
      if (cand.empty()) {
        if (!uses_decoupling(v_)) {
          out.stuck = true;
          return finish(false);
        }
        rewind();
        continue;
      }
      const auto prob = transition_probabilities(sig, eta, p_.alpha, p_.beta);
      std::size_t pick = prob.size() - 1;
      double u = rng.uniform(), acc = 0.0;
      for (std::size_t i = 0; i < prob.size(); ++i) {
        acc += prob[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      const Cell next = cand[pick];

      if (uses_decoupling(v_)) {
        DecouplingInput in;
        in.revisits_path = on_leg_[g_.index(next)] == 2;
        // a drop already acted on is no longer sudden: one firing per edge
        in.check_kappa = uses_safety(v_) && path.size() - leg_start >= 2 &&
                         !dropped.count(f_.edge(cur, next));
        if (in.check_kappa) {
          in.kappa_prev = f_.scan_kappa(path[path.size() - 2], cur);
          in.kappa_next = f_.scan_kappa(cur, next);
        }
        in.quiet_steps = quiet + 1;
        in.quiet_limit = p_.quiet_limit;
        in.iteration = iteration;
        in.iterations = p_.iterations;
        const Trigger t = detect_trigger(in);
        if (t == Trigger::kappa_drop) dropped.insert(f_.edge(cur, next));
        if (t == Trigger::cycle) {
          rewind();
          continue;
        }
        path.push_back(next);
        on_leg_[g_.index(next)] = 1;
        if (t != Trigger::none) rewind();
        else ++quiet;
      } else {
        path.push_back(next);
        on_leg_[g_.index(next)] = 1;
      }
    }
    return finish(true);
  }

private:
  const TerrainGrid& g_;
  const GuidanceField& f_;
  const PlannerParams& p_;
  PlannerVariant v_;
  const PlanTargets& t_;
  std::vector<char> on_leg_;
};

// ------------------------------------------------------------ planner

struct IterationStats {
  int iteration = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  double mean_cost = std::numeric_limits<double>::quiet_NaN();
  int completed = 0;
  int stuck = 0;
  int failed = 0;
  int backtracks = 0;
};

struct PlanResult {
  PlannerVariant variant = PlannerVariant::acs_ds;
  std::vector<Cell> cells;     // s*
  std::vector<Vec3> waypoints;
  double length = 0.0;         // m
  double cost = std::numeric_limits<double>::infinity();
  std::vector<IterationStats> history;
  int stuck_ants = 0;
  int failed_ants = 0;
  int completed_ants = 0;
  bool fallback = false;       // no ant completed; unplanned route used
};

/// Start cell: lowest free waypoint above the DC ground projection.
inline PlanTargets make_targets(const ScenarioConfig& c, const TerrainGrid& g,
                                const std::vector<MobileDevice>& mds) {
  PlanTargets t;
  t.start = g.lowest_free_in_column(std::clamp(c.dc_x, 0.0, c.area_side - 1e-6),
                                    std::clamp(c.dc_y, 0.0, c.area_side - 1e-6));
  if (t.start.z < 0) t.start = g.nearest_feasible({c.dc_x, c.dc_y, 0.0});
  for (const auto& md : mds) t.cells.push_back(g.nearest_feasible(md.position));
  return t;
}

/// Flood-fill check that every target shares the start's component.
inline void check_reachable(const TerrainGrid& g, const PlanTargets& t) {
  if (!g.feasible(t.start)) throw PlanningError("start waypoint is in the no-fly set");
  const auto label = g.components();
  const int home = label[g.index(t.start)];
  for (std::size_t k = 0; k < t.cells.size(); ++k) {
    const Cell& c = t.cells[k];
    if (!g.in_grid(c) || label[g.index(c)] != home)
      throw PlanningError("MD " + std::to_string(k) + " is unreachable from the start waypoint");
  }
}

/// Straight king-move walk at one layer between two cells of that layer.
inline void walk_layer(std::vector<Cell>& path, Cell to) {
  Cell c = path.back();
  while (c.x != to.x || c.y != to.y || c.z != to.z) {
    c.x += (to.x > c.x) - (to.x < c.x);
    c.y += (to.y > c.y) - (to.y < c.y);
    c.z += (to.z > c.z) - (to.z < c.z);
    path.push_back(c);
  }
}

/// Unplanned route: climb above the highest terrain, then visit devices in
/// index order at that altitude.
inline std::vector<Cell> unplanned_route(const TerrainGrid& g, const PlanTargets& t) {
  const int layer = std::min(g.nz() - 1, static_cast<int>(std::floor(g.max_height() / g.cell())) + 1);
  std::vector<Cell> path{t.start};
  walk_layer(path, {t.start.x, t.start.y, layer});
  for (const Cell& c : t.cells) walk_layer(path, {c.x, c.y, layer});
  for (const Cell& c : path)
    if (g.blocked(c)) throw PlanningError("unplanned cruise layer intersects terrain");
  return path;
}

/// Nearest-neighbour straight-line tour cost; scales the deposit.
inline double reference_cost(const TerrainGrid& g, const PlanTargets& t, const PlannerParams& p) {
  std::vector<char> done(t.cells.size(), 0);
  Vec3 at = g.center(t.start);
  double len = 0.0;
  for (std::size_t n = 0; n < t.cells.size(); ++n) {
    std::size_t k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.cells.size(); ++i)
      if (!done[i] && distance(at, g.center(t.cells[i])) < best) {
        best = distance(at, g.center(t.cells[i]));
        k = i;
      }
    done[k] = 1;
    len += std::max(0.0, best - p.approach_radius);
    at = g.center(t.cells[k]);
  }
  return std::max(p.hover_power * len / p.cruise_speed, p.hover_power * g.cell() / p.cruise_speed);
}

using PlanObserver = std::function<void(const IterationStats&, const GuidanceField&,
                                        const std::vector<Cell>& best)>;

inline PlanResult plan_on_targets(const TerrainGrid& g, const PlanTargets& t,
                                  const PlannerParams& p, PlannerVariant v, const Rng& rng,
                                  const PlanObserver& observer = {}) {
  check_reachable(g, t);
  GuidanceField field(g, p, uses_safety(v));
  PlanResult r;
  r.variant = v;
  const double c_dep = p.deposit_scale * p.tau0 * reference_cost(g, t, p);
  const Rng base = rng.child(stream::planner).child(static_cast<std::uint64_t>(v));
  AntBuilder builder(g, field, p, v, t);

  for (int h = 0; h < p.iterations; ++h) {
    IterationStats st;
    st.iteration = h;
    double sum = 0.0;
    for (int a = 0; a < p.ants; ++a) {
      Rng ar = base.child(static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(a));
      AntOutcome o = builder.run(ar, h);
      st.backtracks += o.backtracks;
      if (!o.completed) {
        ++st.failed;
        st.stuck += o.stuck;
        continue;
      }
      ++st.completed;
      sum += o.cost;
      if (o.cost < r.cost * (1.0 - 1e-12)) {  // ties keep the incumbent
        r.cost = o.cost;
        r.cells = std::move(o.path);
      }
    }
    if (st.completed) st.mean_cost = sum / st.completed;
    st.best_cost = r.cost;
    r.stuck_ants += st.stuck;
    r.failed_ants += st.failed;
    r.completed_ants += st.completed;
    field.update(r.cells, r.cells.empty() ? 0.0 : c_dep / r.cost);
    r.history.push_back(st);
    if (observer) observer(st, field, r.cells);
  }
  if (r.cells.empty()) {
    r.fallback = true;
    try {
      r.cells = unplanned_route(g, t);
    } catch (const PlanningError& e) {
      throw PlanningError(std::string(to_string(v)) + ": no ant completed a tour and " + e.what());
    }
    r.cost = path_cost(g, r.cells, p);
  }
  for (const Cell& c : r.cells) r.waypoints.push_back(g.center(c));
  r.length = path_length(g, r.cells);
  return r;
}

inline PlanResult plan_trajectory(const ScenarioConfig& c, const TerrainGrid& g,
                                  const std::vector<MobileDevice>& mds, const Rng& rng,
                                  PlannerVariant v = PlannerVariant::acs_ds) {
  return plan_on_targets(g, make_targets(c, g, mds), PlannerParams::from(c), v, rng);
}

// -------------------------------------------------------------- export

inline void write_path_csv(std::ostream& os, const std::vector<Vec3>& waypoints) {
  os << "slot,x,y,z\n";
  for (std::size_t i = 0; i < waypoints.size(); ++i)
    os << i << ',' << waypoints[i].x << ',' << waypoints[i].y << ',' << waypoints[i].z << '\n';
}

inline void write_history_csv(std::ostream& os, const std::vector<IterationStats>& h) {
  os << "iteration,best_cost,mean_cost\n";
  for (const auto& s : h) os << s.iteration << ',' << s.best_cost << ',' << s.mean_cost << '\n';
}

}  // namespace uavfog
