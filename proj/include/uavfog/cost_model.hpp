#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavfog/comms.hpp"
#include "uavfog/config.hpp"
#include "uavfog/core_model.hpp"
#include "uavfog/dynamics.hpp"
#include "uavfog/error.hpp"

namespace uavfog {

enum class Place { md = 0, uav = 1, dc = 2 };

inline const char* to_string(Place p) {
  switch (p) {
    case Place::md: return "MD";
    case Place::uav: return "UAV";
    case Place::dc: return "DC";
  }
  return "?";
}

/// Binary placement triple (x^MD, x^UAV, x^DC).
struct Assignment {
  int md = 1, uav = 0, dc = 0;

  static Assignment of(Place p) {
    return {p == Place::md ? 1 : 0, p == Place::uav ? 1 : 0, p == Place::dc ? 1 : 0};
  }
  bool binary() const {
    auto b = [](int v) { return v == 0 || v == 1; };
    return b(md) && b(uav) && b(dc);
  }
  bool exclusive() const { return md + uav + dc == 1; }
  Place place() const {
    if (!binary() || !exclusive()) throw DomainError("assignment is not one-hot");
    return md ? Place::md : (uav ? Place::uav : Place::dc);
  }
};

/// Per-slot resource decisions: UAV frequency/power and one (p_j, f_j) per device.
struct Resources {
  double f_uav = 0.0, p_uav = 0.0;
  std::vector<double> p_md, f_md;
};

/// Rates (bit/s) on the four link segments used by one device.
struct LinkRates {
  double md_uav = 0.0, uav_md = 0.0, uav_dc = 0.0, dc_uav = 0.0;
};

// ----------------------------------------------------- per-task terms

inline double segment_time(double s, int channels, double rate) {
  if (!(rate > 0.0) || channels < 1)
    throw InfeasibleError("offloading over a link with zero rate or no channel");
  return s / (channels * rate);
}

inline double transmission_energy(Place x, double s, int channels, double p_md, double p_uav,
                                  double p_dc, const LinkRates& r) {
  if (x == Place::md) return 0.0;
  double e = p_md * segment_time(s, channels, r.md_uav) + p_uav * segment_time(s, channels, r.uav_md);
  if (x == Place::dc)
    e += p_uav * segment_time(s, channels, r.uav_dc) + p_dc * segment_time(s, channels, r.dc_uav);
  return e;
}

inline double computation_energy(Place x, double s, double cycles, double f_uav, double f_md,
                                 double delta_uav, double delta_md) {
  switch (x) {
    case Place::uav: return delta_uav * s * cycles * f_uav * f_uav;
    case Place::md: return delta_md * s * cycles * f_md * f_md;
    case Place::dc: return 0.0;
  }
  return 0.0;
}

inline double transmission_delay(Place x, double s, int channels, const LinkRates& r) {
  if (x == Place::md) return 0.0;
  double d = segment_time(s, channels, r.md_uav) + segment_time(s, channels, r.uav_md);
  if (x == Place::dc) d += segment_time(s, channels, r.uav_dc) + segment_time(s, channels, r.dc_uav);
  return d;
}

inline double computation_delay(Place x, double s, double cycles, double f_uav, double f_md) {
  switch (x) {
    case Place::uav: return s * cycles / f_uav;
    case Place::md: return s * cycles / f_md;
    case Place::dc: return 0.0;
  }
  return 0.0;
}

class UnstableQueueError : public InfeasibleError {
public:
  using InfeasibleError::InfeasibleError;
};

/// λ(1−p)s² / (L C r (L C r − λ(1−p)s)); `p_local` is the local fraction.
inline double transmission_queue_delay(double lambda, double p_local, double s_total,
                                       double slot_len, int channels, double rate) {
  const double load = lambda * (1.0 - p_local) * s_total;
  const double cap = slot_len * channels * rate;
  if (!(cap > load)) throw UnstableQueueError("transmission queue unstable: load >= L*C*r");
  return load * s_total / (cap * (cap - load));
}

struct UavQueueInput {
  double offload_rate = 0.0;  // λ_j (1 − p_j)
  double size = 0.0;          // s_j(t)
  double cycles = 0.0;        // c_j
};

struct UavQueueResult {
  double delay = 0.0;
  bool floored = false;
};

/// Q̄/Λ − Σ λ(1−p) s c / (τ f Λ) with Λ = Σ λ(1−p); floored at 0. Zero when no
/// device offloads.
inline UavQueueResult uav_queue_delay(double qbar, double tau, double f_uav,
                                      const std::vector<UavQueueInput>& in) {
  double lam = 0.0, work = 0.0;
  for (const auto& q : in) {
    lam += q.offload_rate;
    work += q.offload_rate * q.size * q.cycles;
  }
  if (!(lam > 0.0)) return {};
  const double d = qbar / lam - work / (tau * f_uav * lam);
  return d < 0.0 ? UavQueueResult{0.0, true} : UavQueueResult{d, false};
}

/// S = D + ε·E.
inline double objective(double delay, double energy, double epsilon) {
  return delay + epsilon * energy;
}

// --------------------------------------------------------- slot level

/// Everything fixed within one slot before assignment: UAV position, this
/// slot's tasks, channel counts, and movement energy.
struct SlotScenario {
  int slot = 0;
  Vec3 uav;
  double speed = 0.0;
  double e_mov = 0.0;
  std::vector<TaskInstance> tasks;
  std::vector<int> channels;  // per device
};

struct SlotCost {
  double e_mov = 0.0, e_tr = 0.0, e_comp = 0.0, energy = 0.0;
  double d_tr = 0.0, d_comp = 0.0, d_q = 0.0, d_uavq = 0.0, delay = 0.0;
  double score = 0.0;  // S(t)
  double e_uav = 0.0;  // UAV-side energy for the battery budget
  int infeasible = 0;  // zero-rate links or unstable queues hit
  bool uavq_floored = false;
};

inline LinkRates device_links(const ScenarioConfig& c, const MobileDevice& md, const Vec3& uav,
                              double p_md, double p_uav) {
  const Vec3 dc{c.dc_x, c.dc_y, c.dc_z};
  const double d_md = distance(md.position, uav);
  const double d_dc = distance(uav, dc);
  const LinkEndpoints ground{d_md, elevation_angle(md.position, uav), c.obstruction, false};
  const LinkEndpoints backhaul{d_dc, 0.0, c.obstruction, true};
  LinkRates r;
  r.md_uav = link_rate(ground, {p_md, c.bandwidth_md_uav, c.noise_power, c.interference},
                       c.carrier_freq).rate;
  r.uav_md = link_rate(ground, {p_uav, c.bandwidth_md_uav, c.noise_power, c.interference},
                       c.carrier_freq).rate;
  r.uav_dc = link_rate(backhaul, {p_uav, c.bandwidth_uav_dc, c.noise_power, c.interference},
                       c.carrier_freq).rate;
  r.dc_uav = link_rate(backhaul, {c.p_dc, c.bandwidth_uav_dc, c.noise_power, c.interference},
                       c.carrier_freq).rate;
  return r;
}

/// Full cost breakdown of one slot; infeasible terms are counted, not thrown.
inline SlotCost evaluate_slot(const ScenarioConfig& c, const std::vector<MobileDevice>& mds,
                              const SlotScenario& sc, const std::vector<Place>& x,
                              const Resources& res, double epsilon) {
  if (x.size() != sc.tasks.size()) throw DomainError("assignment/task count mismatch");
  const std::size_t k = mds.size();
  SlotCost out;
  out.e_mov = sc.e_mov;

  std::vector<LinkRates> rates(k);
  std::vector<double> s_total(k, 0.0), s_local(k, 0.0), cyc(k, 0.0);
  std::vector<int> n_tasks(k, 0);
  for (std::size_t i = 0; i < sc.tasks.size(); ++i) {
    const auto& t = sc.tasks[i];
    s_total[t.md] += t.size;
    cyc[t.md] = t.cycles_per_bit;
    ++n_tasks[t.md];
    if (x[i] == Place::md) s_local[t.md] += t.size;
  }
  for (std::size_t j = 0; j < k; ++j)
    if (n_tasks[j]) rates[j] = device_links(c, mds[j], sc.uav, res.p_md[j], res.p_uav);

  // local fraction p_j by data volume
  std::vector<double> p_local(k, 1.0);
  for (std::size_t j = 0; j < k; ++j)
    if (s_total[j] > 0.0) p_local[j] = s_local[j] / s_total[j];

  std::vector<double> dq(k, 0.0);
  std::vector<bool> dq_bad(k, false);
  std::vector<UavQueueInput> qin;
  for (std::size_t j = 0; j < k; ++j) {
    if (!n_tasks[j] || p_local[j] >= 1.0) continue;
    const double lam = mds[j].arrival_rate;
    qin.push_back({lam * (1.0 - p_local[j]), s_total[j], cyc[j]});
    try {
      dq[j] = transmission_queue_delay(lam, p_local[j], s_total[j], c.slot_len, sc.channels[j],
                                       rates[j].md_uav);
    } catch (const InfeasibleError&) {
      dq_bad[j] = true;
      ++out.infeasible;
    }
  }
  const auto uq = uav_queue_delay(c.queue_qbar, c.queue_tau, res.f_uav, qin);
  out.uavq_floored = uq.floored;

  for (std::size_t i = 0; i < sc.tasks.size(); ++i) {
    const auto& t = sc.tasks[i];
    const int j = t.md;
    const Place p = x[i];
    try {
      const double etr = transmission_energy(p, t.size, sc.channels[j], res.p_md[j], res.p_uav,
                                             c.p_dc, rates[j]);
      out.e_tr += etr;
      out.d_tr += transmission_delay(p, t.size, sc.channels[j], rates[j]);
      if (p == Place::uav)
        out.e_uav += res.p_uav * segment_time(t.size, sc.channels[j], rates[j].uav_md);
      if (p == Place::dc)
        out.e_uav += res.p_uav * segment_time(t.size, sc.channels[j], rates[j].uav_dc);
    } catch (const InfeasibleError&) {
      ++out.infeasible;
    }
    const double ecomp = computation_energy(p, t.size, t.cycles_per_bit, res.f_uav, res.f_md[j],
                                            c.delta_uav, c.delta_md);
    out.e_comp += ecomp;
    if (p == Place::uav) out.e_uav += ecomp;
    out.d_comp += computation_delay(p, t.size, t.cycles_per_bit, res.f_uav, res.f_md[j]);
    if (p != Place::md && !dq_bad[j]) out.d_q += dq[j];
    if (p == Place::uav) out.d_uavq += uq.delay;
  }
  out.e_uav += out.e_mov;
  out.energy = out.e_tr + out.e_comp + out.e_mov;
  out.delay = out.d_tr + out.d_comp + out.d_q + out.d_uavq;
  out.score = objective(out.delay, out.energy, epsilon);
  return out;
}

// -------------------------------------------------------- constraints

/// One slot of an executed plan, as consumed by the feasibility checker.
struct SlotRecord {
  int slot = 0;
  double speed = 0.0;
  double altitude = 0.0;
  std::vector<int> channels;
  Resources resources;
  std::vector<Assignment> assignment;
  SlotCost cost;
};

struct ConstraintStatus {
  bool passed = true;
  int first_slot = -1;
};

struct FeasibilityReport {
  std::array<ConstraintStatus, 10> c;  // C1..C10 at index 0..9
  double uav_energy_wh = 0.0;
  bool all_passed() const {
    for (const auto& s : c)
      if (!s.passed) return false;
    return true;
  }
  int violations() const {
    int n = 0;
    for (const auto& s : c) n += !s.passed;
    return n;
  }
};

inline FeasibilityReport check_constraints(const std::vector<SlotRecord>& slots,
                                           const ScenarioConfig& cfg) {
  FeasibilityReport r;
  auto fail = [&](int idx, int slot) {
    if (r.c[idx].passed) r.c[idx] = {false, slot};
  };
  auto within = [](double v, double lo, double hi) {
    const double tol = 1e-9 * std::max(std::abs(lo), std::abs(hi));
    return v >= lo - tol && v <= hi + tol;
  };
  double e_uav = 0.0;
  for (const auto& s : slots) {
    if (s.speed < 0.0 || s.speed > cfg.v_max * (1 + 1e-9)) fail(0, s.slot);
    if (s.altitude < -1e-9 || s.altitude > cfg.z_max * (1 + 1e-9)) fail(1, s.slot);
    int used = 0;
    for (int ch : s.channels) used += ch;
    if (used > cfg.num_channels) fail(2, s.slot);
    const bool has_tasks = !s.assignment.empty();
    if (has_tasks) {
      if (!within(s.resources.f_uav, cfg.f_uav_min, cfg.f_uav_max)) fail(3, s.slot);
      for (double f : s.resources.f_md)
        if (!within(f, cfg.f_md_min, cfg.f_md_max)) fail(4, s.slot);
      if (!within(s.resources.p_uav, cfg.p_uav_min, cfg.p_uav_max)) fail(5, s.slot);
      for (double p : s.resources.p_md)
        if (!within(p, cfg.p_md_min, cfg.p_md_max)) fail(6, s.slot);
    }
    for (const auto& a : s.assignment) {
      if (!a.exclusive()) fail(7, s.slot);
      if (!a.binary()) fail(8, s.slot);
    }
    e_uav += s.cost.e_uav;
    if (e_uav / kJoulesPerWh > cfg.battery_capacity_wh) fail(9, s.slot);
  }
  r.uav_energy_wh = e_uav / kJoulesPerWh;
  return r;
}

// -------------------------------------------------------------- report

inline nlohmann::json to_json(const SlotCost& s) {
  return {{"E_MOV", s.e_mov}, {"e_TR", s.e_tr},     {"e_COMP", s.e_comp}, {"E", s.energy},
          {"d_TR", s.d_tr},   {"d_COMP", s.d_comp}, {"d_Q", s.d_q},       {"d_UAVQ", s.d_uavq},
          {"D", s.delay},     {"S", s.score},       {"E_UAV", s.e_uav},   {"infeasible", s.infeasible},
          {"uavq_floored", s.uavq_floored}};
}

inline nlohmann::json to_json(const FeasibilityReport& r) {
  nlohmann::json j = nlohmann::json::object();
  for (int i = 0; i < 10; ++i)
    j["C" + std::to_string(i + 1)] = {{"passed", r.c[i].passed}, {"first_slot", r.c[i].first_slot}};
  j["uav_energy_wh"] = r.uav_energy_wh;
  return j;
}

inline nlohmann::json cost_report(const std::vector<SlotRecord>& slots, const ScenarioConfig& cfg) {
  nlohmann::json per = nlohmann::json::array();
  double e = 0, d = 0, s = 0;
  for (const auto& r : slots) {
    if (r.assignment.empty() && r.cost.e_mov == 0.0) continue;
    auto j = to_json(r.cost);
    j["slot"] = r.slot;
    per.push_back(std::move(j));
    e += r.cost.energy;
    d += r.cost.delay;
    s += r.cost.score;
  }
  return {{"config_hash", config_hash(cfg)},
          {"per_slot", std::move(per)},
          {"totals", {{"E", e}, {"D", d}, {"S", s}}},
          {"constraints", to_json(check_constraints(slots, cfg))}};
}

}  // namespace uavfog
