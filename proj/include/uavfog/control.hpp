#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "uavfog/config.hpp"
#include "uavfog/dynamics.hpp"
#include "uavfog/error.hpp"

namespace uavfog {

// ---------------------------------------------------------------- PID

struct PidGains {
  double kp = 0.0, ki = 0.0, kd = 0.0;
  friend bool operator==(const PidGains&, const PidGains&) = default;
};

/// Discrete PID: u = kp·e + ki·Σe·dt + kd·(e − e_prev)/dt.
class Pid {
public:
  Pid() = default;
  explicit Pid(PidGains g) : gains_(g) {}

  double step(double e, double dt) { return step(e, dt, gains_); }

  /// Step with gains supplied for this tick only (fuzzy scheduling).
  double step(double e, double dt, const PidGains& g) {
    if (!(dt > 0.0)) throw DomainError("PID step needs dt > 0");
    integral_ += e * dt;
    const double deriv = (e - prev_) / dt;
    prev_ = e;
    return g.kp * e + g.ki * integral_ + g.kd * deriv;
  }

  void reset() { integral_ = prev_ = 0.0; }
  const PidGains& gains() const { return gains_; }
  double integral() const { return integral_; }
  double previous_error() const { return prev_; }

private:
  PidGains gains_;
  double integral_ = 0.0;
  double prev_ = 0.0;
};

// -------------------------------------------------------------- fuzzy

enum class Label { NB = -3, NM = -2, NS = -1, ZO = 0, PS = 1, PM = 2, PB = 3 };

inline constexpr std::array<Label, 7> kLabels{Label::NB, Label::NM, Label::NS, Label::ZO,
                                              Label::PS, Label::PM, Label::PB};

inline int value(Label l) { return static_cast<int>(l); }

inline Label parse_label(std::string_view s) {
  static constexpr std::array<std::string_view, 7> names{"NB", "NM", "NS", "ZO", "PS", "PM", "PB"};
  for (int i = 0; i < 7; ++i)
    if (names[i] == s) return kLabels[i];
  throw DomainError("unknown fuzzy label: " + std::string(s));
}

inline const char* to_string(Label l) {
  static constexpr std::array<const char*, 7> names{"NB", "NM", "NS", "ZO", "PS", "PM", "PB"};
  return names[value(l) + 3];
}

struct GainDelta {
  double kp = 0.0, ki = 0.0, kd = 0.0;
};

/// 7×7 rule base indexed [E][EC] in NB..PB order; each cell holds
/// (Δk_p, Δk_i, Δk_d) as integer singletons.
class FuzzyRuleTable {
public:
  using Cell = std::array<int, 3>;

  static const FuzzyRuleTable& standard() {
    static const FuzzyRuleTable table = [] {
      // rows E = NB..PB, columns EC = NB..PB
      static constexpr std::array<std::string_view, 7> rows{
          "PB/NB/PS PB/NB/NS PM/NM/NB PM/NM/NB PS/NS/NB ZO/ZO/NM ZO/ZO/PS",
          "PB/NB/PS PB/NB/NS PM/NM/NB PS/NS/NM PS/NS/NM ZO/ZO/NS NS/PS/ZO",
          "PM/NB/ZO PM/NM/NS PM/NS/NM PS/NS/NM ZO/ZO/NS NS/PM/NS NS/PM/ZO",
          "PM/NM/ZO PM/NM/NS PS/NS/NS ZO/ZO/NS NS/PS/NS NM/PM/NS NM/PM/ZO",
          "PS/NM/ZO PS/NS/ZO ZO/ZO/ZO NS/PS/ZO NS/PS/ZO NM/PM/ZO NM/PB/ZO",
          "PS/ZO/PB ZO/ZO/PM NS/PS/PM NM/PS/PM NM/PM/PS NM/PB/PS NB/PB/PB",
          "ZO/ZO/PB ZO/ZO/PM NM/PS/PM NM/PM/PM NM/PM/PS NB/PB/PS NB/PB/PB"};
      FuzzyRuleTable t;
      for (int e = 0; e < 7; ++e)
        for (int ec = 0; ec < 7; ++ec) {
          const auto triple = rows[e].substr(ec * 9, 8);
          for (int k = 0; k < 3; ++k)
            t.cells_[e][ec][k] = value(parse_label(triple.substr(k * 3, 2)));
        }
      return t;
    }();
    return table;
  }

  const Cell& at(Label e, Label ec) const { return cells_[value(e) + 3][value(ec) + 3]; }
  const Cell& at(int e_idx, int ec_idx) const { return cells_[e_idx][ec_idx]; }

private:
  std::array<std::array<Cell, 7>, 7> cells_{};
};

/// Triangular memberships centred at −6, −4, …, 6 (unit overlap); the input
/// saturates to [−6, 6].
inline std::array<double, 7> fuzzify(double v) {
  std::array<double, 7> mu{};
  if (!std::isfinite(v)) throw DomainError("fuzzify needs a finite input");
  v = std::clamp(v, -6.0, 6.0);
  for (int i = 0; i < 7; ++i) {
    const double c = -6.0 + 2.0 * i;
    mu[i] = std::max(0.0, 1.0 - std::abs(v - c) / 2.0);
  }
  return mu;
}

/// Mamdani min-activation over the 49 rules, centroid over output singletons.
inline GainDelta fuzzy_adjust(double e, double ec,
                              const FuzzyRuleTable& table = FuzzyRuleTable::standard()) {
  const auto me = fuzzify(e), mc = fuzzify(ec);
  double w_sum = 0.0;
  GainDelta d;
  for (int i = 0; i < 7; ++i) {
    if (me[i] == 0.0) continue;
    for (int j = 0; j < 7; ++j) {
      const double w = std::min(me[i], mc[j]);
      if (w == 0.0) continue;
      const auto& c = table.at(i, j);
      d.kp += w * c[0];
      d.ki += w * c[1];
      d.kd += w * c[2];
      w_sum += w;
    }
  }
  // clamp absorbs rounding of the convex combination
  d.kp = std::clamp(d.kp / w_sum, -3.0, 3.0);
  d.ki = std::clamp(d.ki / w_sum, -3.0, 3.0);
  d.kd = std::clamp(d.kd / w_sum, -3.0, 3.0);
  return d;
}

inline PidGains fuzzy_pid_gains(const PidGains& base, const GainDelta& d) {
  return {base.kp + d.kp, base.ki + d.ki, base.kd + d.kd};
}

enum class ControllerKind { classical, fuzzy };

inline const char* to_string(ControllerKind k) {
  return k == ControllerKind::fuzzy ? "fuzzy" : "classical";
}

/// Maps physical error/error-rate onto the [−6, 6] universe and scales the
/// [−3, 3] adjustments back to gain units as fractions of the base gains.
struct FuzzyScaling {
  double error_range = 1.0;  // |e| mapped to 6
  double rate_range = 1.0;   // |ė| mapped to 6
  double kp_scale = 0.1, ki_scale = 0.1, kd_scale = 0.1;
};

struct ControllerTick {
  double e = 0.0, ec = 0.0;
  PidGains gains;
  double u = 0.0;
};

/// One control loop; the fuzzy kind recomputes its gains from base every tick.
class Loop {
public:
  Loop() = default;
  Loop(ControllerKind kind, PidGains base, FuzzyScaling scaling)
      : kind_(kind), base_(base), scaling_(scaling), pid_(base) {}

  double step(double e, double dt) {
    const double ec = (e - pid_.previous_error()) / dt;
    PidGains g = base_;
    if (kind_ == ControllerKind::fuzzy) {
      const auto d = fuzzy_adjust(6.0 * e / scaling_.error_range, 6.0 * ec / scaling_.rate_range);
      g = fuzzy_pid_gains(base_, {d.kp * scaling_.kp_scale * base_.kp,
                                  d.ki * scaling_.ki_scale * base_.ki,
                                  d.kd * scaling_.kd_scale * base_.kd});
    }
    const double u = pid_.step(e, dt, g);
    last_ = {e, ec, g, u};
    return u;
  }

  void reset() { pid_.reset(); }
  const ControllerTick& last() const { return last_; }

private:
  ControllerKind kind_ = ControllerKind::classical;
  PidGains base_;
  FuzzyScaling scaling_;
  Pid pid_;
  ControllerTick last_;
};

// ------------------------------------------------------ flight logging

/// Accumulates flown intervals into fixed-length slots: per-slot movement
/// energy (exact integral of Σ I_i over the slot), and a sample of rotor
/// speeds, position and speed at each slot start.
class FlightLog {
public:
  FlightLog() = default;
  FlightLog(double slot_len, MotorParams motor) : slot_len_(slot_len), motor_(motor) {}

  void add(double duration, const RotorSpeeds& w, const Vec3& pos, const Vec3& vel,
           const Vec3& attitude = {}) {
    if (duration <= 0.0) return;
    double rate = 0.0;
    for (double v : w) rate += motor_current(v, motor_);
    double left = duration;
    while (left > 1e-15) {
      if (!open_) {
        energy_.push_back(0.0);
        omega_.push_back(w);
        position_.push_back(pos);
        attitude_.push_back(attitude);
        speed_.push_back(vel.norm());
        open_ = true;
      }
      const double room = slot_len_ - fill_;
      const double take = std::min(room, left);
      energy_.back() += rate * take;
      fill_ += take;
      left -= take;
      speed_.back() = std::max(speed_.back(), vel.norm());
      if (fill_ >= slot_len_ * (1 - 1e-12)) close_slot();
    }
    total_time_ += duration;
    total_energy_ += rate * duration;
  }

  const std::vector<double>& slot_energy() const { return energy_; }
  const std::vector<RotorSpeeds>& slot_omega() const { return omega_; }
  const std::vector<Vec3>& slot_position() const { return position_; }
  const std::vector<Vec3>& slot_attitude() const { return attitude_; }
  /// Peak speed seen inside each slot.
  const std::vector<double>& slot_speed() const { return speed_; }
  std::size_t slots() const { return energy_.size(); }
  double total_time() const { return total_time_; }
  double total_energy() const { return total_energy_; }
  double slot_len() const { return slot_len_; }

private:
  void close_slot() {
    fill_ = 0.0;
    open_ = false;
  }

  double slot_len_ = 0.1;
  MotorParams motor_;
  double fill_ = 0.0;
  bool open_ = false;
  std::vector<double> energy_;
  std::vector<RotorSpeeds> omega_;
  std::vector<Vec3> position_;
  std::vector<Vec3> attitude_;
  std::vector<double> speed_;
  double total_time_ = 0.0;
  double total_energy_ = 0.0;
};

// -------------------------------------------------- closed-loop flight

struct FlightParams {
  AirframeParams airframe;
  MotorParams motor;
  double max_accel = 5.28;
  double cruise_speed = 10.0;
  double tolerance = 5.0;
  double guidance_gain = 0.4;
  double dt = 0.01;
  double slot_len = 0.1;
  double max_tilt = 0.5;  // rad
  PidGains vel{1.0, 0.05, 0.05}, att{64.0, 2.0, 16.0}, yaw{16.0, 0.5, 8.0};
  FuzzyScaling vel_fuzzy{5.0, 25.0}, att_fuzzy{0.2, 1.0}, yaw_fuzzy{0.5, 2.5};

  static FlightParams from(const ScenarioConfig& c) {
    FlightParams p;
    p.airframe = AirframeParams::from(c);
    p.motor = MotorParams::from(c);
    p.max_accel = c.max_accel;
    p.cruise_speed = c.cruise_speed;
    p.tolerance = c.track_tolerance;
    p.guidance_gain = c.guidance_gain;
    p.dt = c.slot_len / std::ceil(c.slot_len / 0.01 - 1e-9);  // ≤ 10 ms, whole ticks per slot
    p.slot_len = c.slot_len;
    p.vel = {c.vel_kp, c.vel_ki, c.vel_kd};
    p.att = {c.att_kp, c.att_ki, c.att_kd};
    p.yaw = {c.yaw_kp, c.yaw_ki, c.yaw_kd};
    auto scaling = [&](double range) {
      return FuzzyScaling{range, range * c.fuzzy_rate_factor, c.fuzzy_kp_scale, c.fuzzy_ki_scale,
                          c.fuzzy_kd_scale};
    };
    p.vel_fuzzy = scaling(c.fuzzy_vel_range);
    p.att_fuzzy = scaling(c.fuzzy_att_range);
    p.yaw_fuzzy = scaling(c.fuzzy_yaw_range);
    return p;
  }
};

class ControlError : public Error {
public:
  ControlError(const std::string& what, UavState state, std::size_t ticks)
      : Error("control", what), state_(state), ticks_(ticks) {}
  const UavState& state() const noexcept { return state_; }
  std::size_t ticks() const noexcept { return ticks_; }

private:
  UavState state_;
  std::size_t ticks_;
};

/// Row of the controller comparison report (yaw loop).
struct ControllerRecord {
  std::size_t tick = 0;
  ControllerTick yaw;
  RotorSpeeds omega{};
};

/// Cascaded tracker: position guidance → velocity loops → attitude loops →
/// rotor allocation → rigid-body step.
class FlightSim {
public:
  FlightSim(const FlightParams& p, ControllerKind kind, const UavState& start)
      : p_(p), kind_(kind), state_(start), log_(p.slot_len, p.motor) {
    for (auto& l : vel_) l = Loop(kind, p.vel, p.vel_fuzzy);
    roll_ = Loop(kind, p.att, p.att_fuzzy);
    pitch_ = Loop(kind, p.att, p.att_fuzzy);
    yaw_ = Loop(kind, p.yaw, p.yaw_fuzzy);
    const double w0 = equal_rotor_speed(p.airframe.mass * p.airframe.gravity,
                                        p.airframe.thrust_coeff);
    if (state_.omega == RotorSpeeds{}) state_.omega = {w0, w0, w0, w0};
  }

  const UavState& state() const { return state_; }
  const FlightLog& log() const { return log_; }
  std::size_t ticks() const { return ticks_; }
  double yaw_setpoint() const { return yaw_ref_; }
  void set_yaw_setpoint(double psi) { yaw_ref_ = psi; }
  void record_controller(std::vector<ControllerRecord>* sink) { records_ = sink; }

  void reset_loops() {
    for (auto& l : vel_) l.reset();
    roll_.reset();
    pitch_.reset();
    yaw_.reset();
  }

  /// One control tick toward a velocity command.
  void tick(const Vec3& v_cmd) {
    const auto& a = p_.airframe;
    const double dt = p_.dt;
    Vec3 acc{vel_[0].step(v_cmd.x - state_.velocity.x, dt),
             vel_[1].step(v_cmd.y - state_.velocity.y, dt),
             vel_[2].step(v_cmd.z - state_.velocity.z, dt)};
    const double h = std::hypot(acc.x, acc.y);
    if (h > p_.max_accel) acc.x *= p_.max_accel / h, acc.y *= p_.max_accel / h;
    acc.z = std::clamp(acc.z, -p_.max_accel, p_.max_accel);

    const Vec3 thrust_dir = acc + Vec3{0, 0, a.gravity};
    const double psi = state_.attitude.z;
    const double tn = thrust_dir.norm();
    const Vec3 b3 = thrust_dir * (1.0 / tn);
    double phi_d = std::asin(std::clamp(b3.x * std::sin(psi) - b3.y * std::cos(psi), -1.0, 1.0));
    double theta_d = std::atan2(b3.x * std::cos(psi) + b3.y * std::sin(psi), b3.z);
    phi_d = std::clamp(phi_d, -p_.max_tilt, p_.max_tilt);
    theta_d = std::clamp(theta_d, -p_.max_tilt, p_.max_tilt);
    const double cf = std::cos(state_.attitude.x), ct = std::cos(state_.attitude.y);
    const double u1 = a.mass * (acc.z + a.gravity) / std::max(cf * ct, 0.5);

    const Vec3& w = state_.rates;
    const double al_phi = roll_.step(phi_d - state_.attitude.x, dt);
    const double al_theta = pitch_.step(theta_d - state_.attitude.y, dt);
    const double al_psi = yaw_.step(wrap_angle(yaw_ref_ - psi), dt);
    const ControlInput want{u1, (a.ix * al_phi + w.y * w.z * (a.iz - a.iy)) / a.arm,
                            (a.iy * al_theta + w.x * w.z * (a.ix - a.iz)) / a.arm,
                            a.iz * al_psi + w.x * w.y * (a.iy - a.ix)};
    const auto omega = allocate_rotors(want, a.thrust_coeff, a.torque_coeff, a.omega_max);
    const auto u = control_inputs(omega, a.thrust_coeff, a.torque_coeff);
    log_.add(dt, omega, state_.position, state_.velocity, state_.attitude);
    state_ = step_dynamics(state_, u, dt, a);
    state_.omega = omega;
    ++ticks_;
    if (records_) records_->push_back({ticks_, yaw_.last(), omega});
  }

  /// Flies to `target`; returns the number of ticks used. `pass_through`
  /// keeps speed at the corner instead of settling. Throws ControlError on
  /// timeout.
  std::size_t track(const Vec3& target, double timeout_s) {
    reset_loops();
    std::size_t used = 0;
    const std::size_t limit = static_cast<std::size_t>(std::ceil(timeout_s / p_.dt));
    while ((target - state_.position).norm() >= p_.tolerance) {
      if (used >= limit)
        throw ControlError("segment did not converge before timeout", state_, ticks_);
      const Vec3 e = target - state_.position;
      Vec3 v = e * p_.guidance_gain;
      const double n = v.norm();
      if (n > p_.cruise_speed) v *= p_.cruise_speed / n;
      tick(v);
      ++used;
    }
    return used;
  }

  /// Holds a fixed point for `seconds`.
  void hold(const Vec3& target, double seconds) {
    const auto n = static_cast<std::size_t>(std::lround(seconds / p_.dt));
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 v = (target - state_.position) * p_.guidance_gain;
      const double s = v.norm();
      if (s > p_.cruise_speed) v *= p_.cruise_speed / s;
      tick(v);
    }
  }

  static double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a < 0) a += two_pi;
    return a - std::numbers::pi;
  }

private:
  FlightParams p_;
  ControllerKind kind_;
  UavState state_;
  FlightLog log_;
  std::array<Loop, 3> vel_;
  Loop roll_, pitch_, yaw_;
  double yaw_ref_ = 0.0;
  std::size_t ticks_ = 0;
  std::vector<ControllerRecord>* records_ = nullptr;
};

struct SegmentResult {
  UavState end;
  std::size_t ticks = 0;
  double energy = 0.0;
  double time = 0.0;
};

/// Single-segment closed-loop flight from `start` to `target`.
inline SegmentResult track_segment(const UavState& start, const Vec3& target, ControllerKind kind,
                                   const FlightParams& p) {
  FlightSim sim(p, kind, start);
  const double dist = (target - start.position).norm();
  sim.track(target, 30.0 + 10.0 * dist / p.cruise_speed);
  return {sim.state(), sim.ticks(), sim.log().total_energy(), sim.log().total_time()};
}

/// Yaw step from hover; returns the 2% settling time.
inline double yaw_step_settling(const FlightParams& p, ControllerKind kind, double step,
                                double horizon = 8.0) {
  UavState s;
  s.position = {0, 0, 200};
  FlightSim sim(p, kind, s);
  sim.set_yaw_setpoint(step);
  const auto n = static_cast<std::size_t>(std::lround(horizon / p.dt));
  double settled_at = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 v = (s.position - sim.state().position) * p.guidance_gain;
    sim.tick(v);
    if (std::abs(sim.state().attitude.z - step) > 0.02 * std::abs(step))
      settled_at = (i + 1) * p.dt;
  }
  return settled_at;
}

/// Collapses straight runs of a waypoint path to their corner points.
inline std::vector<Vec3> corner_points(const std::vector<Vec3>& path) {
  std::vector<Vec3> out;
  if (path.empty()) return out;
  out.push_back(path.front());
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const Vec3 a = path[i] - path[i - 1], b = path[i + 1] - path[i];
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) continue;
    if (std::abs(a.dot(b) / (na * nb) - 1.0) > 1e-9) out.push_back(path[i]);
  }
  if (path.size() > 1) out.push_back(path.back());
  return out;
}

/// Closed-loop flight along a waypoint path through its corner points.
inline FlightLog fly_path_closed_loop(const std::vector<Vec3>& path, ControllerKind kind,
                                      const FlightParams& p) {
  if (path.empty()) return FlightLog(p.slot_len, p.motor);
  UavState s;
  s.position = path.front();
  FlightSim sim(p, kind, s);
  const auto corners = corner_points(path);
  for (std::size_t i = 1; i < corners.size(); ++i) {
    const double dist = (corners[i] - sim.state().position).norm();
    sim.track(corners[i], 30.0 + 10.0 * dist / p.cruise_speed);
  }
  return sim.log();
}

/// Open-loop nominal profile: every waypoint-to-waypoint edge is flown as a
/// rest-to-rest trapezoid at max_accel / cruise_speed with level attitude;
/// rotor speeds follow the thrust magnitude m·|a + g ẑ|.
inline FlightLog fly_path_nominal(const std::vector<Vec3>& path, const FlightParams& p) {
  FlightLog log(p.slot_len, p.motor);
  const auto& af = p.airframe;
  const double a = p.max_accel, v = p.cruise_speed;
  auto omega_for = [&](const Vec3& acc) {
    const double w = equal_rotor_speed(af.mass * (acc + Vec3{0, 0, af.gravity}).norm(),
                                       af.thrust_coeff);
    if (w > af.omega_max * (1 + 1e-12))
      throw DomainError("nominal profile needs rotor speed above rotor_speed_max");
    return RotorSpeeds{w, w, w, w};
  };
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec3 d = path[i] - path[i - 1];
    const double len = d.norm();
    if (len == 0.0) continue;
    const Vec3 u = d * (1.0 / len);
    double t_acc, t_cruise, v_peak;
    if (len >= v * v / a) {
      t_acc = v / a;
      t_cruise = (len - v * v / a) / v;
      v_peak = v;
    } else {
      t_acc = std::sqrt(len / a);
      t_cruise = 0.0;
      v_peak = a * t_acc;
    }
    // phases are binned in sub-ticks of dt for the slot samples
    auto emit = [&](double duration, const Vec3& acc, Vec3 pos, double speed0) {
      const auto w = omega_for(acc);
      const double sign = acc.dot(u) >= 0 ? 1.0 : -1.0;
      const double acc_along = acc.norm() * sign;
      double t = 0.0;
      while (t < duration - 1e-12) {
        const double h = std::min(p.dt, duration - t);
        const double s_now = speed0 + acc_along * t;
        const Vec3 here = pos + u * (speed0 * t + 0.5 * acc_along * t * t);
        log.add(h, w, here, u * s_now);
        t += h;
      }
    };
    emit(t_acc, u * a, path[i - 1], 0.0);
    const Vec3 after_acc = path[i - 1] + u * (0.5 * a * t_acc * t_acc);
    emit(t_cruise, Vec3{}, after_acc, v_peak);
    emit(t_acc, u * (-a), after_acc + u * (v_peak * t_cruise), v_peak);
  }
  return log;
}

/// Per-slot state trace.
inline void write_state_csv(std::ostream& os, const FlightLog& log) {
  os << "t,x,y,z,phi,theta,psi,w1,w2,w3,w4,E_MOV\n";
  for (std::size_t i = 0; i < log.slots(); ++i) {
    const auto& p = log.slot_position()[i];
    const auto& a = log.slot_attitude()[i];
    os << i * log.slot_len() << ',' << p.x << ',' << p.y << ',' << p.z << ',' << a.x << ','
       << a.y << ',' << a.z;
    for (double w : log.slot_omega()[i]) os << ',' << w;
    os << ',' << log.slot_energy()[i] << '\n';
  }
}

inline void write_controller_csv(std::ostream& os, const std::vector<ControllerRecord>& rows) {
  os << "tick,e,EC,kp,ki,kd,u,w1,w2,w3,w4\n";
  for (const auto& r : rows) {
    os << r.tick << ',' << r.yaw.e << ',' << r.yaw.ec << ',' << r.yaw.gains.kp << ','
       << r.yaw.gains.ki << ',' << r.yaw.gains.kd << ',' << r.yaw.u;
    for (double w : r.omega) os << ',' << w;
    os << '\n';
  }
}

}  // namespace uavfog
