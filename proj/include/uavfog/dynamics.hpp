#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "uavfog/config.hpp"
#include "uavfog/error.hpp"
#include "uavfog/geometry.hpp"

namespace uavfog {

using RotorSpeeds = std::array<double, 4>;  // r/min
using Mat3 = std::array<std::array<double, 3>, 3>;

struct UavState {
  Vec3 position;
  Vec3 velocity;
  Vec3 attitude;  // roll φ, pitch θ, yaw ψ (rad)
  Vec3 rates;     // φ̇, θ̇, ψ̇ (rad/s)
  RotorSpeeds omega{};
  double battery_wh = 0.0;
};

/// U₁ total thrust, U₂ roll, U₃ pitch, U₄ yaw.
struct ControlInput {
  double u1 = 0.0, u2 = 0.0, u3 = 0.0, u4 = 0.0;
};

/// Rigid-body constants consumed by the Newton–Euler model.
struct AirframeParams {
  double mass = 80.0;
  double gravity = 9.81;
  double arm = 1.15;  // m
  double ix = 0.095, iy = 0.095, iz = 0.187;
  double thrust_coeff = 1.483;
  double torque_coeff = 2.925;
  double omega_max = 15.0;
  double v_max = 50.0;
  double z_max = 2500.0;

  static AirframeParams from(const ScenarioConfig& c) {
    return {c.uav_mass, c.gravity,         c.arm_length(),     c.inertia_x,
            c.inertia_y, c.inertia_z,      c.thrust_coeff,     c.torque_coeff,
            c.rotor_speed_max, c.v_max,    c.z_max};
  }
};

struct MotorParams {
  double voltage = 12.0;
  double resistance = 1.0;
  double potential = 0.75;

  static MotorParams from(const ScenarioConfig& c) {
    return {c.motor_voltage, c.motor_resistance, c.motor_potential};
  }
};

/// Per-rotor thrust F = C_T ω².
inline double rotor_thrust(double omega, double thrust_coeff) {
  return thrust_coeff * omega * omega;
}

inline ControlInput control_inputs(const RotorSpeeds& w, double thrust_coeff,
                                   double torque_coeff) {
  for (double v : w)
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("rotor speed must be >= 0");
  const double s1 = w[0] * w[0], s2 = w[1] * w[1], s3 = w[2] * w[2], s4 = w[3] * w[3];
  return {thrust_coeff * (s1 + s2 + s3 + s4), thrust_coeff * (-s2 + s4),
          thrust_coeff * (-s1 + s3), torque_coeff * (-s1 + s2 - s3 + s4)};
}

/// Inverts the control-quantity block for ω² and clamps each rotor to
/// [0, omega_max].
inline RotorSpeeds allocate_rotors(const ControlInput& u, double thrust_coeff,
                                   double torque_coeff, double omega_max) {
  const double a = u.u1 / thrust_coeff, b = u.u2 / thrust_coeff;
  const double c = u.u3 / thrust_coeff, d = u.u4 / torque_coeff;
  const double even = 0.5 * (a + d), odd = 0.5 * (a - d);  // ω₂²+ω₄², ω₁²+ω₃²
  std::array<double, 4> sq{0.5 * (odd - c), 0.5 * (even - b), 0.5 * (odd + c), 0.5 * (even + b)};
  RotorSpeeds out{};
  const double cap = omega_max * omega_max;
  for (int i = 0; i < 4; ++i) out[i] = std::sqrt(std::clamp(sq[i], 0.0, cap));
  return out;
}

inline bool euler_in_bounds(const Vec3& att) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  return std::abs(att.x) < half_pi && std::abs(att.y) < half_pi &&
         std::abs(att.z) < std::numbers::pi;
}

/// Body-to-earth rotation (Z-Y-X order), the transpose of earth-to-body.
inline Mat3 rotation_body_to_earth(double phi, double theta, double psi) {
  if (!euler_in_bounds({phi, theta, psi}))
    throw DomainError("Euler angles outside (-pi/2, pi/2) x (-pi/2, pi/2) x (-pi, pi)");
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  return {{{ct * cp, st * cp * sf - sp * cf, st * cp * cf + sp * sf},
           {ct * sp, st * sp * sf + cp * cf, st * sp * cf - cp * sf},
           {-st, ct * sf, ct * cf}}};
}

inline Mat3 transpose(const Mat3& m) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}

inline Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

class InstabilityError : public DomainError {
public:
  InstabilityError(const std::string& what, UavState state)
      : DomainError(what), state_(state) {}
  const UavState& state() const noexcept { return state_; }

private:
  UavState state_;
};

namespace detail {

struct Deriv {
  Vec3 dpos, dvel, datt, drate;
};

inline Deriv rigid_body_rates(const UavState& s, const ControlInput& u, const AirframeParams& p) {
  const double phi = s.attitude.x, theta = s.attitude.y, psi = s.attitude.z;
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  const double a = u.u1 / p.mass;
  const Vec3& w = s.rates;
  Deriv d;
  d.dpos = s.velocity;
  d.dvel = {a * (sf * sp + cf * st * cp), a * (cf * st * sp - sf * cp), a * (cf * ct) - p.gravity};
  d.datt = w;
  d.drate = {(p.arm * u.u2 - w.y * w.z * (p.iz - p.iy)) / p.ix,
             (p.arm * u.u3 - w.x * w.z * (p.ix - p.iz)) / p.iy,
             (u.u4 - w.x * w.y * (p.iy - p.ix)) / p.iz};
  return d;
}

inline UavState advance(const UavState& s, const Deriv& d, double h) {
  UavState out = s;
  out.position += d.dpos * h;
  out.velocity += d.dvel * h;
  out.attitude += d.datt * h;
  out.rates += d.drate * h;
  return out;
}

}  // namespace detail

/// Accelerations of the Newton–Euler model at a state, for residual checks.
inline std::pair<Vec3, Vec3> accelerations(const UavState& s, const ControlInput& u,
                                           const AirframeParams& p) {
  const auto d = detail::rigid_body_rates(s, u, p);
  return {d.dvel, d.drate};
}

/// One fixed RK4 step of the six coupled second-order equations with U held
/// constant. Throws InstabilityError when the attitude leaves the Euler
/// bounds; speed and altitude limits are checked only when `check_limits`.
inline UavState step_dynamics(const UavState& s, const ControlInput& u, double dt,
                              const AirframeParams& p, bool check_limits = true) {
  if (!(dt > 0.0)) throw DomainError("integration step must be positive");
  using detail::advance;
  const auto k1 = detail::rigid_body_rates(s, u, p);
  const auto k2 = detail::rigid_body_rates(advance(s, k1, dt / 2), u, p);
  const auto k3 = detail::rigid_body_rates(advance(s, k2, dt / 2), u, p);
  const auto k4 = detail::rigid_body_rates(advance(s, k3, dt), u, p);
  UavState out = s;
  auto comb = [&](Vec3 detail::Deriv::*m) {
    return (k1.*m + 2.0 * (k2.*m) + 2.0 * (k3.*m) + k4.*m) * (dt / 6.0);
  };
  out.position += comb(&detail::Deriv::dpos);
  out.velocity += comb(&detail::Deriv::dvel);
  out.attitude += comb(&detail::Deriv::datt);
  out.rates += comb(&detail::Deriv::drate);
  if (!euler_in_bounds(out.attitude)) throw InstabilityError("attitude left Euler bounds", out);
  if (check_limits) {
    if (out.velocity.norm() > p.v_max * (1 + 1e-9))
      throw InstabilityError("speed limit v_max exceeded", out);
    if (out.position.z < -1e-9 || out.position.z > p.z_max * (1 + 1e-9))
      throw InstabilityError("altitude outside [0, z_max]", out);
  }
  return out;
}

/// Ideal-gas air density (kg/m³); molar mass in kg/mol.
inline double air_density(double temperature_k, double pressure, double molar_mass,
                          double gas_constant) {
  if (!(temperature_k > 0.0)) throw DomainError("temperature must be positive (kelvin)");
  return pressure * molar_mass / (gas_constant * temperature_k);
}

/// Blade geometry. Lengths in millimetres; the blade-angle factor Q_γ is a
/// pluggable model defaulting to sin(γ).
struct PropellerSpec {
  int blades = 2;
  double radius = 512.0;
  double hub_radius = 40.0;
  double width = 250.0;
  double thickness = 7.5;
  double mount_angle = 0.2;
  std::function<double(double)> q_gamma = [](double g) { return std::sin(g); };

  static PropellerSpec from(const ScenarioConfig& c) {
    PropellerSpec s;
    s.blades = c.blade_count;
    s.radius = c.prop_radius_mm;
    s.hub_radius = c.hub_radius_mm;
    s.width = c.blade_width_mm;
    s.thickness = c.blade_thickness_mm;
    s.mount_angle = c.mount_angle;
    return s;
  }
};

struct Coefficients {
  double torque = 0.0;  // C_M
  double thrust = 0.0;  // C_T
};

/// C_M = (1/2π)² ρ (2R)⁵ / (N_B ∫ P_t⁴ P_w Q_γ dr) and C_T = C_M / 2R. The
/// blade integral is evaluated with composite Simpson over [r₀, R] (mm).
inline Coefficients torque_and_thrust_coeffs(const PropellerSpec& spec, double air_rho) {
  if (!(air_rho > 0.0)) throw DomainError("air density must be positive");
  if (spec.blades < 2 || spec.blades > 4) throw DomainError("blade count must be 2, 3 or 4");
  if (!(spec.radius > spec.hub_radius && spec.hub_radius > 0.0))
    throw DomainError("propeller needs R > r0 > 0");
  const double q = spec.q_gamma(spec.mount_angle);
  auto integrand = [&](double) { return std::pow(spec.thickness, 4) * spec.width * q; };
  constexpr int panels = 64;
  const double h = (spec.radius - spec.hub_radius) / panels;
  double sum = integrand(spec.hub_radius) + integrand(spec.radius);
  for (int i = 1; i < panels; ++i)
    sum += (i % 2 ? 4.0 : 2.0) * integrand(spec.hub_radius + i * h);
  const double integral = sum * h / 3.0;
  if (!(integral > 0.0) || !std::isfinite(integral))
    throw DomainError("degenerate blade: non-positive blade integral");
  const double two_r = 2.0 * spec.radius;
  const double k = 1.0 / (2.0 * std::numbers::pi);
  Coefficients out;
  out.torque = k * k * air_rho * std::pow(two_r, 5) / (spec.blades * integral);
  out.thrust = out.torque / two_r;
  return out;
}

enum class StructureStatus { ok, collision, underpowered };

/// l/3 ≤ R ≤ (√2/2) l, same units for both.
inline StructureStatus check_structure(double radius, double arm) {
  if (!(radius > 0.0 && arm > 0.0)) throw DomainError("radius and arm must be positive");
  if (radius > std::sqrt(2.0) / 2.0 * arm * (1 + kStructureTolerance))
    return StructureStatus::collision;
  if (radius < arm / 3.0 * (1 - kStructureTolerance)) return StructureStatus::underpowered;
  return StructureStatus::ok;
}

inline const char* to_string(StructureStatus s) {
  switch (s) {
    case StructureStatus::ok: return "ok";
    case StructureStatus::collision: return "collision";
    case StructureStatus::underpowered: return "underpowered";
  }
  return "?";
}

/// Motor current I = (V_m − ω P_m) / R_m for one rotor.
inline double motor_current(double omega, const MotorParams& m) {
  const double i = (m.voltage - omega * m.potential) / m.resistance;
  if (i < 0.0)
    throw DomainError("motor model violation: back-EMF exceeds rated voltage (negative current)");
  return i;
}

/// E^MOV = Σᵢ I_i · duration for one interval of constant rotor speeds.
inline double movement_energy(const RotorSpeeds& w, const MotorParams& m, double duration) {
  double e = 0.0;
  for (double v : w) e += motor_current(v, m) * duration;
  return e;
}

/// Per-slot movement energy over a rotor-speed trace (one entry per slot).
inline std::vector<double> movement_energy_trace(std::span<const RotorSpeeds> trace,
                                                 const MotorParams& m, double slot_len) {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& w : trace) out.push_back(movement_energy(w, m, slot_len));
  return out;
}

inline constexpr double kJoulesPerWh = 3600.0;

/// Rotor speed that holds a steady total thrust with all four rotors equal.
inline double equal_rotor_speed(double thrust, double thrust_coeff) {
  return std::sqrt(std::max(thrust, 0.0) / (4.0 * thrust_coeff));
}

}  // namespace uavfog
