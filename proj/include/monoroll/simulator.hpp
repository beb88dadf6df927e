#pragma once

// Synthetic plant used to exercise the estimator. The dynamics here are a
// deliberately simplified stand-in, not a model of the real robot:
//
//  * motor:  the drivetrain torque obeys the discrete torque balance
//            m_b d_b^2 dd_theta_m + r_m k_s (d_b - d_s0) - m_b g d_b cos(alpha) = tau_m
//            exactly, with tau_m supplied by an affine DC-motor model and a
//            self-locking gear that cannot be back-driven;
//  * link:   m_b dd_d_b = m_b d_b dtheta_n^2 - k_s (d_b - d_s0) + (gravity along the bar) - c_b dd_b,
//            with inelastic end stops;
//  * shell:  rolling sphere about the contact point, driven by the gravity
//            torque of the offset link mass and the motor reaction torque,
//            with viscous rolling resistance.
//
// All three use semi-implicit Euler.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "monoroll/config.hpp"
#include "monoroll/drivetrain.hpp"
#include "monoroll/errors.hpp"
#include "monoroll/estimator.hpp"
#include "monoroll/kinematics.hpp"
#include "monoroll/params.hpp"

namespace monoroll {

/// Output-shaft DC motor: tau = N k_t (V - N k_e w) / R_a.
struct MotorModel {
  double torque_constant = 0.0; // k_t, motor side [N m/A]
  double back_emf_constant = 0.0; // k_e, motor side [V s/rad]
  double armature_resistance = 0.0; // R_a [ohm]
  double reduction = 1.0;           // N

  /// R_a from nominal voltage over nominal current, so the stall current at
  /// nominal voltage is the nominal current. k_t = k_e chosen to give the
  /// requested output no-load speed.
  static MotorModel from_nominal(const RobotParams& p, double no_load_speed) {
    MotorModel m;
    m.reduction = p.motor_reduction;
    m.armature_resistance = p.motor_nominal_voltage / p.motor_nominal_current;
    m.back_emf_constant = p.motor_nominal_voltage / (p.motor_reduction * no_load_speed);
    m.torque_constant = m.back_emf_constant;
    return m;
  }

  double stall_torque(double voltage) const {
    return reduction * torque_constant * voltage / armature_resistance;
  }

  double no_load_speed(double voltage) const { return voltage / (reduction * back_emf_constant); }
};

inline constexpr double default_no_load_speed = 30.0; // output shaft [rad/s]

inline double motor_model(double voltage, double motor_velocity, const MotorModel& m) {
  return m.reduction * m.torque_constant * (voltage - m.reduction * m.back_emf_constant * motor_velocity) /
         m.armature_resistance;
}

inline double motor_model(double voltage, double motor_velocity, const RobotParams& p) {
  return motor_model(voltage, motor_velocity, MotorModel::from_nominal(p, default_no_load_speed));
}

/// Output torque for a measured armature current.
inline double torque_from_current(double current, const MotorModel& m) {
  return m.reduction * m.torque_constant * current;
}

struct VoltageStep {
  double t = 0.0;
  double volts = 0.0;
};

struct SimConfig {
  RobotParams params;
  double dt = 1e-3;
  double duration = 1.0;
  std::vector<VoltageStep> voltage_profile{{0.0, 3.0}}; // piecewise constant from each t
  double sensor_noise = 0.0;      // fractional std-dev, every sensor channel
  std::uint64_t seed = 0;
  double initial_lead = 0.02;     // d_a at t = 0 [m]
  double initial_link_distance = std::numeric_limits<double>::quiet_NaN(); // NaN: static equilibrium
  double radial_damping = 0.5;    // c_b [N s/m]
  double roll_damping = 0.01;     // [N m s]
  double min_link_distance = 1e-3;
  double no_load_speed = default_no_load_speed;

  MotorModel motor() const { return MotorModel::from_nominal(params, no_load_speed); }

  double voltage_at(double t) const {
    double v = 0.0;
    for (const auto& s : voltage_profile)
      if (s.t <= t) v = s.volts;
    return v;
  }

  void validate() const {
    params.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "dt must be positive");
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("duration", "duration must be >= 0");
    if (!(sensor_noise >= 0.0)) throw ConfigError("sensor_noise", "sensor_noise must be >= 0");
    if (!(initial_lead > 0.0) || initial_lead > params.screw_length)
      throw ConfigError("initial_lead", "initial_lead must lie in (0, screw_length]");
    if (!std::isnan(initial_link_distance) &&
        (!(initial_link_distance > min_link_distance) || initial_link_distance > params.slider_length))
      throw ConfigError("initial_link_distance", "initial_link_distance must lie in (min, slider_length]");
    if (!(radial_damping >= 0.0)) throw ConfigError("radial_damping", "radial_damping must be >= 0");
    if (!(roll_damping >= 0.0)) throw ConfigError("roll_damping", "roll_damping must be >= 0");
    if (!(min_link_distance > 0.0) || min_link_distance >= params.slider_length)
      throw ConfigError("min_link_distance", "min_link_distance must lie in (0, slider_length)");
    if (!(no_load_speed > 0.0)) throw ConfigError("no_load_speed", "no_load_speed must be positive");
    for (std::size_t i = 1; i < voltage_profile.size(); ++i)
      if (!(voltage_profile[i].t > voltage_profile[i - 1].t))
        throw ConfigError("voltage_profile", "voltage_profile times must increase");
  }

  /// Reads `t:V, t:V, ...`.
  static std::vector<VoltageStep> parse_profile(const std::string& text) {
    std::vector<VoltageStep> out;
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = detail::trim(rest.substr(0, comma));
      const auto colon = item.find(':');
      VoltageStep step;
      if (colon == std::string_view::npos || !detail::parse_double(item.substr(0, colon), step.t) ||
          !detail::parse_double(item.substr(colon + 1), step.volts) || !std::isfinite(step.t) ||
          !std::isfinite(step.volts))
        throw ConfigError("voltage_profile", "voltage_profile: expected t:V entries, got '" + text + "'");
      out.push_back(step);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ConfigError("voltage_profile", "voltage_profile is empty");
    return out;
  }

  /// `dt` and `duration` are required; everything else has a default.
  static SimConfig from_config(const KeyValueConfig& cfg) {
    SimConfig c;
    c.params = RobotParams::from_config(cfg);
    c.dt = cfg.get_double("dt");
    c.duration = cfg.get_double("duration");
    if (cfg.has("voltage_profile")) c.voltage_profile = parse_profile(cfg.get_string("voltage_profile"));
    c.sensor_noise = cfg.get_double("sensor_noise", c.sensor_noise);
    const long long seed = cfg.get_int("seed", 0);
    if (seed < 0) throw ConfigError("seed", "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.initial_lead = cfg.get_double("initial_lead", c.initial_lead);
    c.initial_link_distance = cfg.get_double("initial_link_distance", c.initial_link_distance);
    c.radial_damping = cfg.get_double("radial_damping", c.radial_damping);
    c.roll_damping = cfg.get_double("roll_damping", c.roll_damping);
    c.min_link_distance = cfg.get_double("min_link_distance", c.min_link_distance);
    c.no_load_speed = cfg.get_double("no_load_speed", c.no_load_speed);
    c.validate();
    return c;
  }
};

struct SimState {
  double t = 0.0;
  Eigen::Quaterniond attitude = Eigen::Quaterniond::Identity(); // body -> world
  Vec3 shell_rate = Vec3::Zero();                                // world frame [rad/s]
  double x = 0.0, y = 0.0;                                       // contact point [m]
  DrivetrainState drivetrain;
  double motor_velocity = 0.0;  // [rad/s]
  double link_distance = 0.0;   // d_b [m]
  double link_rate = 0.0;       // [m/s]
  // Quantities from the step that produced this state.
  Vec3 center_accel = Vec3::Zero(); // world frame [m/s^2]
  double transmitted_torque = 0.0;  // tau_m through the gear [N m]

  RotationMatrix rotation() const { return attitude.toRotationMatrix(); }
  EulerAngles euler() const { return euler_from_rotation(rotation()).angles; }
};

struct TruthSample {
  double t = 0.0;
  double d_b = 0.0;
  double d_a = 0.0;
  double theta_n = 0.0;
  double force = 0.0; // m_b ||inertial acceleration of the shell centre||
};

struct SimLog {
  std::vector<SensorSample> samples;
  std::vector<TruthSample> truth;
  std::vector<TorqueSample> torque;
};

namespace detail {

/// Lower end of the actuator axis sits at -L_sl/2 on the body z axis.
inline Vec3 link_mass_position(const SimState& s, const RobotParams& p) {
  const double th = s.drivetrain.nut_angle;
  return {s.link_distance * std::cos(th), s.link_distance * std::sin(th),
          s.drivetrain.lead_position - 0.5 * p.screw_length};
}

inline double total_mass(const RobotParams& p) {
  return p.shell_mass + p.screw_mass + p.nut_mass + p.link_mass();
}

/// Diagonal world-frame inertia about the contact point.
inline Vec3 shell_inertia(const RobotParams& p) {
  const double r2 = p.shell_radius * p.shell_radius;
  const double spin = 2.0 / 3.0 * p.shell_mass * r2;
  const double roll = spin + total_mass(p) * r2;
  return {roll, roll, spin};
}

inline double sim_gravity_angle(const SimState& s, const RobotParams& p) {
  const double d_a = s.drivetrain.lead_position;
  return d_a > 0.0 ? gravity_angle(d_a, s.drivetrain.nut_angle, s.rotation(), p.shell_radius)
                   : gravity_angle_at_origin();
}

/// Holding torque the gear supplies at rest: the non-inertial terms of the
/// torque balance.
inline double load_torque(const RobotParams& p, double d_b, double alpha) {
  const double mb = p.link_mass();
  return p.torque_arm * p.total_stiffness * (d_b - p.spring_rest_length) -
         mb * standard_gravity * d_b * std::cos(alpha);
}

inline void guard(const SimState& s, double dt) {
  auto bad = [](double v) { return !std::isfinite(v) || std::abs(v) > 1e6; };
  if (bad(s.motor_velocity)) throw Divergence(dt, "motor velocity");
  if (bad(s.drivetrain.motor_angle)) throw Divergence(dt, "motor angle");
  if (bad(s.link_rate) || bad(s.link_distance)) throw Divergence(dt, "link state");
  if (bad(s.shell_rate.norm())) throw Divergence(dt, "shell rate");
  if (bad(s.x) || bad(s.y)) throw Divergence(dt, "planar position");
  if (bad(s.transmitted_torque) || bad(s.center_accel.norm())) throw Divergence(dt, "torque/acceleration");
}

} // namespace detail

/// Zero-input rest state: shell tilted so the link mass hangs straight
/// below the centre, spring balancing the gravity component along the bar.
inline SimState initial_state(const SimConfig& cfg) {
  const RobotParams& p = cfg.params;
  SimState s;
  s.drivetrain = initial_drivetrain(motor_angle_for_lead(cfg.initial_lead, p), p);
  const double z = s.drivetrain.lead_position - 0.5 * p.screw_length;
  const double mbg = p.link_mass() * standard_gravity;

  if (std::isnan(cfg.initial_link_distance)) {
    // k_s (d - d_s0) = m_b g d / sqrt(d^2 + z^2), increasing in d on the bracket.
    auto f = [&](double d) { return p.total_stiffness * (d - p.spring_rest_length) - mbg * d / std::hypot(d, z); };
    double lo = cfg.min_link_distance, hi = p.slider_length;
    if (f(lo) >= 0.0) {
      s.link_distance = lo;
    } else if (f(hi) <= 0.0) {
      s.link_distance = hi;
    } else {
      for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (f(mid) < 0.0 ? lo : hi) = mid;
      }
      s.link_distance = 0.5 * (lo + hi);
    }
  } else {
    s.link_distance = cfg.initial_link_distance;
  }

  const Vec3 pos = detail::link_mass_position(s, p);
  s.attitude = Eigen::Quaterniond::FromTwoVectors(pos, -Vec3::UnitZ());
  s.attitude.normalize();
  s.transmitted_torque = detail::load_torque(p, s.link_distance, detail::sim_gravity_angle(s, p));
  return s;
}

/// Model energy: shell kinetic + link kinetic + spring + gravity of the
/// link mass + rotor kinetic.
inline double mechanical_energy(const SimState& s, const SimConfig& cfg) {
  const RobotParams& p = cfg.params;
  const double mb = p.link_mass();
  const Vec3 inertia = detail::shell_inertia(p);
  const Vec3 q = s.rotation() * detail::link_mass_position(s, p);
  const double nut_rate = p.gear_ratio() * s.motor_velocity;
  const double stretch = s.link_distance - p.spring_rest_length;
  return 0.5 * s.shell_rate.cwiseProduct(inertia).dot(s.shell_rate) + 0.5 * mb * s.link_rate * s.link_rate +
         0.5 * p.total_stiffness * stretch * stretch + mb * standard_gravity * q.z() +
         0.5 * mb * s.link_distance * s.link_distance * nut_rate * nut_rate;
}

inline SimState step(const SimState& s, double voltage, double dt, const SimConfig& cfg) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  const RobotParams& p = cfg.params;
  const double mb = p.link_mass();
  const RotationMatrix rot = s.rotation();
  const Vec3 gravity(0.0, 0.0, -mb * standard_gravity);
  const double th = s.drivetrain.nut_angle;
  const double nut_rate = p.gear_ratio() * s.motor_velocity;
  const Vec3 q = rot * detail::link_mass_position(s, p);
  const double alpha = detail::sim_gravity_angle(s, p);

  SimState n = s;
  n.t = s.t + dt;

  // Link along the sliding bar.
  const Vec3 bar_dir = rot * Vec3(std::cos(th), std::sin(th), 0.0);
  const double link_force = mb * s.link_distance * nut_rate * nut_rate -
                            p.total_stiffness * (s.link_distance - p.spring_rest_length) + gravity.dot(bar_dir) -
                            cfg.radial_damping * s.link_rate;
  n.link_rate = s.link_rate + dt * link_force / mb;
  n.link_distance = s.link_distance + dt * n.link_rate;
  if (n.link_distance > p.slider_length) {
    n.link_distance = p.slider_length;
    n.link_rate = std::min(n.link_rate, 0.0);
  } else if (n.link_distance < cfg.min_link_distance) {
    n.link_distance = cfg.min_link_distance;
    n.link_rate = std::max(n.link_rate, 0.0);
  }

  // Motor through the self-locking gear.
  const MotorModel motor = cfg.motor();
  const double drive = motor_model(voltage, s.motor_velocity, motor);
  const double load = detail::load_torque(p, n.link_distance, alpha);
  const double inertia = mb * n.link_distance * n.link_distance;
  const double free_velocity = s.motor_velocity + dt * (drive - load) / inertia;
  if (s.motor_velocity == 0.0) {
    const bool driven = drive != 0.0 && std::signbit(drive - load) == std::signbit(drive);
    n.motor_velocity = driven ? free_velocity : 0.0;
  } else if ((free_velocity > 0.0) != (s.motor_velocity > 0.0)) {
    n.motor_velocity = 0.0;
  } else {
    n.motor_velocity = free_velocity;
  }
  n.drivetrain = apply_ratchet(s.drivetrain, s.drivetrain.motor_angle + dt * n.motor_velocity, p);
  n.transmitted_torque = inertia * (n.motor_velocity - s.motor_velocity) / dt + load;

  // Shell rolling about the contact point.
  const Vec3 shell_inertia = detail::shell_inertia(p);
  const Vec3 torque = q.cross(gravity) - drive * (rot * Vec3::UnitZ()) - cfg.roll_damping * s.shell_rate;
  n.shell_rate = s.shell_rate + dt * torque.cwiseQuotient(shell_inertia);
  const double angle = n.shell_rate.norm() * dt;
  if (angle > 0.0) {
    n.attitude = Eigen::Quaterniond(Eigen::AngleAxisd(angle, n.shell_rate.normalized())) * s.attitude;
    n.attitude.normalize();
  }
  const Vec3 rate_change = (n.shell_rate - s.shell_rate) / dt;
  n.center_accel = p.shell_radius * Vec3(rate_change.y(), -rate_change.x(), 0.0);
  n.x = s.x + dt * p.shell_radius * n.shell_rate.y();
  n.y = s.y - dt * p.shell_radius * n.shell_rate.x();

  detail::guard(n, dt);
  return n;
}

namespace detail {

inline SensorSample sense(const SimState& s) {
  SensorSample out;
  out.t = s.t;
  out.motor_angle = s.drivetrain.motor_angle;
  out.motor_velocity = s.motor_velocity;
  const RotationMatrix rot = s.rotation();
  out.accel = rot.transpose() * (s.center_accel + Vec3(0.0, 0.0, standard_gravity));
  out.euler = euler_from_rotation(rot).angles;
  return out;
}

} // namespace detail

inline SimLog run(const SimConfig& cfg) {
  cfg.validate();
  const RobotParams& p = cfg.params;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noisy = [&](double v) { return cfg.sensor_noise > 0.0 ? v * (1.0 + cfg.sensor_noise * normal(rng)) : v; };

  SimLog log;
  log.samples.reserve(steps + 1);
  log.truth.reserve(steps + 1);
  log.torque.reserve(steps + 1);

  SimState s = initial_state(cfg);
  for (std::size_t k = 0;; ++k) {
    // Time from the index so every run lands on the same grid.
    s.t = static_cast<double>(k) * cfg.dt;
    SensorSample sample = detail::sense(s);
    sample.motor_angle = noisy(sample.motor_angle);
    sample.motor_velocity = noisy(sample.motor_velocity);
    for (int c = 0; c < 3; ++c) sample.accel[c] = noisy(sample.accel[c]);
    sample.euler.gamma = noisy(sample.euler.gamma);
    sample.euler.beta = noisy(sample.euler.beta);
    sample.euler.alpha = noisy(sample.euler.alpha);
    log.samples.push_back(sample);
    log.truth.push_back({s.t, s.link_distance, s.drivetrain.lead_position, s.drivetrain.nut_angle,
                         p.link_mass() * s.center_accel.norm()});
    log.torque.push_back({s.t, s.transmitted_torque});
    if (k == steps) break;
    s = step(s, cfg.voltage_at(s.t), cfg.dt, cfg);
  }
  return log;
}

} // namespace monoroll
