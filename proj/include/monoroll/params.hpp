#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "monoroll/config.hpp"
#include "monoroll/errors.hpp"

namespace monoroll {

inline constexpr double standard_gravity = 9.80665;

/// Physical constants of the robot. Defaults are the built prototype's
/// values; the spring, mass and torque-arm entries are study variables.
struct RobotParams {
  double shell_radius = 0.17;        // R [m]
  double slider_bar_mass = 0.028;    // m_sb [kg]
  double shell_mass = 1.0;           // m_s [kg]
  double nut_mass = 0.02;            // m_rn [kg]
  double screw_mass = 0.085;         // m_sl [kg]
  double screw_pitch = 0.010;        // P [m]
  double screw_lead = 0.020;         // l [m]
  int nut_teeth = 34;                // eta_n
  int motor_gear_teeth = 17;         // eta_m
  double screw_length = 0.319;       // L_sl [m]
  double slider_length = 0.11;       // L_sb [m]
  double rotating_mass = 0.050;      // m [kg]
  double total_stiffness = 200.0;    // k_s [N/m]
  double torque_arm = 0.02;          // r_m [m]
  double spring_rest_length = 0.03;  // d_s0 [m]
  double motor_nominal_voltage = 6.0;
  double motor_nominal_current = 0.3;
  double motor_reduction = 62.0;
  // Divisor in d_a = l * theta_n / divisor. A conventional lead screw would
  // use 2*pi per revolution.
  double lead_divisor = std::numbers::pi;

  /// m_b = m + m_sb, the mass carried on the sliding bar.
  double link_mass() const { return rotating_mass + slider_bar_mass; }

  double gear_ratio() const {
    return static_cast<double>(motor_gear_teeth) / static_cast<double>(nut_teeth);
  }

  void validate() const {
    auto positive = [](const char* key, double v) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(key, std::string("parameter '") + key + "' must be positive and finite");
    };
    positive("shell_radius", shell_radius);
    positive("slider_bar_mass", slider_bar_mass);
    positive("shell_mass", shell_mass);
    positive("nut_mass", nut_mass);
    positive("screw_mass", screw_mass);
    positive("screw_pitch", screw_pitch);
    positive("screw_lead", screw_lead);
    positive("nut_teeth", nut_teeth);
    positive("motor_gear_teeth", motor_gear_teeth);
    positive("screw_length", screw_length);
    positive("slider_length", slider_length);
    positive("rotating_mass", rotating_mass);
    positive("total_stiffness", total_stiffness);
    positive("torque_arm", torque_arm);
    positive("spring_rest_length", spring_rest_length);
    positive("motor_nominal_voltage", motor_nominal_voltage);
    positive("motor_nominal_current", motor_nominal_current);
    positive("motor_reduction", motor_reduction);
    positive("lead_divisor", lead_divisor);
    if (motor_gear_teeth > nut_teeth)
      throw ConfigError("motor_gear_teeth", "motor_gear_teeth must not exceed nut_teeth");
  }

  /// Reads every RobotParams key present in `cfg`; absent keys keep their
  /// defaults.
  static RobotParams from_config(const KeyValueConfig& cfg) {
    RobotParams p;
    p.shell_radius = cfg.get_double("shell_radius", p.shell_radius);
    p.slider_bar_mass = cfg.get_double("slider_bar_mass", p.slider_bar_mass);
    p.shell_mass = cfg.get_double("shell_mass", p.shell_mass);
    p.nut_mass = cfg.get_double("nut_mass", p.nut_mass);
    p.screw_mass = cfg.get_double("screw_mass", p.screw_mass);
    p.screw_pitch = cfg.get_double("screw_pitch", p.screw_pitch);
    p.screw_lead = cfg.get_double("screw_lead", p.screw_lead);
    p.nut_teeth = static_cast<int>(cfg.get_int("nut_teeth", p.nut_teeth));
    p.motor_gear_teeth = static_cast<int>(cfg.get_int("motor_gear_teeth", p.motor_gear_teeth));
    p.screw_length = cfg.get_double("screw_length", p.screw_length);
    p.slider_length = cfg.get_double("slider_length", p.slider_length);
    p.rotating_mass = cfg.get_double("rotating_mass", p.rotating_mass);
    p.total_stiffness = cfg.get_double("total_stiffness", p.total_stiffness);
    p.torque_arm = cfg.get_double("torque_arm", p.torque_arm);
    p.spring_rest_length = cfg.get_double("spring_rest_length", p.spring_rest_length);
    p.motor_nominal_voltage = cfg.get_double("motor_nominal_voltage", p.motor_nominal_voltage);
    p.motor_nominal_current = cfg.get_double("motor_nominal_current", p.motor_nominal_current);
    p.motor_reduction = cfg.get_double("motor_reduction", p.motor_reduction);
    p.lead_divisor = cfg.get_double("lead_divisor", p.lead_divisor);
    p.validate();
    return p;
  }

  std::string to_config_text() const {
    std::string out;
    auto put = [&out](const char* key, double v) {
      out += key;
      out += " = ";
      out += detail::format_double(v);
      out += '\n';
    };
    put("shell_radius", shell_radius);
    put("slider_bar_mass", slider_bar_mass);
    put("shell_mass", shell_mass);
    put("nut_mass", nut_mass);
    put("screw_mass", screw_mass);
    put("screw_pitch", screw_pitch);
    put("screw_lead", screw_lead);
    out += "nut_teeth = " + std::to_string(nut_teeth) + "\n";
    out += "motor_gear_teeth = " + std::to_string(motor_gear_teeth) + "\n";
    put("screw_length", screw_length);
    put("slider_length", slider_length);
    put("rotating_mass", rotating_mass);
    put("total_stiffness", total_stiffness);
    put("torque_arm", torque_arm);
    put("spring_rest_length", spring_rest_length);
    put("motor_nominal_voltage", motor_nominal_voltage);
    put("motor_nominal_current", motor_nominal_current);
    put("motor_reduction", motor_reduction);
    put("lead_divisor", lead_divisor);
    return out;
  }

  bool operator==(const RobotParams&) const = default;
};

} // namespace monoroll
