#pragma once

#include <algorithm>
#include <cmath>

#include "monoroll/errors.hpp"
#include "monoroll/params.hpp"

namespace monoroll {

struct LeadPosition {
  double d_a = 0.0;      // [m], inside [0, L_sl]
  bool saturated = false; // true if the raw value hit an end stop
};

/// Motor pinion, rotating nut and spiral lead, with the freewheel holder
/// modelled as a running maximum of the lead position.
struct DrivetrainState {
  double motor_angle = 0.0;    // theta_m [rad]
  double nut_angle = 0.0;      // theta_n [rad]
  double lead_position = 0.0;  // d_a [m]
  double ratchet_anchor = 0.0; // highest d_a reached [m]
};

/// Gear stage; applies equally to angles and angular velocities.
inline double nut_from_motor(double motor_angle, const RobotParams& p) {
  if (!std::isfinite(motor_angle)) throw InvalidArgument("nut_from_motor: non-finite motor angle");
  return p.gear_ratio() * motor_angle;
}

inline LeadPosition lead_position(double nut_angle, const RobotParams& p) {
  if (!std::isfinite(nut_angle)) throw InvalidArgument("lead_position: non-finite nut angle");
  const double raw = p.screw_lead * nut_angle / p.lead_divisor;
  const double clamped = std::clamp(raw, 0.0, p.screw_length);
  return {clamped, clamped != raw};
}

/// d(d_a)/d(theta_m) on the unclamped part of the stroke.
inline double lead_rate(const RobotParams& p) {
  return p.screw_lead * p.gear_ratio() / p.lead_divisor;
}

inline double motor_angle_for_lead(double d_a, const RobotParams& p) {
  if (!std::isfinite(d_a) || d_a < 0.0 || d_a > p.screw_length)
    throw InvalidArgument("motor_angle_for_lead: d_a outside [0, L_sl]");
  const double nut = d_a * p.lead_divisor / p.screw_lead;
  return nut / p.gear_ratio();
}

inline DrivetrainState initial_drivetrain(double motor_angle, const RobotParams& p) {
  DrivetrainState s;
  s.motor_angle = motor_angle;
  s.nut_angle = nut_from_motor(motor_angle, p);
  s.lead_position = lead_position(s.nut_angle, p).d_a;
  s.ratchet_anchor = s.lead_position;
  return s;
}

inline DrivetrainState apply_ratchet(const DrivetrainState& state, double new_motor_angle,
                                     const RobotParams& p) {
  DrivetrainState next;
  next.motor_angle = new_motor_angle;
  next.nut_angle = nut_from_motor(new_motor_angle, p);
  next.lead_position = std::max(state.ratchet_anchor, lead_position(next.nut_angle, p).d_a);
  next.ratchet_anchor = next.lead_position;
  return next;
}

} // namespace monoroll
