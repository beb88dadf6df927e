#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monoroll/drivetrain.hpp"
#include "monoroll/errors.hpp"
#include "monoroll/filter.hpp"
#include "monoroll/kinematics.hpp"
#include "monoroll/params.hpp"

namespace monoroll {

/// One timestamped reading from the motor encoder and the shell IMU.
struct SensorSample {
  double t = 0.0;
  double motor_angle = 0.0;    // theta_m [rad]
  double motor_velocity = 0.0; // dtheta_m/dt [rad/s]
  Vec3 accel = Vec3::Zero();   // body-frame specific force [m/s^2]
  EulerAngles euler;           // shell attitude
};

struct TorqueSample {
  double t = 0.0;
  double tau = 0.0; // [N m]
};

enum class RootBranch { quadratic, linear_fallback, clamped };

inline std::string_view to_string(RootBranch b) {
  switch (b) {
    case RootBranch::quadratic: return "quadratic";
    case RootBranch::linear_fallback: return "linear-fallback";
    case RootBranch::clamped: return "clamped";
  }
  return "?";
}

struct DbSolution {
  double d_b = 0.0;
  RootBranch branch = RootBranch::quadratic;
};

struct MassEstimate {
  double t = 0.0;
  double d_a = 0.0;
  double theta_n = 0.0;
  double d_b = 0.0;
  double alpha = 0.0;        // gravity direction angle
  double motor_accel = 0.0;  // finite-difference theta_m acceleration
  RootBranch branch = RootBranch::quadratic;
};

struct ForceSample {
  double t = 0.0;
  double force = 0.0; // F_n [N]
};

/// How the at-rest reading a_g is mapped into the inertial frame when
/// forming R(t) a(t) - R a_g.
enum class GravityReference {
  initial_attitude, // R(t0) a_g: gravity stays fixed in the world frame
  current_attitude, // R(t) a_g, the expression as printed; exact only while the shell has not rotated
};

struct EstimatorOptions {
  double accel_epsilon = 1e-6;      // below this |ddtheta| the linear form is used [rad/s^2]
  bool eq6_literal = false;         // alpha = acos(sin(c)) instead of acos(c)
  double force_cutoff_hz = 5.0;
  double velocity_cutoff_hz = 20.0; // encoder velocity smoothing; 0 disables
  GravityReference gravity_reference = GravityReference::initial_attitude;
};

struct SampleGap {
  std::size_t index = 0;
  double t = 0.0;
  std::string message;
};

struct RunEstimate {
  std::vector<std::optional<MassEstimate>> estimates; // aligned with input samples
  std::vector<SampleGap> gaps;
};

inline double motor_angular_accel(double velocity, double previous_velocity, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("motor_angular_accel: dt must be positive");
  return (velocity - previous_velocity) / dt;
}

namespace detail {

inline double angle_from_cosine(double c, bool literal) {
  c = std::clamp(c, -1.0, 1.0);
  return literal ? std::acos(std::sin(c)) : std::acos(c);
}

} // namespace detail

/// Angle between the actuator-axis vector T_d = Rmat (0,0,d) and the
/// mass-point vector T_s = Rmat (R sin(th_d) cos(th_n), R sin(th_d) sin(th_n), d),
/// with th_d = 2 asin(d / 2R).
inline double gravity_angle(double d_d, double theta_n, const RotationMatrix& rot, double radius,
                            bool literal = false) {
  if (!std::isfinite(d_d) || !std::isfinite(theta_n) || !(radius > 0.0))
    throw InvalidArgument("gravity_angle: non-finite input or non-positive radius");
  if (!(d_d > 0.0) || d_d > 2.0 * radius)
    throw DomainError("gravity_angle: d_d must lie in (0, 2R]");
  const double theta_d = 2.0 * std::asin(std::min(1.0, d_d / (2.0 * radius)));
  const Vec3 td = rot * Vec3(0.0, 0.0, d_d);
  const Vec3 ts = rot * Vec3(radius * std::sin(theta_d) * std::cos(theta_n),
                             radius * std::sin(theta_d) * std::sin(theta_n), d_d);
  const double nd = td.norm();
  const double ns = ts.norm();
  if (!(nd > 0.0) || !(ns > 0.0)) throw DegenerateGeometry("gravity_angle: zero-length vector");
  return detail::angle_from_cosine(td.dot(ts) / (nd * ns), literal);
}

/// gravity_angle as d_d -> 0+, where both vectors vanish but their angle
/// tends to pi/4 independently of theta_n and attitude.
inline double gravity_angle_at_origin(bool literal = false) {
  return detail::angle_from_cosine(std::numbers::sqrt2 / 2.0, literal);
}

/// Left side minus right side of the discrete torque balance
/// m_b d^2 dd + r_m k_s (d - d_s0) - m_b g d cos(alpha) - tau.
inline double torque_balance_residual(const RobotParams& p, double d_b, double motor_accel, double alpha,
                                      double tau, double rotating_mass) {
  const double mb = rotating_mass + p.slider_bar_mass;
  return mb * d_b * d_b * motor_accel + p.torque_arm * p.total_stiffness * (d_b - p.spring_rest_length) -
         mb * standard_gravity * d_b * std::cos(alpha) - tau;
}

/// Residual normalised by the magnitude of the individual terms.
inline double torque_balance_relative_residual(const RobotParams& p, double d_b, double motor_accel,
                                               double alpha, double tau, double rotating_mass) {
  const double mb = rotating_mass + p.slider_bar_mass;
  const double ks_rm = p.torque_arm * p.total_stiffness;
  const double scale = std::abs(mb * d_b * d_b * motor_accel) + ks_rm * (std::abs(d_b) + p.spring_rest_length) +
                       std::abs(mb * standard_gravity * d_b * std::cos(alpha)) + std::abs(tau);
  const double r = torque_balance_residual(p, d_b, motor_accel, alpha, tau, rotating_mass);
  return scale > 0.0 ? std::abs(r) / scale : std::abs(r);
}

/// Solves the torque balance for the link distance d_b.
///
/// With a = m_b dd, b = k_s r_m - m_b g cos(alpha) and c = k_s r_m d_s0 + tau
/// the balance reads a d^2 + b d - c = 0. The returned root is the one that
/// stays finite as dd -> 0 (the +sqrt branch whenever b > 0), evaluated in
/// the cancellation-free form 2c / (b + sgn(b) sqrt(b^2 + 4ac)).
inline DbSolution estimate_db(const RobotParams& p, double motor_accel, double alpha, double tau,
                              double rotating_mass, double accel_epsilon = 1e-6) {
  const double mb = rotating_mass + p.slider_bar_mass;
  if (!(mb > 0.0)) throw InvalidArgument("estimate_db: m_b must be positive");
  if (!(p.total_stiffness > 0.0) || !(p.torque_arm > 0.0))
    throw InvalidArgument("estimate_db: k_s and r_m must be positive");
  if (!std::isfinite(motor_accel) || !std::isfinite(alpha) || !std::isfinite(tau))
    throw InvalidArgument("estimate_db: non-finite input");

  const double mu_g = standard_gravity * std::cos(alpha);
  const double ks_rm = p.total_stiffness * p.torque_arm;
  const double b = ks_rm - mb * mu_g;
  const double c = ks_rm * p.spring_rest_length + tau;

  DbSolution out;
  if (std::abs(motor_accel) < accel_epsilon) {
    if (std::abs(b) < 1e-12) throw SingularConfiguration("estimate_db: k_s r_m - m_b g cos(alpha) vanishes");
    out.d_b = c / b;
    out.branch = RootBranch::linear_fallback;
  } else {
    const double a = mb * motor_accel;
    const double disc = b * b + 4.0 * a * c;
    if (disc < 0.0) throw NoRealSolution(disc);
    const double q = b + std::copysign(std::sqrt(disc), b);
    out.d_b = q != 0.0 ? 2.0 * c / q : (-b + std::sqrt(disc)) / (2.0 * a);
    out.branch = RootBranch::quadratic;
  }

  if (!(out.d_b > 0.0) || out.d_b > p.slider_length) {
    out.d_b = std::clamp(out.d_b, 0.0, p.slider_length);
    out.branch = RootBranch::clamped;
  }
  return out;
}

namespace detail {

inline void check_sample(const SensorSample& s, std::size_t index) {
  const bool ok = std::isfinite(s.t) && std::isfinite(s.motor_angle) && std::isfinite(s.motor_velocity) &&
                  s.accel.allFinite() && s.euler.finite();
  if (!ok) throw MalformedInput("sample " + std::to_string(index) + ": non-finite value");
  if (s.accel.norm() >= 1000.0)
    throw MalformedInput("sample " + std::to_string(index) + ": acceleration magnitude above 1000 m/s^2");
}

} // namespace detail

/// Force from the low-passed IMU acceleration:
/// F_n = m_b || R(t) a(t) - R_ref a_g ||, with a_g the filtered reading at t0.
inline std::vector<ForceSample> estimate_force(std::span<const SensorSample> samples, double link_mass,
                                               double cutoff_hz,
                                               GravityReference reference = GravityReference::initial_attitude) {
  if (samples.size() < 3) throw MalformedInput("estimate_force: need at least 3 samples");
  if (!(link_mass > 0.0)) throw InvalidArgument("estimate_force: m_b must be positive");
  std::vector<TimedVec3> accel;
  accel.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    detail::check_sample(samples[i], i);
    accel.push_back({samples[i].t, samples[i].accel});
  }
  const auto filtered = zero_phase_lowpass(accel, cutoff_hz);
  const Vec3 a_g = filtered.front().v;
  const RotationMatrix r0 = rotation_from_euler(samples.front().euler);

  std::vector<ForceSample> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RotationMatrix r = rotation_from_euler(samples[i].euler);
    const Vec3 ref = reference == GravityReference::initial_attitude ? Vec3(r0 * a_g) : Vec3(r * a_g);
    out.push_back({samples[i].t, link_mass * (r * filtered[i].v - ref).norm()});
  }
  return out;
}

/// Per-sample pipeline: gear stage, lead screw with ratchet, gravity angle,
/// then the torque-balance root. Failing samples become gaps.
inline RunEstimate estimate_run(std::span<const SensorSample> samples, const RobotParams& p,
                                std::span<const TorqueSample> torque, const EstimatorOptions& opt = {}) {
  if (samples.size() != torque.size())
    throw MalformedInput("estimate_run: torque series has " + std::to_string(torque.size()) +
                         " rows, log has " + std::to_string(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    detail::check_sample(samples[i], i);
    if (i > 0 && !(samples[i].t > samples[i - 1].t))
      throw MalformedInput("estimate_run: timestamps not strictly increasing at row " + std::to_string(i));
    const double tol = 1e-9 * std::max(1.0, std::abs(samples[i].t));
    if (!(std::abs(torque[i].t - samples[i].t) <= tol))
      throw MalformedInput("estimate_run: torque timestamp misaligned at row " + std::to_string(i));
  }

  std::vector<double> velocity(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) velocity[i] = samples[i].motor_velocity;
  if (opt.velocity_cutoff_hz > 0.0 && samples.size() >= 3) {
    std::vector<double> t(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) t[i] = samples[i].t;
    velocity = zero_phase_lowpass(t, velocity, opt.velocity_cutoff_hz);
  }

  RunEstimate run;
  run.estimates.resize(samples.size());
  DrivetrainState drive;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SensorSample& s = samples[i];
    try {
      drive = i == 0 ? initial_drivetrain(s.motor_angle, p) : apply_ratchet(drive, s.motor_angle, p);
      MassEstimate e;
      e.t = s.t;
      e.theta_n = drive.nut_angle;
      e.d_a = drive.lead_position;
      e.motor_accel = i == 0 ? 0.0 : motor_angular_accel(velocity[i], velocity[i - 1], s.t - samples[i - 1].t);
      e.alpha = e.d_a > 0.0
                  ? gravity_angle(e.d_a, e.theta_n, rotation_from_euler(s.euler), p.shell_radius, opt.eq6_literal)
                  : gravity_angle_at_origin(opt.eq6_literal);
      const auto sol = estimate_db(p, e.motor_accel, e.alpha, torque[i].tau, p.rotating_mass, opt.accel_epsilon);
      e.d_b = sol.d_b;
      e.branch = sol.branch;
      run.estimates[i] = e;
    } catch (const std::exception& ex) {
      run.gaps.push_back({i, s.t, ex.what()});
    }
  }
  return run;
}

} // namespace monoroll
