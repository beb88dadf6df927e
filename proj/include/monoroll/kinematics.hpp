#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "monoroll/errors.hpp"

namespace monoroll {

using Vec3 = Eigen::Vector3d;
using RotationMatrix = Eigen::Matrix3d;

/// Shell attitude in the ZYX convention: yaw gamma about z, pitch beta
/// about y, roll alpha about x.
struct EulerAngles {
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;

  bool finite() const {
    return std::isfinite(gamma) && std::isfinite(beta) && std::isfinite(alpha);
  }

  friend EulerAngles operator+(EulerAngles a, const EulerAngles& b) {
    return {a.gamma + b.gamma, a.beta + b.beta, a.alpha + b.alpha};
  }
};

/// Planar contact-point displacement; z is identically zero.
struct PlanarDisplacement {
  double x = 0.0;
  double y = 0.0;
};

struct EulerDecomposition {
  EulerAngles angles;
  bool gimbal_locked = false;
};

struct TimedAngles {
  double t;
  EulerAngles angles;
};

struct TimedDisplacement {
  double t;
  PlanarDisplacement d;
};

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(a, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

/// Canonical representative: gamma, alpha in (-pi, pi], beta in [-pi/2, pi/2].
inline EulerAngles normalize(EulerAngles a) {
  double beta = wrap_angle(a.beta);
  double gamma = a.gamma;
  double alpha = a.alpha;
  // (g, b, a) and (g + pi, pi - b, a + pi) give the same rotation.
  if (beta > std::numbers::pi / 2) {
    beta = std::numbers::pi - beta;
    gamma += std::numbers::pi;
    alpha += std::numbers::pi;
  } else if (beta < -std::numbers::pi / 2) {
    beta = -std::numbers::pi - beta;
    gamma += std::numbers::pi;
    alpha += std::numbers::pi;
  }
  return {wrap_angle(gamma), beta, wrap_angle(alpha)};
}

inline RotationMatrix rotation_from_euler(const EulerAngles& a) {
  if (!a.finite()) throw InvalidArgument("rotation_from_euler: non-finite angle");
  const double cg = std::cos(a.gamma), sg = std::sin(a.gamma);
  const double cb = std::cos(a.beta), sb = std::sin(a.beta);
  const double ca = std::cos(a.alpha), sa = std::sin(a.alpha);
  // Rz(gamma) * Ry(beta) * Rx(alpha), expanded.
  RotationMatrix r;
  r << cg * cb, cg * sb * sa - sg * ca, cg * sb * ca + sg * sa,
       sg * cb, sg * sb * sa + cg * ca, sg * sb * ca - cg * sa,
       -sb,     cb * sa,                cb * ca;
  return r;
}

/// Inverse of rotation_from_euler. At gimbal lock (|cos beta| < 1e-8) gamma
/// is pinned to 0 and the combined rotation is attributed to alpha.
inline EulerDecomposition euler_from_rotation(const RotationMatrix& r) {
  if (!r.allFinite()) throw InvalidArgument("euler_from_rotation: non-finite matrix");
  if ((r.transpose() * r - RotationMatrix::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw InvalidArgument("euler_from_rotation: matrix is not orthonormal");

  EulerDecomposition out;
  const double cb = std::hypot(r(0, 0), r(1, 0));
  out.angles.beta = std::atan2(-r(2, 0), cb);
  if (cb < 1e-8) {
    out.gimbal_locked = true;
    const double sign = r(2, 0) < 0.0 ? 1.0 : -1.0; // sin(beta)
    out.angles.gamma = 0.0;
    out.angles.alpha = std::atan2(sign * r(0, 1), r(1, 1));
    return out;
  }
  out.angles.gamma = std::atan2(r(1, 0), r(0, 0));
  out.angles.alpha = std::atan2(r(2, 1), r(2, 2));
  return out;
}

/// Rolling-contact odometry. Differences are taken on the given (already
/// unwrapped) angles.
inline PlanarDisplacement contact_displacement(const EulerAngles& angles,
                                               const EulerAngles& angles0,
                                               double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("contact_displacement: radius must be positive");
  if (!angles.finite() || !angles0.finite())
    throw InvalidArgument("contact_displacement: non-finite angle");
  return {radius * (angles.beta - angles0.beta),
          -radius * (angles.alpha - angles0.alpha)};
}

/// Per-channel nearest-continuation unwrapping: any step larger than pi is
/// taken as a wrap.
inline std::vector<EulerAngles> unwrap_angles(std::span<const EulerAngles> series) {
  std::vector<EulerAngles> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i == 0) {
      out.push_back(series[0]);
      continue;
    }
    const EulerAngles& prev_raw = series[i - 1];
    const EulerAngles& cur = series[i];
    const EulerAngles& prev = out.back();
    out.push_back({prev.gamma + wrap_angle(cur.gamma - prev_raw.gamma),
                   prev.beta + wrap_angle(cur.beta - prev_raw.beta),
                   prev.alpha + wrap_angle(cur.alpha - prev_raw.alpha)});
  }
  return out;
}

inline std::vector<TimedDisplacement>
trajectory_from_angle_series(std::span<const TimedAngles> series, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("trajectory_from_angle_series: radius must be positive");
  std::vector<EulerAngles> raw;
  raw.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i].t))
      throw MalformedInput("trajectory_from_angle_series: non-finite time at row " + std::to_string(i));
    if (i > 0 && !(series[i].t > series[i - 1].t))
      throw MalformedInput("trajectory_from_angle_series: timestamps not strictly increasing at row " +
                           std::to_string(i));
    raw.push_back(series[i].angles);
  }
  const auto unwrapped = unwrap_angles(raw);
  std::vector<TimedDisplacement> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    out.push_back({series[i].t, contact_displacement(unwrapped[i], unwrapped[0], radius)});
  return out;
}

} // namespace monoroll
