#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library code it checks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Geometry>

namespace oracle {

/// Rz(gamma) * Ry(beta) * Rx(alpha) composed from three axis rotations.
inline Eigen::Matrix3d compose_zyx(double gamma, double beta, double alpha) {
  return (Eigen::AngleAxisd(gamma, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(beta, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(alpha, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

/// Smallest root of f on (lo, hi] found by a uniform sign-change scan and
/// bisection of the first bracketing cell.
template <class F>
std::optional<double> smallest_root(F f, double lo, double hi, int cells = 4000, int iters = 200) {
  double a = lo;
  double fa = f(a);
  for (int i = 1; i <= cells; ++i) {
    const double b = lo + (hi - lo) * i / cells;
    const double fb = f(b);
    if (fb == 0.0) return b;
    if ((fa < 0.0) != (fb < 0.0)) {
      double x0 = a, x1 = b, f0 = fa;
      for (int k = 0; k < iters; ++k) {
        const double mid = 0.5 * (x0 + x1);
        if (mid == x0 || mid == x1) break;
        const double fm = f(mid);
        if ((fm < 0.0) == (f0 < 0.0)) {
          x0 = mid;
          f0 = fm;
        } else {
          x1 = mid;
        }
      }
      return 0.5 * (x0 + x1);
    }
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

inline std::vector<double> running_max(const std::vector<double>& v) {
  std::vector<double> out;
  double m = -INFINITY;
  for (double x : v) {
    m = std::max(m, x);
    out.push_back(m);
  }
  return out;
}

/// Amplitude and phase of a sinusoid of known frequency by projection
/// onto sin/cos over the given window.
struct Tone {
  double amplitude;
  double phase;
};

inline Tone fit_tone(const std::vector<double>& t, const std::vector<double>& x, double freq_hz, std::size_t first,
                     std::size_t last) {
  double s = 0.0, c = 0.0, ss = 0.0, cc = 0.0, sc = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double w = 2.0 * M_PI * freq_hz * t[i];
    const double si = std::sin(w), co = std::cos(w);
    s += x[i] * si;
    c += x[i] * co;
    ss += si * si;
    cc += co * co;
    sc += si * co;
  }
  // Solve the 2x2 normal equations for x ~ A sin + B cos.
  const double det = ss * cc - sc * sc;
  const double A = (s * cc - c * sc) / det;
  const double B = (c * ss - s * sc) / det;
  return {std::hypot(A, B), std::atan2(B, A)};
}

} // namespace oracle
