#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "monoroll/errors.hpp"
#include "monoroll/kinematics.hpp"

namespace monoroll {

struct TimedVec3 {
  double t;
  Vec3 v;
};

/// Second-order Butterworth low-pass section (bilinear, prewarped), in
/// transposed direct form II.
class Biquad {
public:
  static Biquad butterworth_lowpass(double cutoff_hz, double sample_hz) {
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_hz;
    const double cw = std::cos(w0);
    const double alpha = std::sin(w0) / std::numbers::sqrt2; // sin(w0) / (2Q), Q = 1/sqrt(2)
    const double a0 = 1.0 + alpha;
    Biquad f;
    f.b0_ = (1.0 - cw) / 2.0 / a0;
    f.b1_ = (1.0 - cw) / a0;
    f.b2_ = f.b0_;
    f.a1_ = -2.0 * cw / a0;
    f.a2_ = (1.0 - alpha) / a0;
    return f;
  }

  /// Sets the internal state to the steady state for a constant input.
  void settle(double x) {
    z2_ = (b2_ - a2_) * x;
    z1_ = (b1_ - a1_) * x + z2_;
  }

  double operator()(double x) {
    const double y = b0_ * x + z1_;
    z1_ = b1_ * x - a1_ * y + z2_;
    z2_ = b2_ * x - a2_ * y;
    return y;
  }

private:
  double b0_ = 1, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
  double z1_ = 0, z2_ = 0;
};

namespace detail {

/// Mean sample spacing; rejects jitter beyond 1% of it.
inline double uniform_spacing(std::span<const double> t) {
  if (t.size() < 2) throw MalformedInput("zero_phase_lowpass: need at least 2 samples");
  const double mean_dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(mean_dt > 0.0) || !std::isfinite(mean_dt))
    throw MalformedInput("zero_phase_lowpass: timestamps must increase");
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i] - t[i - 1];
    if (std::abs(dt - mean_dt) > 0.01 * mean_dt)
      throw MalformedInput("zero_phase_lowpass: non-uniform sampling at row " + std::to_string(i));
  }
  return mean_dt;
}

inline std::vector<double> filtfilt(std::span<const double> x, double cutoff_hz, double sample_hz) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (n == 1) return {x[0]};
  // Odd reflection about each end, three cutoff periods long.
  const auto settle_len = static_cast<std::size_t>(std::ceil(3.0 * sample_hz / cutoff_hz));
  const std::size_t pad = std::min(settle_len, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

  auto f = Biquad::butterworth_lowpass(cutoff_hz, sample_hz);
  f.settle(ext.front());
  for (double& v : ext) v = f(v);

  auto b = Biquad::butterworth_lowpass(cutoff_hz, sample_hz);
  b.settle(ext.back());
  for (auto it = ext.rbegin(); it != ext.rend(); ++it) *it = b(*it);

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

inline void check_cutoff(double cutoff_hz, double sample_hz) {
  if (!(cutoff_hz > 0.0) || !std::isfinite(cutoff_hz))
    throw InvalidArgument("zero_phase_lowpass: cutoff must be positive");
  if (!(cutoff_hz < 0.5 * sample_hz))
    throw InvalidArgument("zero_phase_lowpass: cutoff must be below Nyquist");
}

} // namespace detail

/// Forward-backward Butterworth low-pass on a scalar series sampled at `t`.
inline std::vector<double> zero_phase_lowpass(std::span<const double> t, std::span<const double> x,
                                              double cutoff_hz) {
  if (t.size() != x.size()) throw MalformedInput("zero_phase_lowpass: length mismatch");
  const double fs = 1.0 / detail::uniform_spacing(t);
  detail::check_cutoff(cutoff_hz, fs);
  return detail::filtfilt(x, cutoff_hz, fs);
}

/// Componentwise forward-backward low-pass of a 3-vector series.
inline std::vector<TimedVec3> zero_phase_lowpass(std::span<const TimedVec3> series, double cutoff_hz) {
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) t[i] = series[i].t;
  const double fs = 1.0 / detail::uniform_spacing(t);
  detail::check_cutoff(cutoff_hz, fs);

  std::vector<TimedVec3> out(series.begin(), series.end());
  std::vector<double> channel(series.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < series.size(); ++i) channel[i] = series[i].v[c];
    const auto filtered = detail::filtfilt(channel, cutoff_hz, fs);
    for (std::size_t i = 0; i < series.size(); ++i) out[i].v[c] = filtered[i];
  }
  return out;
}

} // namespace monoroll
