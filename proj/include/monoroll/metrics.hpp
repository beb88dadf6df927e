#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "monoroll/errors.hpp"
#include "monoroll/estimator.hpp"
#include "monoroll/kinematics.hpp"
#include "monoroll/simulator.hpp"

namespace monoroll {

struct RunMetrics {
  double path_length = 0.0;
  double end_displacement = 0.0;
  double straightness = 0.0; // end_displacement / path_length, 0 for a zero-length path
  double osc_gamma = 0.0;    // half peak-to-peak of the unwrapped angle
  double osc_beta = 0.0;
  double osc_alpha = 0.0;
  double force_rms = 0.0;
  double force_peak = 0.0;
  double db_excursion = 0.0; // mean |d_b - first d_b|
  std::optional<double> db_rel_error; // mean |d_b - truth| / truth
};

/// Aligned per-sample series of one run. `angles` are the raw IMU angles;
/// `truth` may be empty.
struct RunSeries {
  std::span<const TimedDisplacement> trajectory;
  std::span<const EulerAngles> angles;
  std::span<const ForceSample> forces;
  std::span<const std::optional<MassEstimate>> estimates;
  std::span<const TruthSample> truth;
};

inline RunMetrics compute_metrics(const RunSeries& run) {
  const std::size_t n = run.trajectory.size();
  if (n == 0) throw MalformedInput("compute_metrics: empty run");
  if (run.angles.size() != n || run.forces.size() != n || run.estimates.size() != n ||
      (!run.truth.empty() && run.truth.size() != n))
    throw MalformedInput("compute_metrics: series lengths differ");

  RunMetrics m;
  for (std::size_t i = 1; i < n; ++i)
    m.path_length += std::hypot(run.trajectory[i].d.x - run.trajectory[i - 1].d.x,
                                run.trajectory[i].d.y - run.trajectory[i - 1].d.y);
  m.end_displacement = std::hypot(run.trajectory.back().d.x - run.trajectory.front().d.x,
                                  run.trajectory.back().d.y - run.trajectory.front().d.y);
  m.straightness = m.path_length > 0.0 ? std::min(1.0, m.end_displacement / m.path_length) : 0.0;

  const auto unwrapped = unwrap_angles(run.angles);
  auto half_range = [&](auto field) {
    const auto [lo, hi] = std::minmax_element(unwrapped.begin(), unwrapped.end(),
                                              [&](const auto& a, const auto& b) { return field(a) < field(b); });
    return 0.5 * (field(*hi) - field(*lo));
  };
  m.osc_gamma = half_range([](const EulerAngles& a) { return a.gamma; });
  m.osc_beta = half_range([](const EulerAngles& a) { return a.beta; });
  m.osc_alpha = half_range([](const EulerAngles& a) { return a.alpha; });

  double sum_sq = 0.0;
  for (const auto& f : run.forces) {
    sum_sq += f.force * f.force;
    m.force_peak = std::max(m.force_peak, std::abs(f.force));
  }
  m.force_rms = std::sqrt(sum_sq / static_cast<double>(n));

  std::optional<double> first;
  double excursion = 0.0, err = 0.0;
  std::size_t count = 0, err_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = run.estimates[i];
    if (!e) continue;
    if (!first) first = e->d_b;
    excursion += std::abs(e->d_b - *first);
    ++count;
    if (!run.truth.empty() && run.truth[i].d_b > 0.0) {
      err += std::abs(e->d_b - run.truth[i].d_b) / run.truth[i].d_b;
      ++err_count;
    }
  }
  if (count > 0) m.db_excursion = excursion / static_cast<double>(count);
  if (err_count > 0) m.db_rel_error = err / static_cast<double>(err_count);
  return m;
}

} // namespace monoroll
