#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "monoroll/config.hpp"
#include "monoroll/csv.hpp"
#include "monoroll/errors.hpp"
#include "monoroll/estimator.hpp"
#include "monoroll/metrics.hpp"
#include "monoroll/simulator.hpp"

namespace monoroll::harness {

enum ExitCode : int { ok = 0, validation = 1, io = 2, divergence = 3 };

inline EstimatorOptions estimator_options_from_config(const KeyValueConfig& cfg) {
  EstimatorOptions o;
  o.accel_epsilon = cfg.get_double("accel_epsilon", o.accel_epsilon);
  o.eq6_literal = cfg.get_bool("eq6_literal", o.eq6_literal);
  o.force_cutoff_hz = cfg.get_double("force_cutoff_hz", o.force_cutoff_hz);
  o.velocity_cutoff_hz = cfg.get_double("velocity_cutoff_hz", o.velocity_cutoff_hz);
  if (cfg.has("gravity_reference")) {
    const auto& v = cfg.get_string("gravity_reference");
    if (v == "initial") o.gravity_reference = GravityReference::initial_attitude;
    else if (v == "current") o.gravity_reference = GravityReference::current_attitude;
    else throw ConfigError("gravity_reference", "gravity_reference must be 'initial' or 'current'");
  }
  if (!(o.accel_epsilon >= 0.0)) throw ConfigError("accel_epsilon", "accel_epsilon must be >= 0");
  if (!(o.force_cutoff_hz > 0.0)) throw ConfigError("force_cutoff_hz", "force_cutoff_hz must be positive");
  if (!(o.velocity_cutoff_hz >= 0.0))
    throw ConfigError("velocity_cutoff_hz", "velocity_cutoff_hz must be >= 0");
  return o;
}

/// Everything downstream of the simulator for one run.
struct RunOutputs {
  RunEstimate estimate;
  std::vector<TimedDisplacement> trajectory;
  std::vector<ForceSample> forces;
  RunMetrics metrics;
};

inline RunOutputs analyse(std::span<const SensorSample> samples, std::span<const TorqueSample> torque,
                          const RobotParams& params, const EstimatorOptions& opt,
                          std::span<const TruthSample> truth = {}) {
  if (samples.size() < 3) throw MalformedInput("log needs at least 3 samples, got " + std::to_string(samples.size()));
  RunOutputs out;
  out.estimate = estimate_run(samples, params, torque, opt);

  std::vector<TimedAngles> angles;
  std::vector<EulerAngles> raw;
  angles.reserve(samples.size());
  raw.reserve(samples.size());
  for (const auto& s : samples) {
    angles.push_back({s.t, s.euler});
    raw.push_back(s.euler);
  }
  out.trajectory = trajectory_from_angle_series(angles, params.shell_radius);
  out.forces = estimate_force(samples, params.link_mass(), opt.force_cutoff_hz, opt.gravity_reference);
  out.metrics = compute_metrics({out.trajectory, raw, out.forces, out.estimate.estimates, truth});
  return out;
}

inline csv::Writer truth_table(std::span<const TruthSample> truth) {
  csv::Writer w(csv::truth_header);
  for (const auto& s : truth) {
    w.cell(s.t).cell(s.d_b).cell(s.d_a).cell(s.theta_n).cell(s.force);
    w.end_row();
  }
  return w;
}

namespace detail {

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

inline void write_sim(const SimLog& log, const std::filesystem::path& dir) {
  csv::log_table(log.samples).save((dir / "log.csv").string());
  truth_table(log.truth).save((dir / "truth.csv").string());
  csv::torque_table(log.torque).save((dir / "torque.csv").string());
}

inline void write_analysis(const RunOutputs& out, const std::filesystem::path& dir) {
  csv::estimate_table(out.estimate.estimates).save((dir / "estimate.csv").string());
  csv::trajectory_table(out.trajectory).save((dir / "trajectory.csv").string());
  csv::force_table(out.forces).save((dir / "force.csv").string());
}

/// Keys of the simulation config that a params file may carry but the
/// estimator ignores.
inline void skip_simulation_keys(const KeyValueConfig& cfg) {
  for (const char* key : {"dt", "duration", "voltage_profile", "sensor_noise", "seed", "initial_lead",
                          "initial_link_distance", "radial_damping", "roll_damping", "min_link_distance",
                          "no_load_speed"})
    if (cfg.has(key)) (void)cfg.get_string(key);
}

/// Maps the exception currently in flight to an exit code and message.
inline int report(std::ostream& err) {
  try {
    throw;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return io;
  } catch (const Divergence& e) {
    err << "numerical divergence: " << e.what() << '\n';
    return divergence;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  }
}

} // namespace detail

inline int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::ostream& err) {
  try {
    const auto cfg = KeyValueConfig::load(config_path);
    const auto sim = SimConfig::from_config(cfg);
    cfg.reject_unknown();
    const auto log = run(sim);
    detail::ensure_dir(out_dir);
    detail::write_sim(log, out_dir);
    return ok;
  } catch (...) {
    return detail::report(err);
  }
}

inline int cmd_estimate(const std::string& log_path, const std::string& torque_path, const std::string& params_path,
                        const std::string& out_dir, std::ostream& err) {
  try {
    const auto cfg = KeyValueConfig::load(params_path);
    const auto params = RobotParams::from_config(cfg);
    const auto opt = estimator_options_from_config(cfg);
    detail::skip_simulation_keys(cfg);
    cfg.reject_unknown();
    const auto samples = csv::read_log(log_path);
    const auto torque = csv::read_torque(torque_path);
    const auto out = analyse(samples, torque, params, opt);
    detail::ensure_dir(out_dir);
    detail::write_analysis(out, out_dir);
    if (!out.estimate.gaps.empty())
      err << "warning: " << out.estimate.gaps.size() << " sample(s) without an estimate; first at row "
          << out.estimate.gaps.front().index + 1 << ": " << out.estimate.gaps.front().message << '\n';
    return ok;
  } catch (...) {
    return detail::report(err);
  }
}

struct SweepSpec {
  SimConfig base;
  EstimatorOptions estimator;
  std::vector<double> mass_values{0.020, 0.035, 0.050, 0.070};
  std::vector<double> stiffness_values{160.0, 200.0, 300.0};
  int repetitions = 1;

  void validate() const {
    base.validate();
    auto positive_list = [](const char* key, const std::vector<double>& v) {
      if (v.empty()) throw ConfigError(key, std::string(key) + " must not be empty");
      for (double x : v)
        if (!(x > 0.0)) throw ConfigError(key, std::string(key) + " entries must be positive");
    };
    positive_list("mass_values", mass_values);
    positive_list("stiffness_values", stiffness_values);
    if (repetitions < 1) throw ConfigError("repetitions", "repetitions must be >= 1");
  }

  static SweepSpec from_config(const KeyValueConfig& cfg) {
    SweepSpec s;
    s.base = SimConfig::from_config(cfg);
    s.estimator = estimator_options_from_config(cfg);
    s.mass_values = cfg.get_list("mass_values", s.mass_values);
    s.stiffness_values = cfg.get_list("stiffness_values", s.stiffness_values);
    s.repetitions = static_cast<int>(cfg.get_int("repetitions", s.repetitions));
    s.validate();
    return s;
  }
};

struct SweepPoint {
  std::size_t index = 0;
  double mass = 0.0;
  double stiffness = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;
};

struct SweepRow {
  SweepPoint point;
  std::optional<RunMetrics> metrics;
  std::string error;
};

/// Grid in mass-major order; seed = base seed + point index.
inline std::vector<SweepPoint> sweep_points(const SweepSpec& spec) {
  std::vector<SweepPoint> pts;
  for (double m : spec.mass_values)
    for (double k : spec.stiffness_values)
      for (int r = 0; r < spec.repetitions; ++r) {
        SweepPoint p;
        p.index = pts.size();
        p.mass = m;
        p.stiffness = k;
        p.repetition = r;
        p.seed = spec.base.seed + p.index;
        pts.push_back(p);
      }
  return pts;
}

inline SweepRow run_point(const SweepSpec& spec, const SweepPoint& point, const std::filesystem::path& out_dir) {
  SweepRow row{point, std::nullopt, {}};
  try {
    SimConfig cfg = spec.base;
    cfg.params.rotating_mass = point.mass;
    cfg.params.total_stiffness = point.stiffness;
    cfg.seed = point.seed;
    const auto log = run(cfg);
    const auto out = analyse(log.samples, log.torque, cfg.params, spec.estimator, log.truth);
    char name[32];
    std::snprintf(name, sizeof(name), "point_%03zu", point.index);
    const auto dir = out_dir / name;
    detail::ensure_dir(dir);
    detail::write_sim(log, dir);
    detail::write_analysis(out, dir);
    row.metrics = out.metrics;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// Runs every point on up to `workers` threads; rows come back in point order.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir,
                                       unsigned workers = 1) {
  const auto points = sweep_points(spec);
  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = run_point(spec, points[i], out_dir);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline constexpr std::string_view summary_header =
    "point,seed,m,k_s,repetition,path_length,end_displacement,straightness,osc_gamma,osc_beta,osc_alpha,"
    "F_rms,F_peak,db_excursion,db_rel_error,error";

inline csv::Writer summary_table(std::span<const SweepRow> rows) {
  csv::Writer w(summary_header);
  for (const auto& r : rows) {
    w.cell(static_cast<double>(r.point.index)).cell(static_cast<double>(r.point.seed));
    w.cell(r.point.mass).cell(r.point.stiffness).cell(static_cast<double>(r.point.repetition));
    if (r.metrics) {
      const auto& m = *r.metrics;
      w.cell(m.path_length).cell(m.end_displacement).cell(m.straightness);
      w.cell(m.osc_gamma).cell(m.osc_beta).cell(m.osc_alpha);
      w.cell(m.force_rms).cell(m.force_peak).cell(m.db_excursion);
      if (m.db_rel_error) w.cell(*m.db_rel_error);
      else w.empty();
      w.empty();
    } else {
      for (int i = 0; i < 10; ++i) w.empty();
      w.cell(r.error);
    }
    w.end_row();
  }
  return w;
}

inline int cmd_sweep(const std::string& spec_path, const std::string& out_dir, unsigned workers,
                     std::ostream& err) {
  try {
    const auto cfg = KeyValueConfig::load(spec_path);
    const auto spec = SweepSpec::from_config(cfg);
    cfg.reject_unknown();
    detail::ensure_dir(out_dir);
    const auto rows = run_sweep(spec, out_dir, workers);
    summary_table(rows).save((std::filesystem::path(out_dir) / "summary.csv").string());
    for (const auto& r : rows)
      if (!r.error.empty()) err << "point " << r.point.index << " failed: " << r.error << '\n';
    return ok;
  } catch (...) {
    return detail::report(err);
  }
}

} // namespace monoroll::harness
