#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "monoroll/simulator.hpp"

using namespace monoroll;

namespace {

SimConfig quiet(double duration = 1.0) {
  SimConfig c;
  c.duration = duration;
  c.voltage_profile = {{0.0, 0.0}};
  return c;
}

double state_gap(const SimState& a, const SimState& b) {
  double g = std::abs(a.link_distance - b.link_distance) + std::abs(a.link_rate - b.link_rate) +
             std::abs(a.motor_velocity - b.motor_velocity) + (a.shell_rate - b.shell_rate).norm() +
             std::abs(a.x - b.x) + std::abs(a.y - b.y) +
             std::abs(a.drivetrain.lead_position - b.drivetrain.lead_position);
  return g + a.attitude.angularDistance(b.attitude);
}

} // namespace

TEST(MotorModel, Examples) {
  const RobotParams p;
  const auto m = MotorModel::from_nominal(p, default_no_load_speed);
  EXPECT_EQ(motor_model(0.0, 0.0, p), 0.0);
  EXPECT_NEAR(motor_model(6.0, m.no_load_speed(6.0), m), 0.0, 1e-12);
  EXPECT_NEAR(m.no_load_speed(6.0), default_no_load_speed, 1e-12);
  EXPECT_NEAR(motor_model(6.0, 0.0, m), 62.0 * m.torque_constant * 0.3, 1e-12);
  EXPECT_NEAR(m.stall_torque(6.0), motor_model(6.0, 0.0, p), 1e-15);
  EXPECT_NEAR(torque_from_current(0.3, m), m.stall_torque(6.0), 1e-15);
  // 6 V / (62 * 30 rad/s) = k_t; stall = 62 k_t 0.3 = 0.06 N m.
  EXPECT_NEAR(m.stall_torque(6.0), 0.06, 1e-12);
}

TEST(MotorModel, AffineInVoltageAndSpeed) {
  const RobotParams p;
  EXPECT_NEAR(motor_model(3.0, 5.0, p) + motor_model(1.0, -2.0, p), motor_model(4.0, 3.0, p), 1e-15);
  EXPECT_LT(motor_model(6.0, 40.0, p), 0.0);
}

TEST(SimConfig, ParsesProfile) {
  const auto prof = SimConfig::parse_profile("0:3, 2.5:-3,5:0");
  ASSERT_EQ(prof.size(), 3u);
  EXPECT_EQ(prof[1].t, 2.5);
  EXPECT_EQ(prof[1].volts, -3.0);
  SimConfig c;
  c.voltage_profile = prof;
  EXPECT_EQ(c.voltage_at(0.0), 3.0);
  EXPECT_EQ(c.voltage_at(2.4999), 3.0);
  EXPECT_EQ(c.voltage_at(2.5), -3.0);
  EXPECT_EQ(c.voltage_at(9.0), 0.0);
  EXPECT_THROW(SimConfig::parse_profile("0:3,x"), ConfigError);
  EXPECT_THROW(SimConfig::parse_profile(""), ConfigError);
}

TEST(SimConfig, RequiredKeysAndValidation) {
  EXPECT_THROW(SimConfig::from_config(KeyValueConfig::parse("duration = 1")), ConfigError);
  try {
    SimConfig::from_config(KeyValueConfig::parse("dt = 0\nduration = 1"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "dt");
  }
  try {
    SimConfig::from_config(KeyValueConfig::parse("dt = 0.001\nduration = 1\nvoltage_profile = 1:0, 0:1"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "voltage_profile");
  }
  const auto c = SimConfig::from_config(
      KeyValueConfig::parse("dt = 0.002\nduration = 3\nseed = 9\nrotating_mass = 0.035\nsensor_noise = 0.01"));
  EXPECT_EQ(c.dt, 0.002);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.params.rotating_mass, 0.035);
  EXPECT_EQ(c.sensor_noise, 0.01);
}

TEST(InitialState, IsAStaticEquilibrium) {
  const auto c = quiet();
  const auto s = initial_state(c);
  const RobotParams& p = c.params;
  EXPECT_GT(s.link_distance, c.min_link_distance);
  EXPECT_LT(s.link_distance, p.slider_length);
  // Link mass directly below the centre.
  const Vec3 q = s.rotation() * detail::link_mass_position(s, p);
  EXPECT_NEAR(q.x(), 0.0, 1e-12);
  EXPECT_NEAR(q.y(), 0.0, 1e-12);
  EXPECT_LT(q.z(), 0.0);
  // Spring balances gravity along the bar.
  const double along = p.link_mass() * standard_gravity * s.link_distance / q.norm();
  EXPECT_NEAR(p.total_stiffness * (s.link_distance - p.spring_rest_length), along, 1e-9);
}

TEST(Step, ZeroInputEquilibriumIsFixedPoint) {
  const auto c = quiet();
  auto s = initial_state(c);
  for (int i = 0; i < 1000; ++i) {
    const auto n = step(s, 0.0, c.dt, c);
    ASSERT_LT(state_gap(n, s), 1e-9) << "step " << i;
    s = n;
  }
}

TEST(Step, NoEnergyGainAtZeroInput) {
  auto c = quiet();
  c.initial_link_distance = 0.06;
  auto s = initial_state(c);
  s.shell_rate = Vec3(0.4, -0.3, 0.2);
  double e = mechanical_energy(s, c);
  for (int i = 0; i < 5000; ++i) {
    s = step(s, 0.0, c.dt, c);
    const double en = mechanical_energy(s, c);
    ASSERT_LE(en - e, 1e-6) << "step " << i;
    e = en;
  }
}

TEST(Step, RejectsNonPositiveDt) {
  const auto c = quiet();
  EXPECT_THROW(step(initial_state(c), 0.0, 0.0, c), InvalidArgument);
}

TEST(Step, DivergenceNamesStep) {
  auto c = quiet();
  c.params.total_stiffness = 1e7;
  c.radial_damping = 0.0;
  c.initial_link_distance = 0.1;
  c.voltage_profile = {{0.0, 6.0}};
  auto s = initial_state(c);
  try {
    for (int i = 0; i < 100000; ++i) s = step(s, 6.0, c.dt, c);
    FAIL() << "expected divergence";
  } catch (const Divergence& e) {
    EXPECT_EQ(e.dt(), c.dt);
    EXPECT_NE(std::string(e.what()).find("dt"), std::string::npos);
  }
}

TEST(Run, SingleSampleForZeroDuration) {
  const auto log = run(quiet(0.0));
  ASSERT_EQ(log.samples.size(), 1u);
  EXPECT_EQ(log.truth.size(), 1u);
  EXPECT_EQ(log.torque.size(), 1u);
  EXPECT_EQ(log.samples[0].t, 0.0);
}

TEST(Run, AlignedSeriesOnFixedGrid) {
  SimConfig c;
  c.duration = 0.5;
  const auto log = run(c);
  ASSERT_EQ(log.samples.size(), 501u);
  ASSERT_EQ(log.truth.size(), log.samples.size());
  ASSERT_EQ(log.torque.size(), log.samples.size());
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    EXPECT_EQ(log.samples[i].t, static_cast<double>(i) * c.dt);
    EXPECT_EQ(log.truth[i].t, log.samples[i].t);
    EXPECT_EQ(log.torque[i].t, log.samples[i].t);
  }
}

TEST(Run, DeterministicPerSeedNoiseOnlyOnSensors) {
  SimConfig c;
  c.duration = 1.0;
  c.sensor_noise = 0.01;
  c.seed = 4;
  const auto a = run(c), b = run(c);
  c.seed = 5;
  const auto other = run(c);
  c.sensor_noise = 0.0;
  const auto clean = run(c);
  bool differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].motor_angle, b.samples[i].motor_angle);
    EXPECT_EQ(a.samples[i].accel, b.samples[i].accel);
    EXPECT_EQ(a.samples[i].euler.alpha, b.samples[i].euler.alpha);
    differs |= a.samples[i].accel != other.samples[i].accel;
    EXPECT_EQ(a.truth[i].d_b, clean.truth[i].d_b);
    EXPECT_EQ(a.torque[i].tau, clean.torque[i].tau);
  }
  EXPECT_TRUE(differs);
}

TEST(Run, LeadPositionNeverRetreats) {
  SimConfig c;
  c.duration = 6.0;
  c.voltage_profile = {{0.0, 4.0}, {1.0, -4.0}, {2.0, 5.0}, {3.5, -5.0}, {5.0, 0.0}};
  const auto log = run(c);
  for (std::size_t i = 1; i < log.truth.size(); ++i) EXPECT_GE(log.truth[i].d_a, log.truth[i - 1].d_a);
}

TEST(Run, SymmetricVoltageHoldsLeadWhileNutReverses) {
  SimConfig c;
  c.duration = 2.0;
  c.voltage_profile = {{0.0, 3.0}, {1.0, -3.0}};
  const auto log = run(c);
  // The motor coasts briefly after the flip; from the nut's turning point on
  // the lead stays where it was while the nut winds back.
  std::size_t turn = 0;
  for (std::size_t i = 1; i < log.truth.size(); ++i)
    if (log.truth[i].theta_n > log.truth[turn].theta_n) turn = i;
  ASSERT_GE(turn, 1000u);
  ASSERT_LT(turn, 1500u);
  const double peak_lead = log.truth[turn].d_a;
  EXPECT_GT(peak_lead, log.truth.front().d_a);
  EXPECT_LT(log.truth.back().theta_n, log.truth[turn].theta_n - 1.0);
  for (std::size_t i = turn; i < log.truth.size(); ++i) EXPECT_EQ(log.truth[i].d_a, peak_lead);
}

TEST(Run, ImuReadsGravityAtRest) {
  const auto log = run(quiet(0.2));
  for (const auto& s : log.samples) EXPECT_NEAR(s.accel.norm(), standard_gravity, 1e-9);
}

TEST(Run, TorqueSeriesSatisfiesBalanceAtTruth) {
  // The logged torque closes the balance on the true link distance up to
  // the one-step lag between the gravity angle and the radial update.
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    SimConfig c;
    c.dt = dt;
    c.duration = 1.0;
    const auto log = run(c);
    double worst = 0.0;
    for (std::size_t i = 1; i < log.samples.size(); ++i) {
      const double dd = (log.samples[i].motor_velocity - log.samples[i - 1].motor_velocity) / dt;
      const auto& prev = log.truth[i - 1];
      const RotationMatrix r = rotation_from_euler(log.samples[i - 1].euler);
      const double alpha = gravity_angle(prev.d_a, prev.theta_n, r, c.params.shell_radius);
      worst = std::max(worst, std::abs(torque_balance_residual(c.params, log.truth[i].d_b, dd, alpha,
                                                               log.torque[i].tau, c.params.rotating_mass)));
    }
    EXPECT_LT(worst, 1e-9) << dt;
  }
}

TEST(Run, PeakForceGrowsWithMass) {
  double last = 0.0;
  for (double m : {0.020, 0.035, 0.050, 0.070}) {
    SimConfig c;
    c.duration = 5.0;
    c.params.rotating_mass = m;
    const auto log = run(c);
    double peak = 0.0;
    for (const auto& t : log.truth) peak = std::max(peak, t.force);
    EXPECT_GT(peak, last) << m;
    last = peak;
  }
}

TEST(Run, HalvingDtConvergesAtFirstOrder) {
  auto final_state = [](double dt) {
    SimConfig c;
    c.dt = dt;
    c.duration = 0.5;
    const auto log = run(c);
    return log.truth.back().d_b;
  };
  const double ref = final_state(1.25e-4);
  const double e1 = std::abs(final_state(1e-3) - ref);
  const double e2 = std::abs(final_state(5e-4) - ref);
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 1.5);
  EXPECT_LT(ratio, 3.0);
}
