// Command-line front end: simulate, estimate, sweep.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "monoroll/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spring-coupled spherical rolling robot: simulation and internal-mass estimation"};
  app.require_subcommand(1);

  std::string config, out;
  auto* simulate = app.add_subcommand("simulate", "Run the synthetic plant and write log/truth/torque CSVs");
  simulate->add_option("--config", config, "Simulation config (key = value)")->required();
  simulate->add_option("--out", out, "Output directory")->required();

  std::string log, torque, params;
  auto* estimate = app.add_subcommand("estimate", "Estimate link distance, trajectory and force from a log");
  estimate->add_option("--log", log, "Sensor log CSV")->required();
  estimate->add_option("--torque", torque, "Torque CSV aligned with the log")->required();
  estimate->add_option("--params", params, "Robot parameter file (key = value)")->required();
  estimate->add_option("--out", out, "Output directory")->required();

  std::string spec;
  unsigned workers = 1;
  auto* sweep = app.add_subcommand("sweep", "Mass/stiffness parameter study");
  sweep->add_option("--spec", spec, "Sweep spec (key = value)")->required();
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--workers", workers, "Concurrent sweep points")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : monoroll::harness::validation;
  }

  if (*simulate) return monoroll::harness::cmd_simulate(config, out, std::cerr);
  if (*estimate) return monoroll::harness::cmd_estimate(log, torque, params, out, std::cerr);
  return monoroll::harness::cmd_sweep(spec, out, workers, std::cerr);
}
