#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "pbdsim/cli/commands.hpp"

namespace {

// SIM_THREADS caps the OpenMP worker count; unset or invalid leaves the default.
void apply_thread_cap() {
  const char* env = std::getenv("SIM_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "warning: ignoring SIM_THREADS='" << env << "' (expected a positive integer)\n";
    return;
  }
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"Position-based-dynamics catheter insertion simulator"};
  app.require_subcommand(1);

  std::string scenario, out_dir, reference, probes, field;
  long long budget = 0;

  auto* run = app.add_subcommand("run", "Run an insertion experiment");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* cal = app.add_subcommand("calibrate", "Fit cluster parameters to a reference curve");
  cal->add_option("scenario", scenario, "Scenario file")->required();
  cal->add_option("--ref", reference, "Reference curve CSV (depth_m,displacement_m)")->required();
  cal->add_option("--budget", budget, "Maximum number of evaluations")->required();
  cal->add_option("--out", out_dir, "Output directory")->required();

  auto* val = app.add_subcommand("validate", "Compare hole-perimeter probes with a reference field");
  val->add_option("scenario", scenario, "Scenario file")->required();
  val->add_option("--probes", probes, "Probe spec file")->required();
  val->add_option("--field", field, "Reference field CSV (x,y,z,dx,dy,dz)")->required();
  val->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pbdsim::cli::kExitConfig;
  }

  if (run->parsed()) return pbdsim::cli::cmd_run(scenario, out_dir, std::cout, std::cerr);
  if (cal->parsed()) return pbdsim::cli::cmd_calibrate(scenario, reference, budget, out_dir, std::cout, std::cerr);
  return pbdsim::cli::cmd_validate(scenario, probes, field, out_dir, std::cout, std::cerr);
}
