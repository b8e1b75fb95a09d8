#include <benchmark/benchmark.h>

#include "pbdsim/calibration/scene.hpp"
#include "pbdsim/core/solver.hpp"
#include "pbdsim/geometry/mesh.hpp"

namespace {

using namespace pbdsim;

// Phantom-shaped box sampled at `spacing`, catheter half way in.
struct Fixture {
  calibration::Scene scene;
  core::CapsuleContact contact;

  explicit Fixture(double spacing) {
    calibration::SceneSpec spec;
    calibration::StructureParams p;
    p.name = "tissue";
    p.particle_spacing = spacing;
    p.cluster = {spacing, spacing, 0.002, spacing * 1.01, 0.001};
    spec.table.rows.push_back(p);
    spec.meshes.push_back({"tissue", geometry::make_box_mesh({0.05, 0.0175, 0.0175})});
    spec.pinned_faces = {"xmax", "ymin", "ymax", "zmin"};
    scene = calibration::build_scene(spec);
    contact.rig.start_tip = {0.0, 0.0004, 0.0003};
  }
};

void run(benchmark::State& state, core::ExecPolicy policy) {
  Fixture fx(state.range(0) * 1e-5);
  core::ConstraintSet cs = fx.scene.constraints;
  cs.contact = fx.contact;
  core::Solver solver(cs, fx.scene.system.count());
  core::SimConfig cfg;
  cfg.policy = policy;
  auto sys = fx.scene.system;
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.step(sys, cfg, t));
    t += cfg.dt;
  }
  state.counters["particles"] = static_cast<double>(sys.count());
}

void BM_StepSerial(benchmark::State& state) { run(state, core::ExecPolicy::serial); }
void BM_StepParallel(benchmark::State& state) { run(state, core::ExecPolicy::parallel); }

// Spacing in units of 10 micrometres: 250 = 2.5 mm (980 particles), 115 = 1.15 mm (~10k).
BENCHMARK(BM_StepSerial)->Arg(250)->Arg(115)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StepParallel)->Arg(250)->Arg(115)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
