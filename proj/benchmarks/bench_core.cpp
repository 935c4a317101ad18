#include <benchmark/benchmark.h>

#include <vector>

#include "advsim/detector.hpp"
#include "advsim/metrics.hpp"
#include "advsim/perception_attack.hpp"
#include "advsim/random.hpp"
#include "advsim/world.hpp"

using namespace advsim;

namespace {

std::vector<VehicleState> traffic(std::size_t n) {
  std::vector<VehicleState> out;
  out.push_back(spawn_vehicle("ego", Route({{0, 0}, {100, 0}}, false), 10.0, Dims{}));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 8.0 + 6.0 * static_cast<double>(i);
    const double y = (i % 2 ? 3.5 : -3.5);
    out.push_back(spawn_vehicle("car" + std::to_string(i), Route({{x, y}, {x + 100, y}}, false), 8.0, Dims{}));
  }
  return out;
}

// Points spread over a car-sized region plus a sparse background.
PointCloud scene_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 4 == 0) {
      c.points.push_back({rng.uniform(1, 60), rng.uniform(-30, 30), rng.uniform(-1.5, 0.5)});
    } else {
      c.points.push_back({rng.uniform(13.0, 17.5), rng.uniform(-0.9, 0.9), rng.uniform(-1.0, 0.6)});
    }
  }
  return c;
}

std::vector<BBox3D> one_box() {
  BBox3D b;
  b.center = {15.25, 0.0, -0.2};
  return {b};
}

}  // namespace

static void BM_Raycast(benchmark::State& state) {
  const auto all = traffic(14);
  SensorSpec s;
  s.channels = static_cast<std::size_t>(state.range(0));
  s.points_per_channel = 360;
  Rng rng(1);
  std::size_t points = 0;
  for (auto _ : state) {
    const auto c = raycast_lidar(all[0], std::span(all).subspan(1), s, rng);
    points = c.size();
    benchmark::DoNotOptimize(points);
  }
  state.counters["points"] = static_cast<double>(points);
}
BENCHMARK(BM_Raycast)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_LossGradient(benchmark::State& state) {
  const DetectorModel m;
  const auto cloud = scene_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const auto gt = one_box();
  for (auto _ : state) benchmark::DoNotOptimize(loss_gradient(m, cloud, gt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossGradient)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_Detect(benchmark::State& state) {
  const DetectorModel m;
  const auto cloud = scene_cloud(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(detect(m, cloud));
}
BENCHMARK(BM_Detect)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_Chamfer(benchmark::State& state) {
  const auto p = scene_cloud(static_cast<std::size_t>(state.range(0)), 4);
  auto q = p;
  for (auto& v : q.points) v.x += 0.03;
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(p, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Chamfer)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

static void BM_Perturb(benchmark::State& state) {
  const SurrogateDetector det;
  const auto cloud = scene_cloud(5000, 5);
  const auto gt = one_box();
  PerturbParams p;
  p.epsilon_m = 0.05;
  p.steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(perturb_attack(det, cloud, gt, p));
}
BENCHMARK(BM_Perturb)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
