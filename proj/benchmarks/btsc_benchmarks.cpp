#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "btsc/experiment.hpp"
#include "btsc/faco.hpp"
#include "btsc/path_planner.hpp"

namespace {

using namespace btsc;

void BM_GenerateGrid(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_grid(n, n, 500.0));
  }
}
BENCHMARK(BM_GenerateGrid)->Arg(8)->Arg(16)->Arg(32);

void BM_BuildRoutingGraph(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  StreetGraph map = generate_grid(n, n, 500.0);
  std::vector<BusLine> lines = make_synthetic_lines(map, n, n, n, 60.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_routing_graph(map, lines));
  }
}
BENCHMARK(BM_BuildRoutingGraph)->Arg(8)->Arg(16);

void BM_KMinWeightPaths(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  StreetGraph map = generate_grid(n, n, 500.0);
  std::vector<BusLine> lines = make_synthetic_lines(map, n, n, n, 60.0);
  RoutingGraph rg = build_routing_graph(map, lines);
  NodeId src = grid_node_id(0, 0);
  NodeId dst = grid_node_id(n - 1, n - 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(k_min_weight_paths(rg, src, dst, 5));
  }
}
BENCHMARK(BM_KMinWeightPaths)->Arg(8)->Arg(16);

void BM_LinkReliability(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mu(-5.0, 8.0);
  std::uniform_real_distribution<double> sigma(0.3, 6.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(link_reliability(60.0, mu(rng), sigma(rng), 200.0));
  }
}
BENCHMARK(BM_LinkReliability);

void BM_WorldStep(benchmark::State& state) {
  auto map = std::make_shared<const StreetGraph>(generate_grid(8, 8, 500.0));
  std::vector<BusLine> lines = make_synthetic_lines(*map, 8, 8, 6, 60.0);
  WorldConfig wc;
  wc.seed = 1;
  World world(map, lines, wc);
  world.schedule_bus_fleet(7, 60.0);
  world.spawn_cars(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    world.step();
  }
}
BENCHMARK(BM_WorldStep)->Arg(100)->Arg(300)->Arg(600);

void BM_Discover(benchmark::State& state) {
  auto map = std::make_shared<const StreetGraph>(generate_grid(4, 4, 300.0));
  WorldConfig wc;
  wc.radius_m = 250.0;
  wc.seed = 2;
  World world(map, {}, wc);
  VehicleId src = world.add_vehicle(VehicleKind::Bus, "h0_0", 0.0, Direction::Forward, 0.0);
  std::mt19937_64 placement(7);
  for (int i = 0; i < 30; ++i) {
    world.add_vehicle(VehicleKind::Car, "h0_" + std::to_string(placement() % 3),
                      static_cast<double>(placement() % 300), Direction::Forward,
                      3.0 + static_cast<double>(placement() % 8));
  }
  world.add_vehicle(VehicleKind::Bus, "h0_2", 100.0, Direction::Forward, 5.0);
  world.prime_beacons();
  Qualification q{{map->street_index("h0_0"), map->street_index("h0_1"),
                   map->street_index("h0_2")},
                  0};
  DiscoveryEngine aco{FacoParams{}, HopDelayModel{}};
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aco.discover(world, src, q, rng));
  }
}
BENCHMARK(BM_Discover);

void BM_RunScenario(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.grid_rows = 4;
  cfg.grid_cols = 4;
  cfg.synthetic_lines = 3;
  cfg.buses_per_line = 3;
  cfg.cars = 60;
  cfg.duration_s = 60.0;
  cfg.deadline_s = 30.0;
  cfg.packet_count = 20;
  cfg.seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg));
  }
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
