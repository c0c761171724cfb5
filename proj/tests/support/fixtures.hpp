#pragma once

#include <memory>
#include <vector>

#include "btsc/bus_network.hpp"
#include "btsc/faco.hpp"
#include "btsc/mobility.hpp"
#include "btsc/street_map.hpp"

namespace btsc::testing {

// Seven-intersection map with exactly three simple routes between the
// bottom-left corner (vS) and the top-right corner (vD):
//   route 1: E1,E5,E7,E8    route 2: E4,E2,E7,E8    route 3: E4,E6,E3,E8
// Four lines give the corridor of route 1 full line continuity, route 2 a
// dead transition, and route 3 no coverage at all.
struct ThreeRouteFixture {
  std::shared_ptr<const StreetGraph> map;
  std::vector<BusLine> lines;
  NodeId src = "vS";
  NodeId dst = "vD";
};

inline ThreeRouteFixture make_three_route_fixture() {
  const double b = 500.0;
  std::vector<Intersection> nodes{
      {"vS", {0, 0}},      // (0,0)
      {"v10", {0, b}},     // one block north of vS
      {"v01", {b, 0}},     // one block east
      {"v02", {2 * b, 0}}, // two blocks east
      {"v11", {b, b}},     // center
      {"v12", {2 * b, b}}, // east-center
      {"vD", {2 * b, 2 * b}},
  };
  std::vector<StreetSpec> streets{
      {"E1", "vS", "v10"},  {"E2", "v01", "v11"}, {"E3", "v02", "v12"}, {"E4", "vS", "v01"},
      {"E5", "v10", "v11"}, {"E6", "v01", "v02"}, {"E7", "v11", "v12"}, {"E8", "v12", "vD"},
  };
  ThreeRouteFixture f;
  f.map = std::make_shared<const StreetGraph>(
      StreetGraph::build(std::move(nodes), std::move(streets)));
  f.lines = {
      BusLine{"LA", {"E1", "E5", "E7", "E8"}, 60.0},
      BusLine{"LB", {"E4", "E1"}, 60.0},
      BusLine{"LC", {"E4", "E2"}, 60.0},
      BusLine{"LD", {"E5", "E7"}, 60.0},
  };
  return f;
}

// Frozen six-vehicle scene for discovery tests: a stationary source bus, a
// car corridor, and two qualified buses reachable only through cars. The
// best link by the objective is source -> c3 -> B1.
struct DiscoveryFixture {
  std::shared_ptr<const StreetGraph> map;
  std::unique_ptr<World> world;
  VehicleId source = 0;
  VehicleId car1 = 0, car2 = 0, car3 = 0;
  VehicleId bus1 = 0, bus2 = 0;
  Qualification qualification;
};

inline DiscoveryFixture make_discovery_fixture(std::uint64_t seed) {
  std::vector<Intersection> nodes{
      {"a", {0, 0}}, {"b", {400, 0}}, {"e", {0, 150}}, {"c", {0, 400}},
      {"f", {140, 150}}, {"g", {400, 150}},
  };
  std::vector<StreetSpec> streets{
      {"sAB", "a", "b"}, {"sAE", "a", "e"}, {"sEC", "e", "c"},
      {"sEF", "e", "f"}, {"sFG", "f", "g"},
  };
  DiscoveryFixture f;
  f.map = std::make_shared<const StreetGraph>(
      StreetGraph::build(std::move(nodes), std::move(streets)));

  WorldConfig wc;
  wc.radius_m = 200.0;
  wc.seed = seed;
  f.world = std::make_unique<World>(f.map, std::vector<BusLine>{}, wc);

  // Placements chosen so the pairwise gaps and closing speeds give link
  // durations in the heuristic's sensitive range.
  f.source = f.world->add_vehicle(VehicleKind::Bus, "sAE", 0.0, Direction::Forward, 0.0);
  f.car1 = f.world->add_vehicle(VehicleKind::Car, "sAB", 195.0, Direction::Forward, 25.0);
  f.car3 = f.world->add_vehicle(VehicleKind::Car, "sAE", 150.0, Direction::Forward, 10.0);
  f.car2 = f.world->add_vehicle(VehicleKind::Car, "sEF", 140.0, Direction::Forward, 8.0);
  f.bus1 = f.world->add_vehicle(VehicleKind::Bus, "sFG", 10.0, Direction::Forward, 0.0);
  f.bus2 = f.world->add_vehicle(VehicleKind::Bus, "sFG", 150.0, Direction::Forward, 12.0);
  f.world->prime_beacons();

  f.qualification.path_streets = {f.map->street_index("sAE"), f.map->street_index("sEF"),
                                  f.map->street_index("sFG")};
  f.qualification.carrier_pos = 0;
  return f;
}

}  // namespace btsc::testing
