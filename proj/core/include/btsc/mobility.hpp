#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "btsc/bus_network.hpp"
#include "btsc/link_model.hpp"
#include "btsc/street_map.hpp"

namespace btsc {

using VehicleId = std::uint32_t;

enum class VehicleKind { Bus, Car };

inline const char* to_string(VehicleKind k) { return k == VehicleKind::Bus ? "bus" : "car"; }

/// Per-vehicle state. Positions and velocities are derived from the street
/// geometry after every step. Buses additionally track where they are in
/// their line walk; `line` is -1 for cars and manually placed test vehicles.
struct VehicleState {
  VehicleId id = 0;
  VehicleKind kind = VehicleKind::Car;
  int line = -1;
  std::size_t street = 0;
  double offset = 0.0;
  Direction direction = Direction::Forward;
  double speed = 0.0;
  Vec2 position;
  Vec2 velocity;
  VelocityStats own_stats;

  // bus walk bookkeeping
  std::size_t leg = 0;
  bool legs_forward = true;
  double dwell_until = -1.0;

  bool dwelling(double now) const { return now < dwell_until; }
};

/// Beacon-derived view of one neighbor. `beacon_distance` is the separation
/// at the moment the latest beacon was received; `stats` accumulates the
/// neighbor's beaconed speeds and is discarded with the entry on expiry.
struct NeighborEntry {
  VehicleId id = 0;
  VehicleKind kind = VehicleKind::Car;
  Vec2 position;
  Vec2 velocity;
  std::size_t street = 0;
  double last_seen = 0.0;
  double beacon_distance = 0.0;
  VelocityStats stats;
};

using NeighborTable = std::map<VehicleId, NeighborEntry>;

struct WorldConfig {
  double tick_s = 0.1;
  double beacon_interval_s = 1.0;
  double neighbor_expiry_s = 3.0;   // three beacon intervals
  double radius_m = 200.0;
  double speed_min_mps = 10.0 / 3.6;
  double speed_max_mps = 40.0 / 3.6;
  double terminal_dwell_s = 10.0;
  std::uint64_t seed = 1;
};

/// Discrete-time world: buses shuttling along their line walks, cars making
/// uniformly random turns, periodic beacons feeding per-vehicle neighbor
/// tables with expiry. A world instance is single-threaded; identical
/// (map, lines, config, seed) inputs replay an identical trajectory.
class World {
 public:
  World(std::shared_ptr<const StreetGraph> map, std::vector<BusLine> lines, WorldConfig config);

  const StreetGraph& map() const { return *map_; }
  const std::vector<BusLine>& lines() const { return lines_; }
  const WorldConfig& config() const { return config_; }

  std::int64_t step_count() const { return step_count_; }
  double now() const { return static_cast<double>(step_count_) * config_.tick_s; }

  /// Registers the per-line departure schedule: one bus leaves each terminal
  /// every headway seconds (starting immediately) until the line carries
  /// `buses_per_line` vehicles. Departures due at the current time fire now.
  void schedule_bus_fleet(int buses_per_line, double headway_s);

  /// Places `count` cars at uniformly random street offsets with uniformly
  /// random constant speeds.
  void spawn_cars(int count);

  /// Advances one tick: fires due departures, moves every vehicle, then on
  /// beacon ticks broadcasts positions and refreshes neighbor tables.
  void step();

  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const VehicleState& vehicle(VehicleId id) const;
  std::size_t vehicle_count() const { return vehicles_.size(); }

  const NeighborTable& neighbor_table(VehicleId id) const;

  /// Unexpired neighbor entries whose beacon-time separation was within
  /// `radius`, ordered by vehicle id. Throws on an unknown vehicle.
  std::vector<NeighborEntry> neighbors_within(VehicleId id, double radius) const;

  /// Test scaffolding: inserts a vehicle at an exact street position without
  /// touching the RNG. Manually placed buses carry no line walk and stand
  /// still unless given a speed.
  VehicleId add_vehicle(VehicleKind kind, const StreetId& street, double offset, Direction d,
                        double speed);

  /// Test scaffolding: runs the beacon + expiry pass at the current time
  /// without moving anything.
  void prime_beacons();

  std::mt19937_64& rng() { return rng_; }

 private:
  struct LineRuntime {
    std::vector<WalkLeg> legs;
    double headway_s = 0.0;
    int cap = 0;
    int spawned = 0;
    std::int64_t next_departure = 0;  // departure index; time = index * headway
  };

  void fire_departures();
  VehicleId spawn_bus(int line_index, bool at_far_terminal);
  void move_vehicle(VehicleState& v);
  void advance_bus_leg(VehicleState& v);
  void choose_next_car_street(VehicleState& v, std::size_t arrival_node);
  void refresh_derived(VehicleState& v);
  void broadcast_beacons();
  void expire_neighbors();

  std::shared_ptr<const StreetGraph> map_;
  std::vector<BusLine> lines_;
  std::vector<LineRuntime> line_runtime_;
  WorldConfig config_;
  std::vector<VehicleState> vehicles_;
  std::vector<NeighborTable> tables_;
  std::mt19937_64 rng_;
  std::int64_t step_count_ = 0;
  std::int64_t beacon_every_ = 10;
};

}  // namespace btsc
