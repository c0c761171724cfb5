#include "btsc/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace btsc {

namespace {

// Cell key for the beacon broadcast's spatial hash.
std::int64_t cell_key(double coord, double cell) {
  return static_cast<std::int64_t>(std::floor(coord / cell));
}

}  // namespace

World::World(std::shared_ptr<const StreetGraph> map, std::vector<BusLine> lines,
             WorldConfig config)
    : map_(std::move(map)), lines_(std::move(lines)), config_(config), rng_(config.seed) {
  if (!(config_.tick_s > 0.0)) throw ConfigError("tick must be positive");
  if (!(config_.beacon_interval_s > 0.0)) throw ConfigError("beacon interval must be positive");
  if (!(config_.radius_m > 0.0)) throw ConfigError("communication radius must be positive");
  if (config_.speed_min_mps > config_.speed_max_mps || config_.speed_min_mps <= 0.0) {
    throw ConfigError("speed bounds must satisfy 0 < min <= max");
  }
  beacon_every_ = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(config_.beacon_interval_s / config_.tick_s)));
  line_runtime_.reserve(lines_.size());
  for (const BusLine& line : lines_) {
    LineRuntime rt;
    rt.legs = orient_walk(*map_, line);
    rt.headway_s = line.headway_s;
    line_runtime_.push_back(std::move(rt));
  }
}

const VehicleState& World::vehicle(VehicleId id) const {
  if (id >= vehicles_.size()) throw std::out_of_range("unknown vehicle " + std::to_string(id));
  return vehicles_[id];
}

const NeighborTable& World::neighbor_table(VehicleId id) const {
  if (id >= tables_.size()) throw std::out_of_range("unknown vehicle " + std::to_string(id));
  return tables_[id];
}

std::vector<NeighborEntry> World::neighbors_within(VehicleId id, double radius) const {
  const NeighborTable& table = neighbor_table(id);
  std::vector<NeighborEntry> out;
  for (const auto& [nid, entry] : table) {
    if (entry.beacon_distance <= radius) out.push_back(entry);
  }
  return out;
}

void World::refresh_derived(VehicleState& v) {
  v.position = map_->point_at(v.street, v.offset, v.direction);
  if (v.kind == VehicleKind::Bus && v.dwelling(now())) {
    v.velocity = {0.0, 0.0};
  } else {
    v.velocity = map_->direction_vector(v.street, v.direction) * v.speed;
  }
}

VehicleId World::add_vehicle(VehicleKind kind, const StreetId& street, double offset, Direction d,
                             double speed) {
  VehicleState v;
  v.id = static_cast<VehicleId>(vehicles_.size());
  v.kind = kind;
  v.street = map_->street_index(street);
  v.offset = offset;
  v.direction = d;
  v.speed = speed;
  refresh_derived(v);
  vehicles_.push_back(std::move(v));
  tables_.emplace_back();
  return vehicles_.back().id;
}

void World::schedule_bus_fleet(int buses_per_line, double headway_s) {
  if (buses_per_line < 0) throw ConfigError("bus fleet size must be nonnegative");
  for (std::size_t i = 0; i < line_runtime_.size(); ++i) {
    line_runtime_[i].cap = buses_per_line;
    if (headway_s > 0.0) line_runtime_[i].headway_s = headway_s;
    if (!(line_runtime_[i].headway_s > 0.0)) {
      throw ConfigError("line '" + lines_[i].id + "' needs a positive headway");
    }
  }
  fire_departures();
}

void World::fire_departures() {
  for (std::size_t li = 0; li < line_runtime_.size(); ++li) {
    LineRuntime& rt = line_runtime_[li];
    while (rt.spawned < rt.cap &&
           static_cast<double>(rt.next_departure) * rt.headway_s <= now() + 1e-9) {
      spawn_bus(static_cast<int>(li), false);
      ++rt.spawned;
      if (rt.spawned < rt.cap) {
        spawn_bus(static_cast<int>(li), true);
        ++rt.spawned;
      }
      ++rt.next_departure;
    }
  }
}

VehicleId World::spawn_bus(int line_index, bool at_far_terminal) {
  const LineRuntime& rt = line_runtime_[line_index];
  VehicleState v;
  v.id = static_cast<VehicleId>(vehicles_.size());
  v.kind = VehicleKind::Bus;
  v.line = line_index;
  std::uniform_real_distribution<double> speed_dist(config_.speed_min_mps, config_.speed_max_mps);
  v.speed = speed_dist(rng_);
  if (!at_far_terminal) {
    v.legs_forward = true;
    v.leg = 0;
    v.street = rt.legs.front().street;
    v.direction = rt.legs.front().direction;
  } else {
    v.legs_forward = false;
    v.leg = rt.legs.size() - 1;
    v.street = rt.legs.back().street;
    v.direction = opposite(rt.legs.back().direction);
  }
  v.offset = 0.0;
  refresh_derived(v);
  vehicles_.push_back(std::move(v));
  tables_.emplace_back();
  return vehicles_.back().id;
}

void World::spawn_cars(int count) {
  if (count < 0) throw ConfigError("car count must be nonnegative");
  if (count > 0 && map_->street_count() == 0) {
    throw ConfigError("cannot place cars on a map with no streets");
  }
  if (count == 0) return;
  std::uniform_int_distribution<std::size_t> street_dist(0, map_->street_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> speed_dist(config_.speed_min_mps, config_.speed_max_mps);
  for (int i = 0; i < count; ++i) {
    VehicleState v;
    v.id = static_cast<VehicleId>(vehicles_.size());
    v.kind = VehicleKind::Car;
    v.street = street_dist(rng_);
    v.offset = unit(rng_) * map_->street_at(v.street).length;
    v.direction = unit(rng_) < 0.5 ? Direction::Forward : Direction::Backward;
    v.speed = speed_dist(rng_);
    refresh_derived(v);
    vehicles_.push_back(std::move(v));
    tables_.emplace_back();
  }
}

void World::advance_bus_leg(VehicleState& v) {
  const LineRuntime& rt = line_runtime_[v.line];
  if (v.legs_forward) {
    if (v.leg + 1 < rt.legs.size()) {
      ++v.leg;
      v.street = rt.legs[v.leg].street;
      v.direction = rt.legs[v.leg].direction;
    } else {
      v.legs_forward = false;
      v.direction = opposite(v.direction);
      v.dwell_until = now() + config_.terminal_dwell_s;
    }
  } else {
    if (v.leg > 0) {
      --v.leg;
      v.street = rt.legs[v.leg].street;
      v.direction = opposite(rt.legs[v.leg].direction);
    } else {
      v.legs_forward = true;
      v.direction = rt.legs[0].direction;
      v.dwell_until = now() + config_.terminal_dwell_s;
    }
  }
  v.offset = 0.0;
}

void World::choose_next_car_street(VehicleState& v, std::size_t arrival_node) {
  const auto& incident = map_->incident_streets(arrival_node);
  std::vector<std::size_t> options;
  options.reserve(incident.size());
  for (std::size_t s : incident) {
    if (s != v.street) options.push_back(s);
  }
  std::size_t next;
  if (options.empty()) {
    next = v.street;  // dead end: turn around
  } else if (options.size() == 1) {
    next = options[0];
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    next = options[pick(rng_)];
  }
  v.street = next;
  v.direction =
      map_->endpoint_a_index(next) == arrival_node ? Direction::Forward : Direction::Backward;
  v.offset = 0.0;
}

void World::move_vehicle(VehicleState& v) {
  if (v.kind == VehicleKind::Bus && v.line < 0) {
    // manually placed bus: glides along its street and stops at the end
    double remaining = v.speed * config_.tick_s;
    double room = map_->street_at(v.street).length - v.offset;
    v.offset += std::min(remaining, room);
    refresh_derived(v);
    return;
  }
  if (v.kind == VehicleKind::Bus && v.dwelling(now())) {
    refresh_derived(v);
    return;
  }

  double remaining = v.speed * config_.tick_s;
  while (remaining > 0.0) {
    double room = map_->street_at(v.street).length - v.offset;
    if (remaining < room) {
      v.offset += remaining;
      remaining = 0.0;
      break;
    }
    remaining -= room;
    std::size_t arrival = map_->exit_node(v.street, v.direction);
    if (v.kind == VehicleKind::Bus) {
      advance_bus_leg(v);
      if (v.dwelling(now())) {
        remaining = 0.0;  // parked at the terminal; leftover distance lapses
      }
    } else {
      choose_next_car_street(v, arrival);
    }
  }
  refresh_derived(v);
}

void World::broadcast_beacons() {
  const double radius = config_.radius_m;
  const double r2 = radius * radius;

  std::unordered_map<std::int64_t, std::vector<VehicleId>> cells;
  cells.reserve(vehicles_.size() * 2);
  auto key_of = [&](Vec2 p) {
    return cell_key(p.x, radius) * 0x100000001LL + cell_key(p.y, radius);
  };
  for (const VehicleState& v : vehicles_) {
    cells[key_of(v.position)].push_back(v.id);
  }

  double t = now();
  for (VehicleState& v : vehicles_) {
    v.own_stats.push(norm(v.velocity));
  }
  for (const VehicleState& receiver : vehicles_) {
    NeighborTable& table = tables_[receiver.id];
    std::int64_t cx = cell_key(receiver.position.x, radius);
    std::int64_t cy = cell_key(receiver.position.y, radius);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = cells.find((cx + dx) * 0x100000001LL + (cy + dy));
        if (it == cells.end()) continue;
        for (VehicleId sender_id : it->second) {
          if (sender_id == receiver.id) continue;
          const VehicleState& sender = vehicles_[sender_id];
          double d2 = norm_squared(sender.position - receiver.position);
          if (d2 > r2) continue;
          NeighborEntry& entry = table[sender_id];
          entry.id = sender_id;
          entry.kind = sender.kind;
          entry.position = sender.position;
          entry.velocity = sender.velocity;
          entry.street = sender.street;
          entry.last_seen = t;
          entry.beacon_distance = std::sqrt(d2);
          entry.stats.push(norm(sender.velocity));
        }
      }
    }
  }
}

void World::expire_neighbors() {
  double t = now();
  for (NeighborTable& table : tables_) {
    for (auto it = table.begin(); it != table.end();) {
      if (t - it->second.last_seen > config_.neighbor_expiry_s) {
        it = table.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void World::prime_beacons() {
  broadcast_beacons();
  expire_neighbors();
}

void World::step() {
  ++step_count_;
  fire_departures();
  for (VehicleState& v : vehicles_) {
    move_vehicle(v);
  }
  if ((step_count_ - 1) % beacon_every_ == 0) {
    broadcast_beacons();
  }
  expire_neighbors();
}

}  // namespace btsc
