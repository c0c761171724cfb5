#include "btsc/routing.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace btsc {

namespace {

using nlohmann::json;

json base_record(const char* event, double now, const Packet& packet) {
  json j;
  j["event"] = event;
  j["t"] = now;
  j["packet"] = packet.id;
  return j;
}

std::vector<StreetId> street_ids(const StreetGraph& map, const std::vector<std::size_t>& path) {
  std::vector<StreetId> ids;
  ids.reserve(path.size());
  for (std::size_t s : path) ids.push_back(map.street_at(s).id);
  return ids;
}

}  // namespace

void EventLog::write(const std::string& line) {
  if (out_ != nullptr) {
    (*out_) << line << '\n';
  }
}

RoutingEngine::RoutingEngine(const World& world_view, RoutingGraph routing_graph,
                             LineCoverage coverage, RoutingParams params, std::ostream* event_out)
    : map_(world_view.map()),
      graph_(std::move(routing_graph)),
      coverage_(std::move(coverage)),
      params_(params),
      discovery_(params.faco, params.hop),
      events_(event_out),
      rng_(world_view.config().seed ^ 0x9e3779b97f4a7c15ull) {
  evaporate_every_ = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(params_.faco.dt_s / world_view.config().tick_s)));
}

Qualification RoutingEngine::qualification_of(const Packet& packet) const {
  return Qualification{packet.path, packet.path_index};
}

int RoutingEngine::total_reroutes() const {
  int total = 0;
  for (const Packet& p : packets_) total += p.reroutes;
  return total;
}

int RoutingEngine::total_failed_forwards() const {
  int total = 0;
  for (const Packet& p : packets_) total += p.failed_forwards;
  return total;
}

void RoutingEngine::plan_for_bus(const World& world, Packet& packet, bool count_reroute) {
  const VehicleState& carrier = world.vehicle(packet.carrier);
  NodeId dst_vertex = nearest_intersection(map_, packet.dst);
  NodeId src_vertex;
  if (count_reroute) {
    // Deviation recovery plans from the vertex the carrier is heading toward.
    src_vertex = map_.node_at(map_.exit_node(carrier.street, carrier.direction)).id;
  } else {
    src_vertex = nearest_intersection(map_, carrier.position);
  }

  packet.path.clear();
  packet.path_index = 0;
  packet.planned_for_street = carrier.street;

  if (src_vertex != dst_vertex) {
    RoutingPath planned;
    try {
      planned = select_routing_path(graph_, coverage_, src_vertex, dst_vertex, params_.k_paths);
    } catch (const std::runtime_error&) {
      expire(world, packet, "no_path");
      return;
    }
    packet.path.reserve(planned.streets.size());
    for (const StreetId& sid : planned.streets) packet.path.push_back(map_.street_index(sid));
  }

  auto pos = std::find(packet.path.begin(), packet.path.end(), carrier.street);
  if (pos != packet.path.end()) {
    packet.path_index = static_cast<std::size_t>(pos - packet.path.begin());
  }

  if (count_reroute) {
    ++packet.reroutes;
    if (events_.enabled()) {
      json j = base_record("reroute", world.now(), packet);
      j["carrier"] = packet.carrier;
      j["path"] = street_ids(map_, packet.path);
      events_.write(j.dump());
    }
  }
}

Packet& RoutingEngine::originate(const World& world, VehicleId src, Vec2 dst) {
  Packet packet;
  packet.id = static_cast<PacketId>(packets_.size());
  packet.src = src;
  packet.dst = dst;
  packet.carrier = src;
  packet.created = world.now();

  const VehicleState& vehicle = world.vehicle(src);
  packets_.push_back(std::move(packet));
  Packet& stored = packets_.back();

  if (events_.enabled()) {
    json j = base_record("originate", world.now(), stored);
    j["src"] = src;
    j["src_kind"] = to_string(vehicle.kind);
    j["dst_x"] = dst.x;
    j["dst_y"] = dst.y;
    j["distance"] = distance(vehicle.position, dst);
    events_.write(j.dump());
  }

  if (vehicle.kind == VehicleKind::Bus) {
    plan_for_bus(world, stored, false);
  }
  // Car sources carry until a bus is in range; planning happens at handoff.
  return stored;
}

bool RoutingEngine::try_deliver(const World& world, Packet& packet) {
  const VehicleState& carrier = world.vehicle(packet.carrier);
  if (distance(carrier.position, packet.dst) > world.config().radius_m) return false;
  packet.state = PacketState::Delivered;
  packet.delivered = world.now() + packet.delay_ledger;
  if (events_.enabled()) {
    json j = base_record("deliver", world.now(), packet);
    j["carrier"] = packet.carrier;
    j["delay"] = packet.end_to_end_delay();
    j["hops"] = packet.hop_count;
    events_.write(j.dump());
  }
  return true;
}

bool RoutingEngine::try_handoff(const World& world, Packet& packet) {
  const VehicleState& carrier = world.vehicle(packet.carrier);
  std::vector<NeighborEntry> neighbors =
      world.neighbors_within(packet.carrier, world.config().radius_m);
  const NeighborEntry* best = nullptr;
  for (const NeighborEntry& entry : neighbors) {
    if (entry.kind != VehicleKind::Bus) continue;
    if (best == nullptr || entry.beacon_distance < best->beacon_distance) best = &entry;
  }
  if (best == nullptr) return false;

  packet.carrier = best->id;
  ++packet.hop_count;
  packet.delay_ledger += params_.hop.per_hop_s();
  if (events_.enabled()) {
    json j = base_record("forward", world.now(), packet);
    j["mode"] = "handoff";
    j["from"] = carrier.id;
    j["to"] = best->id;
    j["to_kind"] = "bus";
    j["to_street"] = map_.street_at(world.vehicle(best->id).street).id;
    j["to_street_pos"] = packet.path_index;
    j["path_index"] = packet.path_index;
    j["hops"] = packet.hop_count;
    events_.write(j.dump());
  }
  // the receiving bus plans the street route; an unreachable place expires
  // the packet here
  plan_for_bus(world, packet, false);
  return true;
}

void RoutingEngine::handle_deviation(const World& world, Packet& packet) {
  if (events_.enabled()) {
    json j = base_record("deviation", world.now(), packet);
    j["carrier"] = packet.carrier;
    j["street"] = map_.street_at(world.vehicle(packet.carrier).street).id;
    events_.write(j.dump());
  }
  plan_for_bus(world, packet, true);
}

RoutingEngine::ForwardOutcome RoutingEngine::try_direct_forward(const World& world,
                                                                Packet& packet) {
  Qualification q = qualification_of(packet);
  std::vector<NeighborEntry> neighbors =
      world.neighbors_within(packet.carrier, world.config().radius_m);
  const VehicleState& carrier = world.vehicle(packet.carrier);
  const bool carrier_on_path = !packet.path.empty() &&
                               packet.path_index < packet.path.size() &&
                               packet.path[packet.path_index] == carrier.street;

  // An executed forward must make strict progress along the path; a bus on
  // the carrier's own street qualifies as a relay but gains nothing, and
  // chasing it every tick would bounce packets inside a bus convoy.
  const NeighborEntry* best = nullptr;
  bool any_qualified = false;
  double best_lt = -1.0;
  std::size_t best_pos = 0;
  for (const NeighborEntry& entry : neighbors) {
    if (entry.kind != VehicleKind::Bus) continue;
    auto pos = q.qualifying_pos(entry.street);
    if (!pos) continue;
    any_qualified = true;
    if (*pos == packet.path_index && carrier_on_path) continue;
    double lt = discovery_.entry_link_lifetime(carrier, entry, world.config().radius_m);
    if (best == nullptr || lt > best_lt) {  // id order breaks exact ties
      best = &entry;
      best_lt = lt;
      best_pos = *pos;
    }
  }
  if (best == nullptr) {
    return any_qualified ? ForwardOutcome::QualifiedButHeld : ForwardOutcome::NoQualified;
  }

  VehicleId from = packet.carrier;
  packet.carrier = best->id;
  ++packet.hop_count;
  packet.delay_ledger += params_.hop.per_hop_s();
  std::size_t carrier_street = world.vehicle(best->id).street;
  if (events_.enabled()) {
    json j = base_record("forward", world.now(), packet);
    j["mode"] = "direct";
    j["from"] = from;
    j["to"] = best->id;
    j["to_kind"] = "bus";
    j["to_street"] = map_.street_at(best->street).id;
    j["to_street_pos"] = best_pos;
    j["path_index"] = packet.path_index;
    j["lifetime"] = best_lt;
    j["hops"] = packet.hop_count;
    events_.write(j.dump());
  }
  packet.path_index = best_pos;
  packet.planned_for_street = carrier_street;
  return ForwardOutcome::Forwarded;
}

bool RoutingEngine::run_discovery(const World& world, Packet& packet) {
  if (packet.path.empty()) return false;  // nothing can qualify
  if (world.now() < packet.discovery_cooldown_until) return false;
  std::vector<NeighborEntry> neighbors =
      world.neighbors_within(packet.carrier, world.config().radius_m);
  if (neighbors.empty()) return false;

  // Ants route on the beaconed neighbor view; selection re-derives every hop
  // from true vehicle states, so links inflated by stale beacons fall out
  // here. An unsuccessful round blocks relaunch for the response window.
  Qualification q = qualification_of(packet);
  std::vector<std::vector<VehicleId>> tables =
      discovery_.launch(world, packet.carrier, q, rng_, ant_trace_);
  std::optional<CandidateLink> link = discovery_.select(world, q, tables);
  if (!link) {
    packet.discovery_cooldown_until = world.now() + params_.faco.d_th_s;
    if (!tables.empty()) {
      ++packet.failed_forwards;
      if (events_.enabled()) {
        json j = base_record("failed_forward", world.now(), packet);
        j["carrier"] = packet.carrier;
        j["reason"] = "link_broken";
        events_.write(j.dump());
      }
    }
    return false;
  }

  VehicleId from = packet.carrier;
  VehicleId terminal = link->nodes.back();
  std::size_t terminal_street = world.vehicle(terminal).street;
  std::size_t pos = *q.qualifying_pos(terminal_street);
  const VehicleState& carrier = world.vehicle(packet.carrier);
  if (pos == packet.path_index && !packet.path.empty() &&
      packet.path_index < packet.path.size() &&
      packet.path[packet.path_index] == carrier.street) {
    // the best discovered relay makes no path progress; keep carrying
    packet.discovery_cooldown_until = world.now() + params_.faco.d_th_s;
    return false;
  }

  packet.carrier = terminal;
  ++packet.hop_count;
  packet.delay_ledger += link->delay;
  if (events_.enabled()) {
    json j = base_record("forward", world.now(), packet);
    j["mode"] = "aco";
    j["from"] = from;
    j["to"] = terminal;
    j["to_kind"] = "bus";
    j["to_street"] = map_.street_at(terminal_street).id;
    j["to_street_pos"] = pos;
    j["path_index"] = packet.path_index;
    j["link"] = link->nodes;
    j["lifetime"] = link->lifetime;
    j["link_delay"] = link->delay;
    j["hops"] = packet.hop_count;
    events_.write(j.dump());
  }
  packet.path_index = pos;
  packet.planned_for_street = terminal_street;
  return true;
}

void RoutingEngine::note_carry(const World& world, Packet& packet) {
  if (!packet.was_carrying) {
    packet.was_carrying = true;
    if (events_.enabled()) {
      json j = base_record("carry", world.now(), packet);
      j["carrier"] = packet.carrier;
      events_.write(j.dump());
    }
  }
}

void RoutingEngine::expire(const World& world, Packet& packet, const std::string& reason) {
  packet.state = PacketState::Expired;
  packet.expire_reason = reason;
  if (events_.enabled()) {
    json j = base_record("expire", world.now(), packet);
    j["reason"] = reason;
    events_.write(j.dump());
  }
}

void RoutingEngine::relay_step(const World& world, Packet& packet) {
  if (packet.state != PacketState::InFlight) return;

  if (try_deliver(world, packet)) return;

  const VehicleState& carrier = world.vehicle(packet.carrier);
  if (carrier.kind == VehicleKind::Car) {
    if (!try_handoff(world, packet)) {
      note_carry(world, packet);
    } else {
      packet.was_carrying = false;
    }
    return;
  }

  // Refresh the carrier's position within the path; a street change off the
  // remaining path is a deviation.
  if (!packet.path.empty() && carrier.street != packet.planned_for_street) {
    auto it = std::find(packet.path.begin() + static_cast<std::ptrdiff_t>(packet.path_index),
                        packet.path.end(), carrier.street);
    if (it != packet.path.end()) {
      packet.path_index = static_cast<std::size_t>(it - packet.path.begin());
      packet.planned_for_street = carrier.street;
    } else {
      handle_deviation(world, packet);
      if (packet.state != PacketState::InFlight) return;
    }
  }

  ForwardOutcome outcome = try_direct_forward(world, packet);
  if (outcome == ForwardOutcome::Forwarded) {
    packet.was_carrying = false;
    return;
  }
  // Discovery is the empty-candidate fallback; a qualified-but-held neighbor
  // means the candidate set was non-empty, so the packet simply rides on.
  if (outcome == ForwardOutcome::NoQualified && run_discovery(world, packet)) {
    packet.was_carrying = false;
    return;
  }
  note_carry(world, packet);
}

void RoutingEngine::expire_sweep(const World& world, double deadline) {
  if (!(deadline > 0.0)) throw std::invalid_argument("deadline must be positive");
  for (Packet& packet : packets_) {
    if (packet.state == PacketState::InFlight && world.now() - packet.created > deadline) {
      expire(world, packet, "timeout");
    }
  }
}

void RoutingEngine::step(const World& world) {
  if (world.step_count() - last_evaporation_step_ >= evaporate_every_) {
    discovery_.evaporate_all();
    last_evaporation_step_ = world.step_count();
  }
  for (Packet& packet : packets_) {
    relay_step(world, packet);
  }
  expire_sweep(world, params_.deadline_s);
}

}  // namespace btsc
