#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "btsc/faco.hpp"
#include "btsc/mobility.hpp"
#include "btsc/path_planner.hpp"

namespace btsc {

using PacketId = std::uint64_t;

enum class PacketState { InFlight, Delivered, Expired };

/// A payload descriptor moving through the world by carry-and-forward.
/// The street-sequence routing path is planned when a bus first holds the
/// packet; `path_index` is the qualification lower bound into it. The delay
/// ledger accumulates per-hop transmission delays and is folded into the
/// delivery timestamp.
struct Packet {
  PacketId id = 0;
  VehicleId src = 0;
  Vec2 dst;
  std::vector<std::size_t> path;  // street indices
  std::size_t path_index = 0;
  VehicleId carrier = 0;
  double created = 0.0;
  double delivered = std::numeric_limits<double>::quiet_NaN();
  int hop_count = 0;
  double delay_ledger = 0.0;
  PacketState state = PacketState::InFlight;
  std::string expire_reason;
  int reroutes = 0;
  int failed_forwards = 0;

  // engine bookkeeping
  std::size_t planned_for_street = SIZE_MAX;
  bool was_carrying = false;
  double discovery_cooldown_until = 0.0;

  double end_to_end_delay() const { return delivered - created; }
};

struct RoutingParams {
  int k_paths = 5;
  double deadline_s = 120.0;
  FacoParams faco;
  HopDelayModel hop;
};

/// JSON-lines event sink. Every record carries "event", "t", and "packet";
/// forward records carry enough to re-check the relay qualification.
class EventLog {
 public:
  explicit EventLog(std::ostream* out) : out_(out) {}
  void write(const std::string& line);
  bool enabled() const { return out_ != nullptr; }

 private:
  std::ostream* out_;
};

/// Carry-and-forward packet engine. Buses relay packets along the planned
/// street sequence: a qualified in-range bus with maximal expected link
/// lifetime is preferred; otherwise an ant-colony discovery round looks for
/// a multi-hop link through cars, and failing that the packet rides along.
/// Packets are processed in id order within each step.
class RoutingEngine {
 public:
  RoutingEngine(const World& world_view, RoutingGraph routing_graph, LineCoverage coverage,
                RoutingParams params, std::ostream* event_out = nullptr);

  /// Plans a routing path from the source vehicle's position toward a fixed
  /// destination place. Car sources defer planning until a bus takes the
  /// packet. An unreachable destination expires the packet immediately.
  Packet& originate(const World& world, VehicleId src, Vec2 dst);

  /// Advances every in-flight packet one tick, runs the pheromone
  /// evaporation cadence, and expires packets past their deadline.
  void step(const World& world);

  /// One relay decision for one packet (exposed for tests).
  void relay_step(const World& world, Packet& packet);

  /// Re-plans a deviated packet from its carrier's street head vertex.
  void handle_deviation(const World& world, Packet& packet);

  /// Expires in-flight packets older than `deadline`.
  void expire_sweep(const World& world, double deadline);

  const std::deque<Packet>& packets() const { return packets_; }
  std::deque<Packet>& packets() { return packets_; }

  DiscoveryEngine& discovery() { return discovery_; }
  const RoutingParams& params() const { return params_; }

  /// Optional per-hop protocol trace for discovery rounds.
  void set_ant_trace(DiscoveryTrace* trace) { ant_trace_ = trace; }

  int total_reroutes() const;
  int total_failed_forwards() const;

 private:
  enum class ForwardOutcome { Forwarded, QualifiedButHeld, NoQualified };

  Qualification qualification_of(const Packet& packet) const;
  void plan_for_bus(const World& world, Packet& packet, bool count_reroute);
  bool try_deliver(const World& world, Packet& packet);
  bool try_handoff(const World& world, Packet& packet);
  ForwardOutcome try_direct_forward(const World& world, Packet& packet);
  bool run_discovery(const World& world, Packet& packet);
  void note_carry(const World& world, Packet& packet);
  void expire(const World& world, Packet& packet, const std::string& reason);

  const StreetGraph& map_;
  RoutingGraph graph_;
  LineCoverage coverage_;
  RoutingParams params_;
  DiscoveryEngine discovery_;
  EventLog events_;
  DiscoveryTrace* ant_trace_ = nullptr;
  std::deque<Packet> packets_;
  std::mt19937_64 rng_;
  std::int64_t evaporate_every_ = 10;
  std::int64_t last_evaporation_step_ = 0;
};

}  // namespace btsc
