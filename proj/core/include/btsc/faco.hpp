#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "btsc/link_model.hpp"
#include "btsc/mobility.hpp"

namespace btsc {

/// Ant-colony discovery parameters. Defaults follow the simulation parameter
/// table: tau0=0.3, delta=0.7, phi=0.6, alpha=8, beta=5, dt=1s, 10 ants,
/// 10 s delay threshold.
struct FacoParams {
  double tau0 = 0.3;    // initial / floor pheromone intensity
  double delta = 0.7;   // heuristic weight in the deposit rule
  double phi = 0.6;     // lifetime weight in heuristic and objective
  double alpha = 8.0;   // pheromone exponent
  double beta = 5.0;    // heuristic exponent
  double dt_s = 1.0;    // evaporation cadence
  int n_ant = 10;       // ants per discovery round
  double d_th_s = 10.0; // delay threshold and response wait window
};

/// Radio hop cost: serialization time plus per-node processing.
struct HopDelayModel {
  double packet_bytes = 1024.0;
  double rate_mbps = 6.0;
  double proc_s = 0.002;

  double per_hop_s() const { return packet_bytes * 8.0 / (rate_mbps * 1e6) + proc_s; }
};

/// The relay qualification: a candidate bus must sit on one of the routing
/// path's streets at or beyond the carrier's position in it.
struct Qualification {
  std::vector<std::size_t> path_streets;  // street indices, in path order
  std::size_t carrier_pos = 0;            // carrier's street position in the path

  /// Position of `street` within the qualified suffix, if any.
  std::optional<std::size_t> qualifying_pos(std::size_t street) const;
};

/// True when the candidate is a bus standing on a street at or beyond the
/// carrier's position in the routing path.
bool qualifies(const VehicleState& candidate, const Qualification& q);
bool qualifies(VehicleKind kind, std::size_t street, const Qualification& q);

/// Link-state heuristic: phi * LT/(1+LT) + (1-phi) / (1+D). An infinite
/// lifetime contributes exactly phi.
double hop_heuristic(double lifetime, double hop_delay, double phi);

/// Ant forwarding distribution over a neighbor set, proportional to
/// tau^alpha * eta^beta. All intensities and heuristics must be positive.
std::vector<double> forward_probabilities(std::span<const double> taus,
                                          std::span<const double> etas, double alpha, double beta);

/// Pheromone deposit rule: (1-delta) * tau + delta * eta.
double deposit(double tau, double eta, double delta);

/// Multi-hop link objective: phi * LT/(1+LT) + (1-phi) / (1+D).
double link_objective(double lifetime, double delay, double phi);

/// Directed pheromone intensities at one vehicle, one value per neighbor
/// link. Reinforcement fixes the per-interval decay factor from the link's
/// lifetime so that exactly lifetime/dt evaporations return the intensity to
/// the floor; a zero lifetime resets immediately and an infinite one never
/// decays. Intensities never drop below the floor.
class PheromoneStore {
 public:
  explicit PheromoneStore(double tau0 = 0.3) : tau0_(tau0) {}

  double floor() const { return tau0_; }
  double intensity(VehicleId neighbor) const;

  /// Applies the deposit rule with heuristic `eta`, then derives the decay
  /// factor from `link_lifetime` and the evaporation cadence `dt`.
  void reinforce(VehicleId neighbor, double eta, double delta, double link_lifetime, double dt);

  /// Sets an intensity directly (tests and explicit seeding).
  void set(VehicleId neighbor, double tau, double link_lifetime, double dt);

  /// One evaporation interval across all links.
  void evaporate_tick();

  std::size_t link_count() const { return links_.size(); }

 private:
  struct Link {
    double tau;
    double decay;  // multiplicative factor applied per interval
  };
  double tau0_;
  std::map<VehicleId, Link> links_;
};

/// A discovered candidate link: carrier, interior cars, terminal bus.
struct CandidateLink {
  std::vector<VehicleId> nodes;
  double lifetime = 0.0;
  double delay = 0.0;
  double objective = 0.0;
};

/// Trace hook for protocol debugging; events are small JSON-ready records.
struct DiscoveryTrace {
  virtual ~DiscoveryTrace() = default;
  virtual void ant_event(const char* what, VehicleId at, int ant, double ttl) = 0;
  virtual void deposit_event(VehicleId node, VehicleId next, double before, double after) {
    (void)node;
    (void)next;
    (void)before;
    (void)after;
  }
};

/// Per-world ant-colony protocol state: the pheromone stores of every
/// vehicle plus the discovery procedure. All state mutation happens in the
/// sequential step loop of the owning engine.
class DiscoveryEngine {
 public:
  DiscoveryEngine(FacoParams params, HopDelayModel hop) : params_(params), hop_(hop) {}

  const FacoParams& params() const { return params_; }
  const HopDelayModel& hop_model() const { return hop_; }

  PheromoneStore& store(VehicleId id);
  const PheromoneStore* find_store(VehicleId id) const;

  void evaporate_all();

  /// Request + discovery + response phases against the current world state:
  /// launches ants, lets qualified buses answer, retraces responses while
  /// depositing pheromone, and returns the deduplicated relay tables found.
  /// Ants walk on the pheromone intensities as of the launch; deposits are
  /// visible to later rounds.
  std::vector<std::vector<VehicleId>> launch(const World& world, VehicleId source,
                                             const Qualification& q, std::mt19937_64& rng,
                                             DiscoveryTrace* trace = nullptr);

  /// Selection phase: re-derives lifetime and delay of every recorded relay
  /// table from the current world state, drops broken or unqualified links
  /// and any exceeding the delay threshold, and returns the objective-best
  /// (ties: shorter delay, then lexicographic node ids).
  std::optional<CandidateLink> select(const World& world, const Qualification& q,
                                      const std::vector<std::vector<VehicleId>>& tables) const;

  /// One-shot discovery: launch and select against the same world state.
  std::optional<CandidateLink> discover(const World& world, VehicleId source,
                                        const Qualification& q, std::mt19937_64& rng,
                                        DiscoveryTrace* trace = nullptr);

  /// Expected lifetime of the directed link from a vehicle to one of its
  /// neighbor-table entries; zero when the pair has drifted out of range.
  double entry_link_lifetime(const VehicleState& viewer, const NeighborEntry& entry,
                             double radius) const;

  /// Expected lifetime between two live vehicle states (selection-time
  /// recompute); zero when out of range.
  double live_link_lifetime(const VehicleState& a, const VehicleState& b, double radius) const;

 private:
  FacoParams params_;
  HopDelayModel hop_;
  std::unordered_map<VehicleId, PheromoneStore> stores_;
};

}  // namespace btsc
