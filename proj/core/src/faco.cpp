#include "btsc/faco.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace btsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lifetime_term(double lifetime) {
  if (std::isinf(lifetime)) return 1.0;
  return lifetime / (1.0 + lifetime);
}

}  // namespace

std::optional<std::size_t> Qualification::qualifying_pos(std::size_t street) const {
  for (std::size_t i = carrier_pos; i < path_streets.size(); ++i) {
    if (path_streets[i] == street) return i;
  }
  return std::nullopt;
}

bool qualifies(VehicleKind kind, std::size_t street, const Qualification& q) {
  return kind == VehicleKind::Bus && q.qualifying_pos(street).has_value();
}

bool qualifies(const VehicleState& candidate, const Qualification& q) {
  return qualifies(candidate.kind, candidate.street, q);
}

double hop_heuristic(double lifetime, double hop_delay, double phi) {
  if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("phi must lie in (0, 1)");
  return phi * lifetime_term(lifetime) + (1.0 - phi) / (1.0 + hop_delay);
}

double link_objective(double lifetime, double delay, double phi) {
  return phi * lifetime_term(lifetime) + (1.0 - phi) / (1.0 + delay);
}

std::vector<double> forward_probabilities(std::span<const double> taus,
                                          std::span<const double> etas, double alpha,
                                          double beta) {
  if (taus.empty() || taus.size() != etas.size()) {
    throw std::invalid_argument("forwarding needs matched, non-empty tau/eta sets");
  }
  std::vector<double> weights(taus.size());
  double total = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0) || !(etas[i] > 0.0)) {
      throw std::invalid_argument("pheromone and heuristic values must be positive");
    }
    weights[i] = std::pow(taus[i], alpha) * std::pow(etas[i], beta);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

double deposit(double tau, double eta, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return (1.0 - delta) * tau + delta * eta;
}

double PheromoneStore::intensity(VehicleId neighbor) const {
  auto it = links_.find(neighbor);
  return it == links_.end() ? tau0_ : it->second.tau;
}

void PheromoneStore::set(VehicleId neighbor, double tau, double link_lifetime, double dt) {
  if (tau <= tau0_ || link_lifetime == 0.0) {
    links_.erase(neighbor);  // floor state needs no record
    return;
  }
  double decay;
  if (std::isinf(link_lifetime)) {
    decay = 1.0;
  } else {
    // After theta = lifetime/dt evaporations the intensity must sit exactly
    // on the floor: tau * decay^theta = tau0.
    double theta = link_lifetime / dt;
    decay = std::pow(tau0_ / tau, 1.0 / theta);
  }
  links_[neighbor] = Link{tau, decay};
}

void PheromoneStore::reinforce(VehicleId neighbor, double eta, double delta, double link_lifetime,
                               double dt) {
  set(neighbor, deposit(intensity(neighbor), eta, delta), link_lifetime, dt);
}

void PheromoneStore::evaporate_tick() {
  for (auto it = links_.begin(); it != links_.end();) {
    it->second.tau *= it->second.decay;
    if (it->second.tau <= tau0_ * (1.0 + 1e-9)) {
      it = links_.erase(it);  // reached the floor
    } else {
      ++it;
    }
  }
}

PheromoneStore& DiscoveryEngine::store(VehicleId id) {
  auto it = stores_.find(id);
  if (it == stores_.end()) {
    it = stores_.emplace(id, PheromoneStore(params_.tau0)).first;
  }
  return it->second;
}

const PheromoneStore* DiscoveryEngine::find_store(VehicleId id) const {
  auto it = stores_.find(id);
  return it == stores_.end() ? nullptr : &it->second;
}

void DiscoveryEngine::evaporate_all() {
  for (auto& [id, store] : stores_) store.evaporate_tick();
}

double DiscoveryEngine::entry_link_lifetime(const VehicleState& viewer, const NeighborEntry& entry,
                                            double radius) const {
  Kinematics a{viewer.position, viewer.velocity};
  Kinematics b{entry.position, entry.velocity};
  if (norm_squared(b.position - a.position) > radius * radius) return 0.0;
  double duration = connection_duration(a, b, radius);
  if (std::isinf(duration)) return kInf;
  double reliability = link_reliability(duration, viewer.own_stats, entry.stats, radius);
  return expected_lifetime(duration, reliability);
}

double DiscoveryEngine::live_link_lifetime(const VehicleState& a, const VehicleState& b,
                                           double radius) const {
  Kinematics ka{a.position, a.velocity};
  Kinematics kb{b.position, b.velocity};
  if (norm_squared(kb.position - ka.position) > radius * radius) return 0.0;
  double duration = connection_duration(ka, kb, radius);
  if (std::isinf(duration)) return kInf;
  double reliability = link_reliability(duration, a.own_stats, b.own_stats, radius);
  return expected_lifetime(duration, reliability);
}

std::vector<std::vector<VehicleId>> DiscoveryEngine::launch(const World& world, VehicleId source,
                                                            const Qualification& q,
                                                            std::mt19937_64& rng,
                                                            DiscoveryTrace* trace) {
  const double radius = world.config().radius_m;
  const double hop_delay = hop_.per_hop_s();

  // Heuristic cache per directed pair for this round; pheromone reads use
  // the launch-time snapshot so reinforcements only influence later rounds.
  std::map<std::pair<VehicleId, VehicleId>, double> eta_cache;
  auto eta_of = [&](const VehicleState& at, const NeighborEntry& entry) {
    auto key = std::make_pair(at.id, entry.id);
    auto it = eta_cache.find(key);
    if (it != eta_cache.end()) return it->second;
    double lt = entry_link_lifetime(at, entry, radius);
    double eta = hop_heuristic(lt, hop_delay, params_.phi);
    eta_cache.emplace(key, eta);
    return eta;
  };

  auto tau_of = [&](VehicleId at, VehicleId neighbor) {
    const PheromoneStore* s = find_store(at);
    return s ? s->intensity(neighbor) : params_.tau0;
  };

  // Deposits are gathered and applied after the round so every ant walks the
  // same launch-time pheromone state.
  struct Deposit {
    VehicleId node;
    VehicleId next;
    double eta;
    double lifetime;
  };
  std::vector<Deposit> deposits;
  std::set<std::vector<VehicleId>> found;

  for (int ant = 0; ant < params_.n_ant; ++ant) {
    std::vector<VehicleId> relay{source};
    std::set<VehicleId> visited{source};
    double ttl = params_.d_th_s / 2.0;
    VehicleId at = source;
    if (trace) trace->ant_event("launched", at, ant, ttl);

    while (true) {
      const VehicleState& here = world.vehicle(at);
      std::vector<NeighborEntry> neighbors = world.neighbors_within(at, radius);
      if (neighbors.empty()) {
        if (trace) trace->ant_event("stranded", at, ant, ttl);
        break;
      }
      std::vector<double> taus(neighbors.size());
      std::vector<double> etas(neighbors.size());
      for (std::size_t i = 0; i < neighbors.size(); ++i) {
        taus[i] = tau_of(at, neighbors[i].id);
        etas[i] = eta_of(here, neighbors[i]);
      }
      std::vector<double> probs = forward_probabilities(taus, etas, params_.alpha, params_.beta);
      std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
      const NeighborEntry& chosen = neighbors[pick(rng)];

      ttl -= hop_delay;
      if (ttl < 0.0) {
        if (trace) trace->ant_event("expired", at, ant, ttl);
        break;
      }
      if (visited.count(chosen.id) > 0) {
        if (trace) trace->ant_event("revisit", chosen.id, ant, ttl);
        break;
      }
      relay.push_back(chosen.id);
      visited.insert(chosen.id);
      at = chosen.id;
      if (trace) trace->ant_event("hop", at, ant, ttl);

      if (qualifies(world.vehicle(at), q)) {
        // Response: retrace in reverse, refreshing the heuristic and
        // depositing pheromone toward the responder at every node.
        for (std::size_t i = relay.size() - 1; i-- > 0;) {
          const VehicleState& node = world.vehicle(relay[i]);
          const NeighborTable& table = world.neighbor_table(relay[i]);
          auto entry_it = table.find(relay[i + 1]);
          double lt = entry_it != table.end()
                          ? entry_link_lifetime(node, entry_it->second, radius)
                          : 0.0;
          double eta = hop_heuristic(lt, hop_delay, params_.phi);
          deposits.push_back(Deposit{relay[i], relay[i + 1], eta, lt});
        }
        found.insert(relay);
        if (trace) trace->ant_event("responded", at, ant, ttl);
        break;
      }
    }
  }
  for (const Deposit& d : deposits) {
    PheromoneStore& s = store(d.node);
    double before = s.intensity(d.next);
    s.reinforce(d.next, d.eta, params_.delta, d.lifetime, params_.dt_s);
    if (trace) trace->deposit_event(d.node, d.next, before, s.intensity(d.next));
  }
  return {found.begin(), found.end()};
}

std::optional<CandidateLink> DiscoveryEngine::select(
    const World& world, const Qualification& q,
    const std::vector<std::vector<VehicleId>>& tables) const {
  const double radius = world.config().radius_m;
  const double hop_delay = hop_.per_hop_s();

  std::optional<CandidateLink> best;
  for (const std::vector<VehicleId>& nodes : tables) {
    if (nodes.size() < 2) continue;
    const VehicleState& terminal = world.vehicle(nodes.back());
    if (!qualifies(terminal, q)) continue;

    double lifetime = kInf;
    bool broken = false;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const VehicleState& a = world.vehicle(nodes[i]);
      const VehicleState& b = world.vehicle(nodes[i + 1]);
      if (norm_squared(b.position - a.position) > radius * radius) {
        broken = true;
        break;
      }
      lifetime = std::min(lifetime, live_link_lifetime(a, b, radius));
    }
    if (broken) continue;

    double delay = static_cast<double>(nodes.size() - 1) * hop_delay;
    if (delay > params_.d_th_s) continue;

    CandidateLink link{nodes, lifetime, delay, link_objective(lifetime, delay, params_.phi)};
    if (!best || link.objective > best->objective ||
        (link.objective == best->objective &&
         (link.delay < best->delay || (link.delay == best->delay && link.nodes < best->nodes)))) {
      best = std::move(link);
    }
  }
  return best;
}

std::optional<CandidateLink> DiscoveryEngine::discover(const World& world, VehicleId source,
                                                       const Qualification& q,
                                                       std::mt19937_64& rng,
                                                       DiscoveryTrace* trace) {
  return select(world, q, launch(world, source, q, rng, trace));
}

}  // namespace btsc
