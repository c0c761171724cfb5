#include "btsc/path_planner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <set>

namespace btsc {

namespace {

// Street-index path with its weight; ordering is (weight, street-id sequence)
// so that enumeration is a deterministic total order.
struct IdxPath {
  std::vector<std::size_t> streets;
  double weight = 0.0;
};

bool lex_less(const StreetGraph& map, const std::vector<std::size_t>& a,
              const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [&](std::size_t x, std::size_t y) { return map.street_at(x).id < map.street_at(y).id; });
}

bool path_less(const StreetGraph& map, const IdxPath& a, const IdxPath& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  return lex_less(map, a.streets, b.streets);
}

// Dijkstra refined to the (weight, lexicographic street ids) total order.
// Labels may be corrected after settling when an equal-weight but
// lexicographically smaller route arrives, so improvements re-queue the
// vertex; positive weights bound the number of corrections.
std::optional<IdxPath> shortest_path(const RoutingGraph& graph, std::size_t src, std::size_t dst,
                                     const std::vector<bool>& banned_street,
                                     const std::vector<bool>& banned_node) {
  const StreetGraph& map = graph.map();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(map.node_count(), inf);
  std::vector<std::vector<std::size_t>> route(map.node_count());

  auto improves = [&](std::size_t node, double w, const std::vector<std::size_t>& streets) {
    if (w < dist[node]) return true;
    if (w > dist[node]) return false;
    return lex_less(map, streets, route[node]);
  };

  using QueueEntry = std::pair<double, std::size_t>;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue;
  dist[src] = 0.0;
  queue.push({0.0, src});

  while (!queue.empty()) {
    auto [d, node] = queue.top();
    queue.pop();
    if (d > dist[node]) continue;  // stale entry
    if (banned_node[node] && node != src) continue;
    for (std::size_t s : map.incident_streets(node)) {
      if (banned_street[s]) continue;
      std::size_t other = map.endpoint_a_index(s) == node ? map.endpoint_b_index(s)
                                                          : map.endpoint_a_index(s);
      if (banned_node[other] && other != dst) continue;
      double w = dist[node] + graph.weight(s);
      std::vector<std::size_t> streets = route[node];
      streets.push_back(s);
      if (improves(other, w, streets)) {
        dist[other] = w;
        route[other] = std::move(streets);
        queue.push({w, other});
      }
    }
  }

  if (dist[dst] == inf) return std::nullopt;
  return IdxPath{route[dst], dist[dst]};
}

std::vector<std::size_t> path_vertices(const StreetGraph& map, std::size_t src,
                                       const std::vector<std::size_t>& streets) {
  std::vector<std::size_t> nodes{src};
  std::size_t at = src;
  for (std::size_t s : streets) {
    at = map.endpoint_a_index(s) == at ? map.endpoint_b_index(s) : map.endpoint_a_index(s);
    nodes.push_back(at);
  }
  return nodes;
}

RoutingPath to_routing_path(const StreetGraph& map, const IdxPath& path, const NodeId& src,
                            const NodeId& dst) {
  RoutingPath out;
  out.streets.reserve(path.streets.size());
  for (std::size_t s : path.streets) out.streets.push_back(map.street_at(s).id);
  out.total_weight = path.weight;
  out.src_vertex = src;
  out.dst_vertex = dst;
  return out;
}

}  // namespace

std::vector<RoutingPath> k_min_weight_paths(const RoutingGraph& graph, const NodeId& src,
                                            const NodeId& dst, int k) {
  const StreetGraph& map = graph.map();
  std::size_t s = map.node_index(src);
  std::size_t t = map.node_index(dst);
  if (s == t) {
    throw std::invalid_argument("path query needs distinct source and destination vertices");
  }
  if (k < 1) {
    throw std::invalid_argument("path count must be at least 1");
  }

  std::vector<bool> no_street(map.street_count(), false);
  std::vector<bool> no_node(map.node_count(), false);

  std::vector<IdxPath> chosen;
  auto first = shortest_path(graph, s, t, no_street, no_node);
  if (!first) return {};
  chosen.push_back(std::move(*first));

  auto candidate_order = [&](const IdxPath& a, const IdxPath& b) { return path_less(map, a, b); };
  std::set<IdxPath, decltype(candidate_order)> candidates(candidate_order);

  while (static_cast<int>(chosen.size()) < k) {
    const IdxPath& prev = chosen.back();
    std::vector<std::size_t> prev_nodes = path_vertices(map, s, prev.streets);

    // Spur from every vertex of the previous path except the destination.
    for (std::size_t spur = 0; spur < prev.streets.size(); ++spur) {
      std::size_t spur_node = prev_nodes[spur];
      std::vector<std::size_t> root(prev.streets.begin(), prev.streets.begin() + spur);
      double root_weight = 0.0;
      for (std::size_t e : root) root_weight += graph.weight(e);

      std::vector<bool> banned_street(map.street_count(), false);
      std::vector<bool> banned_node(map.node_count(), false);
      // Ban the next edge of every chosen path sharing this root.
      for (const IdxPath& p : chosen) {
        if (p.streets.size() > spur &&
            std::equal(root.begin(), root.end(), p.streets.begin())) {
          banned_street[p.streets[spur]] = true;
        }
      }
      // Ban root vertices so spur paths stay loopless.
      for (std::size_t i = 0; i < spur; ++i) banned_node[prev_nodes[i]] = true;

      auto spur_path = shortest_path(graph, spur_node, t, banned_street, banned_node);
      if (!spur_path) continue;

      IdxPath total;
      total.streets = root;
      total.streets.insert(total.streets.end(), spur_path->streets.begin(),
                           spur_path->streets.end());
      total.weight = root_weight + spur_path->weight;
      candidates.insert(std::move(total));
    }

    bool advanced = false;
    while (!candidates.empty()) {
      IdxPath next = *candidates.begin();
      candidates.erase(candidates.begin());
      bool duplicate = std::any_of(chosen.begin(), chosen.end(), [&](const IdxPath& p) {
        return p.streets == next.streets;
      });
      if (!duplicate) {
        chosen.push_back(std::move(next));
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }

  std::vector<RoutingPath> out;
  out.reserve(chosen.size());
  for (const IdxPath& p : chosen) out.push_back(to_routing_path(map, p, src, dst));
  return out;
}

RoutingPath score_path(const LineCoverage& coverage, RoutingPath path) {
  path.ppc = path.streets.size() < 2
                 ? 2.0
                 : path_consistency(coverage, std::span<const StreetId>(path.streets));
  return path;
}

RoutingPath select_routing_path(const RoutingGraph& graph, const LineCoverage& coverage,
                                const NodeId& src, const NodeId& dst, int k) {
  std::vector<RoutingPath> candidates = k_min_weight_paths(graph, src, dst, k);
  if (candidates.empty()) {
    throw std::runtime_error("no path from '" + src + "' to '" + dst + "'");
  }
  std::optional<RoutingPath> best;
  for (RoutingPath& candidate : candidates) {
    RoutingPath scored = score_path(coverage, std::move(candidate));
    if (!best || scored.ppc > best->ppc ||
        (scored.ppc == best->ppc && (scored.total_weight < best->total_weight ||
                                     (scored.total_weight == best->total_weight &&
                                      scored.streets < best->streets)))) {
      best = std::move(scored);
    }
  }
  return *best;
}

NodeId nearest_intersection(const StreetGraph& map, Vec2 pos) {
  if (map.node_count() == 0) {
    throw ValidationError("map has no intersections");
  }
  if (!std::isfinite(pos.x) || !std::isfinite(pos.y)) {
    throw std::invalid_argument("position must be finite");
  }
  const Intersection* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Intersection& node : map.intersections()) {
    double d = norm_squared(node.position - pos);
    if (d < best_d || (d == best_d && best && node.id < best->id)) {
      best = &node;
      best_d = d;
    }
  }
  return best->id;
}

std::pair<NodeId, NodeId> resolve_endpoints(const StreetGraph& map, Vec2 src_pos, Vec2 dst_pos) {
  return {nearest_intersection(map, src_pos), nearest_intersection(map, dst_pos)};
}

}  // namespace btsc
