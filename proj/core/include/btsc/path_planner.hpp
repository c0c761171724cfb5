#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "btsc/bus_network.hpp"
#include "btsc/street_map.hpp"

namespace btsc {

/// A simple vertex-to-vertex path through the routing graph.
/// `ppc` is NaN until the path has been scored against a line coverage
/// (select_routing_path always returns scored paths). Paths with fewer than
/// two streets have no transitions and score the maximum (2.0) when scored.
struct RoutingPath {
  std::vector<StreetId> streets;
  double total_weight = 0.0;
  double ppc = std::numeric_limits<double>::quiet_NaN();
  NodeId src_vertex;
  NodeId dst_vertex;
};

/// Up to k loopless minimum-weight paths from src to dst, in nondecreasing
/// weight order with ties broken by lexicographic street-id sequence.
/// The returned list is a prefix-stable total order: the first k' entries
/// equal the k' entries of a smaller query. Disconnected endpoints yield an
/// empty list; unknown vertices throw; src == dst throws.
std::vector<RoutingPath> k_min_weight_paths(const RoutingGraph& graph, const NodeId& src,
                                            const NodeId& dst, int k);

/// Fills in the consistency score of a planner path.
RoutingPath score_path(const LineCoverage& coverage, RoutingPath path);

/// Among the k lightest paths, the one with maximal path consistency.
/// Ties break toward lower total weight, then lexicographic street ids.
/// Throws std::runtime_error when no path exists.
RoutingPath select_routing_path(const RoutingGraph& graph, const LineCoverage& coverage,
                                const NodeId& src, const NodeId& dst, int k);

/// Nearest intersections to the two positions (Euclidean, ties broken by
/// intersection id). Throws ValidationError on an empty map and
/// std::invalid_argument on non-finite positions.
std::pair<NodeId, NodeId> resolve_endpoints(const StreetGraph& map, Vec2 src_pos, Vec2 dst_pos);

NodeId nearest_intersection(const StreetGraph& map, Vec2 pos);

}  // namespace btsc
