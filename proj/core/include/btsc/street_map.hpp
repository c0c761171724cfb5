#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "btsc/errors.hpp"
#include "btsc/geometry.hpp"

namespace btsc {

using NodeId = std::string;
using StreetId = std::string;

/// Traversal sense of a street: Forward runs from endpoint a to endpoint b.
enum class Direction { Forward, Backward };

inline Direction opposite(Direction d) {
  return d == Direction::Forward ? Direction::Backward : Direction::Forward;
}

struct Intersection {
  NodeId id;
  Vec2 position;
};

/// A straight street segment between two distinct intersections.
/// Length is always the Euclidean distance between the endpoints.
struct Street {
  StreetId id;
  NodeId a;
  NodeId b;
  double length = 0.0;
};

/// Endpoint pair as supplied by a map file, before validation.
struct StreetSpec {
  StreetId id;
  NodeId a;
  NodeId b;
};

/// Static road topology: intersections with planar positions, straight
/// streets, and the incidence relation between them. Immutable after
/// construction; safe for unrestricted concurrent reads.
class StreetGraph {
 public:
  /// Validates and builds the graph. Throws ValidationError naming the
  /// offending element on duplicate ids, dangling endpoints, self-loops,
  /// zero-length streets, or duplicate endpoint pairs.
  static StreetGraph build(std::vector<Intersection> intersections,
                           std::vector<StreetSpec> streets);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t street_count() const { return streets_.size(); }

  const std::vector<Intersection>& intersections() const { return nodes_; }
  const std::vector<Street>& streets() const { return streets_; }

  bool has_node(const NodeId& id) const { return node_index_.count(id) > 0; }
  bool has_street(const StreetId& id) const { return street_index_.count(id) > 0; }

  std::size_t node_index(const NodeId& id) const;
  std::size_t street_index(const StreetId& id) const;

  const Intersection& node_at(std::size_t idx) const { return nodes_[idx]; }
  const Street& street_at(std::size_t idx) const { return streets_[idx]; }
  const Intersection& node(const NodeId& id) const { return nodes_[node_index(id)]; }
  const Street& street(const StreetId& id) const { return streets_[street_index(id)]; }

  /// Street indices incident to an intersection, in street-definition order.
  const std::vector<std::size_t>& incident_streets(std::size_t node_idx) const {
    return incidence_[node_idx];
  }

  std::size_t endpoint_a_index(std::size_t street_idx) const { return street_a_[street_idx]; }
  std::size_t endpoint_b_index(std::size_t street_idx) const { return street_b_[street_idx]; }

  /// Endpoint the given traversal starts from / runs toward.
  std::size_t entry_node(std::size_t street_idx, Direction d) const {
    return d == Direction::Forward ? street_a_[street_idx] : street_b_[street_idx];
  }
  std::size_t exit_node(std::size_t street_idx, Direction d) const {
    return d == Direction::Forward ? street_b_[street_idx] : street_a_[street_idx];
  }

  /// True when the two distinct streets share at least one endpoint.
  bool streets_adjacent(std::size_t i, std::size_t j) const;

  /// All streets sharing at least one endpoint with `id`, excluding itself,
  /// sorted by street id. Throws on an unknown street.
  std::vector<StreetId> adjacent_streets(const StreetId& id) const;

  /// Position `offset` meters along a street in the given traversal sense.
  /// Throws std::out_of_range when the offset falls outside [0, length].
  Vec2 point_at(std::size_t street_idx, double offset, Direction d) const;
  Vec2 point_at(const StreetId& id, double offset, Direction d) const;

  /// Unit vector pointing along the street in the given traversal sense.
  Vec2 direction_vector(std::size_t street_idx, Direction d) const;

 private:
  std::vector<Intersection> nodes_;
  std::vector<Street> streets_;
  std::vector<std::size_t> street_a_;
  std::vector<std::size_t> street_b_;
  std::unordered_map<NodeId, std::size_t> node_index_;
  std::unordered_map<StreetId, std::size_t> street_index_;
  std::vector<std::vector<std::size_t>> incidence_;
};

/// Parses the map JSON `{"intersections":[{"id","x","y"}],"streets":[{"id","a","b"}]}`.
/// Street lengths are computed from endpoint positions, never read.
StreetGraph load_map(const std::string& json_text);

/// Serializes a graph to the map JSON schema with elements sorted by id.
std::string save_map(const StreetGraph& graph);

/// Manhattan grid with rows x cols intersections and block-length streets.
/// Requires rows >= 2, cols >= 2, block > 0.
StreetGraph generate_grid(int rows, int cols, double block);

/// Intersection id used by generate_grid for row r, column c.
NodeId grid_node_id(int r, int c);

}  // namespace btsc
