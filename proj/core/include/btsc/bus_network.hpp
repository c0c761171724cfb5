#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "btsc/street_map.hpp"

namespace btsc {

using LineId = std::string;

/// Streets with no serving line carry this finite sentinel weight so that
/// shortest-path search stays total; any path through such a street is
/// dominated by any fully covered alternative.
inline constexpr double kMaxWeight = 1e12;

/// A bus line: an ordered walk of adjacent streets plus its departure headway.
/// Streets may repeat (looping routes); validation warns on repeats because
/// the per-line street probabilities then sum below one.
struct BusLine {
  LineId id;
  std::vector<StreetId> trajectory;
  double headway_s = 0.0;
};

/// One traversal leg of a line walk: which street, in which sense.
struct WalkLeg {
  std::size_t street = 0;
  Direction direction = Direction::Forward;
};

/// Orients a trajectory into legs such that each leg ends where the next
/// begins. Throws ValidationError when consecutive streets do not adjoin.
std::vector<WalkLeg> orient_walk(const StreetGraph& map, const BusLine& line);

/// The walk's two terminal intersections (entry of the first leg, exit of
/// the last).
std::pair<std::size_t, std::size_t> walk_terminals(const StreetGraph& map, const BusLine& line);

/// Total walk length in meters, counting repeated streets every time.
double line_length(const StreetGraph& map, const BusLine& line);

/// Structural check of a line set against a map. Returns human-readable
/// warnings (currently: repeated streets in a trajectory); throws
/// ValidationError on hard failures.
std::vector<std::string> validate_lines(const StreetGraph& map, const std::vector<BusLine>& lines);

/// Per-street view of which lines pass through it, with line counts used by
/// the street-consistency math. Line sets are kept sorted by line id so
/// results do not depend on input order.
class LineCoverage {
 public:
  LineCoverage(const StreetGraph& map, const std::vector<BusLine>& lines);

  const StreetGraph& map() const { return *map_; }
  int total_lines() const { return static_cast<int>(lines_.size()); }

  /// Lines sorted by id; indices below refer to this ordering.
  const std::vector<BusLine>& lines_by_id() const { return lines_; }

  /// Sorted list of line indices whose trajectory includes the street.
  const std::vector<int>& lines_through(std::size_t street_idx) const {
    return through_[street_idx];
  }
  int count_through(std::size_t street_idx) const {
    return static_cast<int>(through_[street_idx].size());
  }
  /// Number of lines passing through both streets.
  int count_through_both(std::size_t i, std::size_t j) const;

 private:
  const StreetGraph* map_;
  std::vector<BusLine> lines_;
  std::vector<std::vector<int>> through_;
};

/// Probability of one bus line appearing on a street: the street's length
/// over the line's total walk length when the line passes it, else zero.
double prob_bus_on_street(const StreetGraph& map, const BusLine& line, const StreetId& street);

/// Probability of any bus appearing on a street: the mean over all lines of
/// prob_bus_on_street. Throws ValidationError when no lines are defined.
double prob_street(const LineCoverage& coverage, const StreetId& street);

/// Reciprocal weight of a street probability; zero probability maps to the
/// kMaxWeight sentinel.
double edge_weight(double p_r);

/// Street graph annotated with one weight per street. Weights are symmetric
/// by construction (one value per undirected street).
class RoutingGraph {
 public:
  /// Wraps explicit weights; sizes must match, weights must be positive.
  RoutingGraph(const StreetGraph& map, std::vector<double> weights);

  const StreetGraph& map() const { return *map_; }
  double weight(std::size_t street_idx) const { return weights_[street_idx]; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  const StreetGraph* map_;
  std::vector<double> weights_;
};

/// Weights every street by the reciprocal bus-appearance probability.
/// A map with zero lines gets the sentinel weight everywhere.
RoutingGraph build_routing_graph(const StreetGraph& map, const std::vector<BusLine>& lines);

/// Probability of street consistency from street i to adjoining street j:
/// the fraction of lines on i that also pass j. Zero when no line passes i.
/// Asymmetric in general. Throws std::invalid_argument unless the two
/// distinct streets adjoin.
double street_consistency(const LineCoverage& coverage, const StreetId& i, const StreetId& j);

/// Path consistency score: mean of the consecutive street-consistency values
/// plus their product, in [0, 2]. Requires at least two streets with each
/// consecutive pair adjoining.
double path_consistency(const LineCoverage& coverage, std::span<const StreetId> path);

/// Bus-line JSON: `{"lines":[{"id","streets":[...],"headway_s"}]}`.
struct LinesFile {
  std::vector<BusLine> lines;
  std::vector<std::string> warnings;
};
LinesFile load_lines(const StreetGraph& map, const std::string& json_text);
std::string save_lines(const std::vector<BusLine>& lines);

}  // namespace btsc
