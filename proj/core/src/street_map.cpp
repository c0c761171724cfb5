#include "btsc/street_map.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"

namespace btsc {

namespace {

using nlohmann::json;

std::string describe(const std::string& kind, const std::string& id) {
  return kind + " '" + id + "'";
}

}  // namespace

StreetGraph StreetGraph::build(std::vector<Intersection> intersections,
                               std::vector<StreetSpec> streets) {
  StreetGraph g;
  g.nodes_ = std::move(intersections);
  g.nodes_.shrink_to_fit();

  for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
    auto [it, inserted] = g.node_index_.emplace(g.nodes_[i].id, i);
    if (!inserted) {
      throw ValidationError("duplicate intersection id '" + g.nodes_[i].id + "'");
    }
  }

  g.incidence_.resize(g.nodes_.size());
  std::map<std::pair<std::size_t, std::size_t>, StreetId> seen_pairs;

  for (const StreetSpec& spec : streets) {
    if (g.street_index_.count(spec.id) > 0) {
      throw ValidationError("duplicate street id '" + spec.id + "'");
    }
    auto a_it = g.node_index_.find(spec.a);
    if (a_it == g.node_index_.end()) {
      throw ValidationError(describe("street", spec.id) +
                            " references unknown intersection '" + spec.a + "'");
    }
    auto b_it = g.node_index_.find(spec.b);
    if (b_it == g.node_index_.end()) {
      throw ValidationError(describe("street", spec.id) +
                            " references unknown intersection '" + spec.b + "'");
    }
    if (a_it->second == b_it->second) {
      throw ValidationError(describe("street", spec.id) + " endpoints must be distinct");
    }
    auto pair = std::minmax(a_it->second, b_it->second);
    auto [pair_it, pair_ok] = seen_pairs.emplace(pair, spec.id);
    if (!pair_ok) {
      throw ValidationError(describe("street", spec.id) + " duplicates endpoint pair of " +
                            describe("street", pair_it->second));
    }

    double length = distance(g.nodes_[a_it->second].position, g.nodes_[b_it->second].position);
    if (!(length > 0.0)) {
      throw ValidationError(describe("street", spec.id) + " has non-positive length");
    }

    std::size_t idx = g.streets_.size();
    g.streets_.push_back(Street{spec.id, spec.a, spec.b, length});
    g.street_a_.push_back(a_it->second);
    g.street_b_.push_back(b_it->second);
    g.street_index_.emplace(spec.id, idx);
    g.incidence_[a_it->second].push_back(idx);
    g.incidence_[b_it->second].push_back(idx);
  }
  return g;
}

std::size_t StreetGraph::node_index(const NodeId& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) {
    throw std::out_of_range("unknown intersection '" + id + "'");
  }
  return it->second;
}

std::size_t StreetGraph::street_index(const StreetId& id) const {
  auto it = street_index_.find(id);
  if (it == street_index_.end()) {
    throw std::out_of_range("unknown street '" + id + "'");
  }
  return it->second;
}

bool StreetGraph::streets_adjacent(std::size_t i, std::size_t j) const {
  if (i == j) return false;
  return street_a_[i] == street_a_[j] || street_a_[i] == street_b_[j] ||
         street_b_[i] == street_a_[j] || street_b_[i] == street_b_[j];
}

std::vector<StreetId> StreetGraph::adjacent_streets(const StreetId& id) const {
  std::size_t idx = street_index(id);
  std::set<StreetId> out;
  for (std::size_t node : {street_a_[idx], street_b_[idx]}) {
    for (std::size_t other : incidence_[node]) {
      if (other != idx) out.insert(streets_[other].id);
    }
  }
  return {out.begin(), out.end()};
}

Vec2 StreetGraph::point_at(std::size_t street_idx, double offset, Direction d) const {
  const Street& s = streets_[street_idx];
  if (offset < 0.0 || offset > s.length) {
    throw std::out_of_range("offset " + std::to_string(offset) + " outside street '" + s.id +
                            "' of length " + std::to_string(s.length));
  }
  Vec2 from = nodes_[entry_node(street_idx, d)].position;
  Vec2 to = nodes_[exit_node(street_idx, d)].position;
  return lerp(from, to, offset / s.length);
}

Vec2 StreetGraph::point_at(const StreetId& id, double offset, Direction d) const {
  return point_at(street_index(id), offset, d);
}

Vec2 StreetGraph::direction_vector(std::size_t street_idx, Direction d) const {
  Vec2 from = nodes_[entry_node(street_idx, d)].position;
  Vec2 to = nodes_[exit_node(street_idx, d)].position;
  return (to - from) * (1.0 / streets_[street_idx].length);
}

StreetGraph load_map(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("map file is not valid JSON: ") + e.what());
  }

  std::vector<Intersection> intersections;
  std::vector<StreetSpec> streets;
  try {
    for (const auto& node : doc.at("intersections")) {
      intersections.push_back(Intersection{node.at("id").get<std::string>(),
                                           {node.at("x").get<double>(), node.at("y").get<double>()}});
    }
    for (const auto& street : doc.at("streets")) {
      streets.push_back(StreetSpec{street.at("id").get<std::string>(),
                                   street.at("a").get<std::string>(),
                                   street.at("b").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("map file has unexpected shape: ") + e.what());
  }
  return StreetGraph::build(std::move(intersections), std::move(streets));
}

std::string save_map(const StreetGraph& graph) {
  std::vector<Intersection> nodes = graph.intersections();
  std::sort(nodes.begin(), nodes.end(),
            [](const Intersection& a, const Intersection& b) { return a.id < b.id; });
  std::vector<Street> streets = graph.streets();
  std::sort(streets.begin(), streets.end(),
            [](const Street& a, const Street& b) { return a.id < b.id; });

  json doc;
  doc["intersections"] = json::array();
  for (const auto& n : nodes) {
    doc["intersections"].push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}});
  }
  doc["streets"] = json::array();
  for (const auto& s : streets) {
    doc["streets"].push_back({{"id", s.id}, {"a", s.a}, {"b", s.b}});
  }
  return doc.dump(2);
}

NodeId grid_node_id(int r, int c) {
  return "n" + std::to_string(r) + "_" + std::to_string(c);
}

StreetGraph generate_grid(int rows, int cols, double block) {
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("grid needs at least 2 rows and 2 columns");
  }
  if (!(block > 0.0)) {
    throw std::invalid_argument("grid block length must be positive");
  }

  std::vector<Intersection> nodes;
  nodes.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      nodes.push_back(Intersection{grid_node_id(r, c), {c * block, r * block}});
    }
  }

  std::vector<StreetSpec> streets;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      streets.push_back(StreetSpec{"h" + std::to_string(r) + "_" + std::to_string(c),
                                   grid_node_id(r, c), grid_node_id(r, c + 1)});
    }
  }
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      streets.push_back(StreetSpec{"v" + std::to_string(r) + "_" + std::to_string(c),
                                   grid_node_id(r, c), grid_node_id(r + 1, c)});
    }
  }
  return StreetGraph::build(std::move(nodes), std::move(streets));
}

}  // namespace btsc
