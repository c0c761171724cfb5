#include "btsc/bus_network.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "json.hpp"

namespace btsc {

namespace {

using nlohmann::json;

bool is_endpoint(const StreetGraph& map, std::size_t street, std::size_t node) {
  return map.endpoint_a_index(street) == node || map.endpoint_b_index(street) == node;
}

}  // namespace

std::vector<WalkLeg> orient_walk(const StreetGraph& map, const BusLine& line) {
  if (line.trajectory.empty()) {
    throw ValidationError("line '" + line.id + "' has an empty trajectory");
  }
  std::vector<std::size_t> idx;
  idx.reserve(line.trajectory.size());
  for (const StreetId& sid : line.trajectory) {
    if (!map.has_street(sid)) {
      throw ValidationError("line '" + line.id + "' references unknown street '" + sid + "'");
    }
    idx.push_back(map.street_index(sid));
  }

  std::vector<WalkLeg> legs(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) legs[i].street = idx[i];

  if (idx.size() == 1) {
    legs[0].direction = Direction::Forward;
    return legs;
  }

  // Pick the first leg's sense so that it exits onto a shared endpoint with
  // the second street; every later leg enters where its predecessor exited.
  std::size_t first = idx[0];
  std::size_t second = idx[1];
  std::size_t exit0;
  if (first == second) {
    exit0 = map.endpoint_b_index(first);  // back-and-forth start; fixed choice
  } else if (is_endpoint(map, second, map.endpoint_b_index(first))) {
    exit0 = map.endpoint_b_index(first);
  } else if (is_endpoint(map, second, map.endpoint_a_index(first))) {
    exit0 = map.endpoint_a_index(first);
  } else {
    throw ValidationError("line '" + line.id + "': streets '" + line.trajectory[0] + "' and '" +
                          line.trajectory[1] + "' do not adjoin");
  }
  legs[0].direction =
      exit0 == map.endpoint_b_index(first) ? Direction::Forward : Direction::Backward;

  std::size_t entry = exit0;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    std::size_t s = idx[i];
    if (map.endpoint_a_index(s) == entry) {
      legs[i].direction = Direction::Forward;
      entry = map.endpoint_b_index(s);
    } else if (map.endpoint_b_index(s) == entry) {
      legs[i].direction = Direction::Backward;
      entry = map.endpoint_a_index(s);
    } else {
      throw ValidationError("line '" + line.id + "': streets '" + line.trajectory[i - 1] +
                            "' and '" + line.trajectory[i] + "' do not adjoin");
    }
  }
  return legs;
}

std::pair<std::size_t, std::size_t> walk_terminals(const StreetGraph& map, const BusLine& line) {
  std::vector<WalkLeg> legs = orient_walk(map, line);
  return {map.entry_node(legs.front().street, legs.front().direction),
          map.exit_node(legs.back().street, legs.back().direction)};
}

double line_length(const StreetGraph& map, const BusLine& line) {
  double total = 0.0;
  for (const StreetId& sid : line.trajectory) {
    total += map.street(sid).length;
  }
  return total;
}

std::vector<std::string> validate_lines(const StreetGraph& map,
                                        const std::vector<BusLine>& lines) {
  std::vector<std::string> warnings;
  std::set<LineId> ids;
  for (const BusLine& line : lines) {
    if (!ids.insert(line.id).second) {
      throw ValidationError("duplicate line id '" + line.id + "'");
    }
    orient_walk(map, line);
    std::set<StreetId> unique(line.trajectory.begin(), line.trajectory.end());
    if (unique.size() != line.trajectory.size()) {
      warnings.push_back("line '" + line.id +
                         "' repeats streets; its per-street probabilities sum below 1");
    }
  }
  return warnings;
}

LineCoverage::LineCoverage(const StreetGraph& map, const std::vector<BusLine>& lines)
    : map_(&map), lines_(lines) {
  validate_lines(map, lines_);
  std::sort(lines_.begin(), lines_.end(),
            [](const BusLine& a, const BusLine& b) { return a.id < b.id; });
  through_.resize(map.street_count());
  for (int li = 0; li < static_cast<int>(lines_.size()); ++li) {
    std::set<std::size_t> streets;
    for (const StreetId& sid : lines_[li].trajectory) {
      streets.insert(map.street_index(sid));
    }
    for (std::size_t s : streets) {
      through_[s].push_back(li);
    }
  }
}

int LineCoverage::count_through_both(std::size_t i, std::size_t j) const {
  const auto& a = through_[i];
  const auto& b = through_[j];
  int count = 0;
  auto it_a = a.begin();
  auto it_b = b.begin();
  while (it_a != a.end() && it_b != b.end()) {
    if (*it_a < *it_b) {
      ++it_a;
    } else if (*it_b < *it_a) {
      ++it_b;
    } else {
      ++count;
      ++it_a;
      ++it_b;
    }
  }
  return count;
}

double prob_bus_on_street(const StreetGraph& map, const BusLine& line, const StreetId& street) {
  const Street& s = map.street(street);  // throws on unknown street
  bool passes = std::find(line.trajectory.begin(), line.trajectory.end(), street) !=
                line.trajectory.end();
  if (!passes) return 0.0;
  return s.length / line_length(map, line);
}

double prob_street(const LineCoverage& coverage, const StreetId& street) {
  if (coverage.total_lines() == 0) {
    throw ValidationError("no bus lines defined");
  }
  const StreetGraph& map = coverage.map();
  std::size_t idx = map.street_index(street);
  double sum = 0.0;
  for (int li : coverage.lines_through(idx)) {
    sum += prob_bus_on_street(map, coverage.lines_by_id()[li], street);
  }
  return sum / coverage.total_lines();
}

double edge_weight(double p_r) {
  if (p_r > 0.0) return 1.0 / p_r;
  return kMaxWeight;
}

RoutingGraph::RoutingGraph(const StreetGraph& map, std::vector<double> weights)
    : map_(&map), weights_(std::move(weights)) {
  if (weights_.size() != map.street_count()) {
    throw ValidationError("routing graph weight count does not match street count");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0)) {
      throw ValidationError("street '" + map.street_at(i).id + "' has non-positive weight");
    }
  }
}

RoutingGraph build_routing_graph(const StreetGraph& map, const std::vector<BusLine>& lines) {
  std::vector<double> weights(map.street_count(), kMaxWeight);
  if (!lines.empty()) {
    LineCoverage coverage(map, lines);
    for (std::size_t s = 0; s < map.street_count(); ++s) {
      weights[s] = edge_weight(prob_street(coverage, map.street_at(s).id));
    }
  } else {
    validate_lines(map, lines);
  }
  return RoutingGraph(map, std::move(weights));
}

double street_consistency(const LineCoverage& coverage, const StreetId& i, const StreetId& j) {
  const StreetGraph& map = coverage.map();
  std::size_t si = map.street_index(i);
  std::size_t sj = map.street_index(j);
  if (si == sj) {
    throw std::invalid_argument("street consistency of '" + i + "' with itself is undefined");
  }
  if (!map.streets_adjacent(si, sj)) {
    throw std::invalid_argument("streets '" + i + "' and '" + j + "' do not adjoin");
  }
  int n_i = coverage.count_through(si);
  if (n_i == 0) return 0.0;  // a street no line enters hands nothing on
  return static_cast<double>(coverage.count_through_both(si, sj)) / n_i;
}

double path_consistency(const LineCoverage& coverage, std::span<const StreetId> path) {
  if (path.size() < 2) {
    throw std::invalid_argument("path consistency needs at least two streets");
  }
  double sum = 0.0;
  double product = 1.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    double psc = street_consistency(coverage, path[i], path[i + 1]);
    sum += psc;
    product *= psc;
  }
  double transitions = static_cast<double>(path.size() - 1);
  return sum / transitions + product;
}

LinesFile load_lines(const StreetGraph& map, const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("lines file is not valid JSON: ") + e.what());
  }

  LinesFile out;
  try {
    for (const auto& entry : doc.at("lines")) {
      BusLine line;
      line.id = entry.at("id").get<std::string>();
      for (const auto& sid : entry.at("streets")) {
        line.trajectory.push_back(sid.get<std::string>());
      }
      line.headway_s = entry.value("headway_s", 60.0);
      out.lines.push_back(std::move(line));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("lines file has unexpected shape: ") + e.what());
  }
  out.warnings = validate_lines(map, out.lines);
  return out;
}

std::string save_lines(const std::vector<BusLine>& lines) {
  json doc;
  doc["lines"] = json::array();
  for (const BusLine& line : lines) {
    json entry;
    entry["id"] = line.id;
    entry["streets"] = line.trajectory;
    entry["headway_s"] = line.headway_s;
    doc["lines"].push_back(std::move(entry));
  }
  return doc.dump(2);
}

}  // namespace btsc
