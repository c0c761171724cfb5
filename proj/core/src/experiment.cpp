#include "btsc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"

namespace btsc {

namespace {

using nlohmann::json;

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string slurp_referenced_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open referenced file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string axis_value_label(double value) {
  char buf[64];
  if (value == std::floor(value) && std::abs(value) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", value);
  } else {
    std::snprintf(buf, sizeof(buf), "%g", value);
  }
  return buf;
}

}  // namespace

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "radius") return SweepAxis::Radius;
  if (name == "distance") return SweepAxis::Distance;
  if (name == "density") return SweepAxis::Density;
  throw ConfigError("unknown sweep axis '" + name + "' (expected radius|distance|density)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Radius: return "radius";
    case SweepAxis::Distance: return "distance";
    default: return "density";
  }
}

void ScenarioConfig::validate() const {
  if (map_json.empty()) {
    if (grid_rows < 2 || grid_cols < 2) throw ConfigError("grid needs at least 2x2 intersections");
    if (!(grid_block_m > 0.0)) throw ConfigError("grid block length must be positive");
  }
  if (lines_json.empty() && synthetic_lines < 1) {
    throw ConfigError("at least one bus line is required");
  }
  if (cars < 0) throw ConfigError("car count must be nonnegative");
  if (buses_per_line < 1) throw ConfigError("bus fleet per line must be at least 1");
  if (!(headway_s > 0.0)) throw ConfigError("headway must be positive");
  if (!(tick_s > 0.0)) throw ConfigError("tick must be positive");
  if (!(beacon_interval_s > 0.0)) throw ConfigError("beacon interval must be positive");
  if (!(neighbor_expiry_s > 0.0)) throw ConfigError("neighbor expiry must be positive");
  if (!(radius_m > 0.0)) throw ConfigError("communication radius must be positive");
  if (!(speed_min_kmh > 0.0) || speed_max_kmh < speed_min_kmh) {
    throw ConfigError("speed bounds must satisfy 0 < min <= max");
  }
  if (!(duration_s > 0.0)) throw ConfigError("duration must be positive");
  if (!(deadline_s > 0.0)) throw ConfigError("packet deadline must be positive");
  if (packet_count < 0) throw ConfigError("packet count must be nonnegative");
  if (bucket_lo_m < 0.0 || bucket_hi_m < bucket_lo_m) {
    throw ConfigError("distance band must satisfy 0 <= lo <= hi");
  }
  if (!(bucket_width_m > 0.0)) throw ConfigError("bucket width must be positive");
  if (k_paths < 1) throw ConfigError("candidate path count must be at least 1");
}

ScenarioConfig parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario config is not valid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  static const std::vector<std::string> known{
      "id", "map", "lines", "cars", "buses_per_line", "headway_s", "seed", "tick_s",
      "beacon_interval_s", "neighbor_expiry_s", "radius_m", "speed_min_kmh", "speed_max_kmh",
      "duration_s", "deadline_s", "packets", "k_paths", "faco", "hop"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown scenario key '" + key + "'");
    }
  }

  try {
    cfg.id = doc.value("id", cfg.id);
    if (doc.contains("map")) {
      const json& m = doc["map"];
      if (m.contains("file")) {
        cfg.map_json = slurp_referenced_file(m["file"].get<std::string>());
      } else if (m.contains("json")) {
        cfg.map_json = m["json"].dump();
      } else if (m.contains("grid")) {
        cfg.grid_rows = m["grid"].value("rows", cfg.grid_rows);
        cfg.grid_cols = m["grid"].value("cols", cfg.grid_cols);
        cfg.grid_block_m = m["grid"].value("block_m", cfg.grid_block_m);
      }
    }
    if (doc.contains("lines")) {
      const json& l = doc["lines"];
      if (l.contains("file")) {
        cfg.lines_json = slurp_referenced_file(l["file"].get<std::string>());
      } else if (l.contains("json")) {
        cfg.lines_json = l["json"].dump();
      } else if (l.contains("synthetic")) {
        cfg.synthetic_lines = l["synthetic"].get<int>();
      }
    }
    cfg.cars = doc.value("cars", cfg.cars);
    cfg.buses_per_line = doc.value("buses_per_line", cfg.buses_per_line);
    cfg.headway_s = doc.value("headway_s", cfg.headway_s);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.tick_s = doc.value("tick_s", cfg.tick_s);
    cfg.beacon_interval_s = doc.value("beacon_interval_s", cfg.beacon_interval_s);
    cfg.neighbor_expiry_s = doc.value("neighbor_expiry_s", cfg.neighbor_expiry_s);
    cfg.radius_m = doc.value("radius_m", cfg.radius_m);
    cfg.speed_min_kmh = doc.value("speed_min_kmh", cfg.speed_min_kmh);
    cfg.speed_max_kmh = doc.value("speed_max_kmh", cfg.speed_max_kmh);
    cfg.duration_s = doc.value("duration_s", cfg.duration_s);
    cfg.deadline_s = doc.value("deadline_s", cfg.deadline_s);
    if (doc.contains("packets")) {
      const json& p = doc["packets"];
      cfg.packet_count = p.value("count", cfg.packet_count);
      if (p.contains("distance_band_m")) {
        cfg.bucket_lo_m = p["distance_band_m"].at(0).get<double>();
        cfg.bucket_hi_m = p["distance_band_m"].at(1).get<double>();
      }
      cfg.bucket_width_m = p.value("bucket_width_m", cfg.bucket_width_m);
    }
    cfg.k_paths = doc.value("k_paths", cfg.k_paths);
    if (doc.contains("faco")) {
      const json& f = doc["faco"];
      cfg.faco.tau0 = f.value("tau0", cfg.faco.tau0);
      cfg.faco.delta = f.value("delta", cfg.faco.delta);
      cfg.faco.phi = f.value("phi", cfg.faco.phi);
      cfg.faco.alpha = f.value("alpha", cfg.faco.alpha);
      cfg.faco.beta = f.value("beta", cfg.faco.beta);
      cfg.faco.dt_s = f.value("dt_s", cfg.faco.dt_s);
      cfg.faco.n_ant = f.value("n_ant", cfg.faco.n_ant);
      cfg.faco.d_th_s = f.value("d_th_s", cfg.faco.d_th_s);
    }
    if (doc.contains("hop")) {
      const json& h = doc["hop"];
      cfg.hop.packet_bytes = h.value("packet_bytes", cfg.hop.packet_bytes);
      cfg.hop.rate_mbps = h.value("rate_mbps", cfg.hop.rate_mbps);
      cfg.hop.proc_s = h.value("proc_s", cfg.hop.proc_s);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario config has unexpected shape: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["id"] = cfg.id;
  if (!cfg.map_json.empty()) {
    doc["map"]["json"] = json::parse(cfg.map_json);
  } else {
    doc["map"]["grid"] = {{"rows", cfg.grid_rows}, {"cols", cfg.grid_cols},
                          {"block_m", cfg.grid_block_m}};
  }
  if (!cfg.lines_json.empty()) {
    doc["lines"]["json"] = json::parse(cfg.lines_json);
  } else {
    doc["lines"]["synthetic"] = cfg.synthetic_lines;
  }
  doc["cars"] = cfg.cars;
  doc["buses_per_line"] = cfg.buses_per_line;
  doc["headway_s"] = cfg.headway_s;
  doc["seed"] = cfg.seed;
  doc["tick_s"] = cfg.tick_s;
  doc["beacon_interval_s"] = cfg.beacon_interval_s;
  doc["neighbor_expiry_s"] = cfg.neighbor_expiry_s;
  doc["radius_m"] = cfg.radius_m;
  doc["speed_min_kmh"] = cfg.speed_min_kmh;
  doc["speed_max_kmh"] = cfg.speed_max_kmh;
  doc["duration_s"] = cfg.duration_s;
  doc["deadline_s"] = cfg.deadline_s;
  doc["packets"] = {{"count", cfg.packet_count},
                    {"distance_band_m", {cfg.bucket_lo_m, cfg.bucket_hi_m}},
                    {"bucket_width_m", cfg.bucket_width_m}};
  doc["k_paths"] = cfg.k_paths;
  doc["faco"] = {{"tau0", cfg.faco.tau0}, {"delta", cfg.faco.delta}, {"phi", cfg.faco.phi},
                 {"alpha", cfg.faco.alpha}, {"beta", cfg.faco.beta}, {"dt_s", cfg.faco.dt_s},
                 {"n_ant", cfg.faco.n_ant}, {"d_th_s", cfg.faco.d_th_s}};
  doc["hop"] = {{"packet_bytes", cfg.hop.packet_bytes}, {"rate_mbps", cfg.hop.rate_mbps},
                {"proc_s", cfg.hop.proc_s}};
  return doc.dump(2);
}

void apply_paper_scale(ScenarioConfig& cfg) {
  cfg.map_json.clear();
  cfg.grid_rows = 8;
  cfg.grid_cols = 8;
  cfg.grid_block_m = 800.0;
  cfg.lines_json.clear();
  cfg.synthetic_lines = 20;
  cfg.buses_per_line = 20;
  cfg.cars = 2000;
  cfg.duration_s = 4000.0;
  cfg.radius_m = 200.0;
  cfg.packet_count = 500;
}

std::optional<double> transmission_ratio(int delivered, int generated) {
  if (generated < 0 || delivered < 0) throw std::logic_error("negative packet counts");
  if (delivered > generated) {
    throw std::logic_error("delivered packets exceed generated packets");
  }
  if (generated == 0) return std::nullopt;
  return static_cast<double>(delivered) / static_cast<double>(generated);
}

std::optional<double> average_delay(const std::vector<double>& delays) {
  if (delays.empty()) return std::nullopt;
  double sum = 0.0;
  for (double d : delays) sum += d;
  return sum / static_cast<double>(delays.size());
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& axis, double value) {
  std::string key = std::to_string(base) + "/" + axis + "/" + axis_value_label(value);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h == 0 ? 1 : h;
}

std::vector<BusLine> make_synthetic_lines(const StreetGraph& map, int rows, int cols, int count,
                                          double headway_s) {
  std::vector<BusLine> lines;
  lines.reserve(count);
  auto h_street = [](int r, int c) { return "h" + std::to_string(r) + "_" + std::to_string(c); };
  auto v_street = [](int r, int c) { return "v" + std::to_string(r) + "_" + std::to_string(c); };

  for (int i = 0; i < count; ++i) {
    BusLine line;
    line.id = "L" + std::to_string(i);
    line.headway_s = headway_s;
    int shape = i % 3;
    int slot = i / 3;
    if (shape == 0) {
      int r = (slot * 2 + 1) % rows;
      for (int c = 0; c + 1 < cols; ++c) line.trajectory.push_back(h_street(r, c));
    } else if (shape == 1) {
      int c = (slot * 2 + 1) % cols;
      for (int r = 0; r + 1 < rows; ++r) line.trajectory.push_back(v_street(r, c));
    } else {
      // L-shape: ride a column up to a pivot row, then a row to the far edge
      int c = (slot * 3 + 2) % cols;
      int pivot = rows / 2;
      for (int r = 0; r < pivot; ++r) line.trajectory.push_back(v_street(r, c));
      for (int cc = c; cc + 1 < cols; ++cc) line.trajectory.push_back(h_street(pivot, cc));
      if (line.trajectory.empty()) {
        for (int cc = 0; cc + 1 < cols; ++cc) line.trajectory.push_back(h_street(pivot, cc));
      }
    }
    for (const StreetId& sid : line.trajectory) map.street_index(sid);  // must exist
    lines.push_back(std::move(line));
  }
  return lines;
}

namespace {

struct Workload {
  struct Injection {
    double time = 0.0;
    VehicleId src = 0;
    Vec2 dst;
  };
  std::vector<Injection> injections;
};

// Samples destination points on streets so the straight-line distance from
// the source falls inside the configured band; falls back to the nearest
// miss after a bounded number of tries.
Vec2 sample_destination(const StreetGraph& map, Vec2 src_pos, double lo, double hi,
                        std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> street_dist(0, map.street_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec2 best;
  double best_miss = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 300; ++attempt) {
    std::size_t s = street_dist(rng);
    double offset = unit(rng) * map.street_at(s).length;
    Vec2 p = map.point_at(s, offset, Direction::Forward);
    double d = distance(src_pos, p);
    if (d >= lo && d <= hi) return p;
    double miss = d < lo ? lo - d : d - hi;
    if (miss < best_miss) {
      best_miss = miss;
      best = p;
    }
  }
  return best;
}

}  // namespace

namespace {

struct JsonAntTrace : DiscoveryTrace {
  std::ostream* out;
  const World* world;
  explicit JsonAntTrace(std::ostream* o) : out(o), world(nullptr) {}
  void ant_event(const char* what, VehicleId at, int ant, double ttl) override {
    json j;
    j["what"] = what;
    j["at"] = at;
    j["ant"] = ant;
    j["ttl"] = ttl;
    if (world != nullptr) j["t"] = world->now();
    (*out) << j.dump() << '\n';
  }
  void deposit_event(VehicleId node, VehicleId next, double before, double after) override {
    json j;
    j["what"] = "deposit";
    j["at"] = node;
    j["toward"] = next;
    j["tau_before"] = before;
    j["tau_after"] = after;
    if (world != nullptr) j["t"] = world->now();
    (*out) << j.dump() << '\n';
  }
};

void dump_snapshot(std::ostream& out, const World& world) {
  json j;
  j["t"] = world.now();
  j["vehicles"] = json::array();
  for (const VehicleState& v : world.vehicles()) {
    j["vehicles"].push_back({{"id", v.id},
                             {"kind", to_string(v.kind)},
                             {"x", v.position.x},
                             {"y", v.position.y},
                             {"street", world.map().street_at(v.street).id},
                             {"speed", v.speed}});
  }
  out << j.dump() << '\n';
}

}  // namespace

MetricsRecord run_scenario(const ScenarioConfig& cfg, std::ostream* event_out) {
  RunSinks sinks;
  sinks.events = event_out;
  return run_scenario(cfg, sinks);
}

MetricsRecord run_scenario(const ScenarioConfig& cfg, const RunSinks& sinks) {
  std::ostream* event_out = sinks.events;
  cfg.validate();

  std::shared_ptr<const StreetGraph> map;
  if (!cfg.map_json.empty()) {
    map = std::make_shared<const StreetGraph>(load_map(cfg.map_json));
  } else {
    map = std::make_shared<const StreetGraph>(
        generate_grid(cfg.grid_rows, cfg.grid_cols, cfg.grid_block_m));
  }

  if (map->street_count() == 0) {
    throw ConfigError("scenario map has no streets");
  }

  std::vector<BusLine> lines;
  if (!cfg.lines_json.empty()) {
    lines = load_lines(*map, cfg.lines_json).lines;
  } else {
    if (cfg.map_json.empty()) {
      lines = make_synthetic_lines(*map, cfg.grid_rows, cfg.grid_cols, cfg.synthetic_lines,
                                   cfg.headway_s);
    } else {
      throw ConfigError("a lines file is required when a map file is given");
    }
  }

  WorldConfig wc;
  wc.tick_s = cfg.tick_s;
  wc.beacon_interval_s = cfg.beacon_interval_s;
  wc.neighbor_expiry_s = cfg.neighbor_expiry_s;
  wc.radius_m = cfg.radius_m;
  wc.speed_min_mps = cfg.speed_min_kmh / 3.6;
  wc.speed_max_mps = cfg.speed_max_kmh / 3.6;
  wc.seed = cfg.seed;

  World world(map, lines, wc);
  world.schedule_bus_fleet(cfg.buses_per_line, cfg.headway_s);
  world.spawn_cars(cfg.cars);

  RoutingParams rp;
  rp.k_paths = cfg.k_paths;
  rp.deadline_s = cfg.deadline_s;
  rp.faco = cfg.faco;
  rp.hop = cfg.hop;
  RoutingEngine engine(world, build_routing_graph(*map, lines), LineCoverage(*map, lines), rp,
                       event_out);
  std::optional<JsonAntTrace> ant_trace;
  if (sinks.ant_trace != nullptr) {
    ant_trace.emplace(sinks.ant_trace);
    ant_trace->world = &world;
    engine.set_ant_trace(&*ant_trace);
  }

  // Injection schedule: spread over the horizon so every packet sees a full
  // deadline window before the run ends.
  std::mt19937_64 workload_rng(derive_seed(cfg.seed, "workload", 0.0));
  double spread = std::max(0.0, cfg.duration_s - cfg.deadline_s);
  std::vector<double> times(cfg.packet_count);
  for (int i = 0; i < cfg.packet_count; ++i) {
    times[i] = cfg.packet_count <= 1 ? 0.0 : spread * i / (cfg.packet_count - 1);
  }

  std::vector<double> src_distances(cfg.packet_count, 0.0);
  const std::int64_t total_steps =
      static_cast<std::int64_t>(std::llround(cfg.duration_s / cfg.tick_s));
  int injected = 0;

  auto inject_due = [&]() {
    while (injected < cfg.packet_count && times[injected] <= world.now() + 1e-9) {
      std::uniform_int_distribution<VehicleId> pick(
          0, static_cast<VehicleId>(world.vehicle_count() - 1));
      VehicleId src = pick(workload_rng);
      Vec2 src_pos = world.vehicle(src).position;
      Vec2 dst = sample_destination(world.map(), src_pos, cfg.bucket_lo_m, cfg.bucket_hi_m,
                                    workload_rng);
      src_distances[injected] = distance(src_pos, dst);
      engine.originate(world, src, dst);
      ++injected;
    }
  };

  inject_due();
  if (sinks.snapshots != nullptr) dump_snapshot(*sinks.snapshots, world);
  for (std::int64_t s = 0; s < total_steps; ++s) {
    world.step();
    engine.step(world);
    inject_due();
    if (sinks.snapshots != nullptr) dump_snapshot(*sinks.snapshots, world);
  }

  MetricsRecord rec;
  rec.scenario_id = cfg.id;
  std::vector<double> delays;
  int bucket_count = static_cast<int>(std::ceil((cfg.bucket_hi_m - cfg.bucket_lo_m) /
                                                cfg.bucket_width_m));
  bucket_count = std::max(bucket_count, 1);
  rec.buckets.resize(bucket_count);
  for (int b = 0; b < bucket_count; ++b) {
    rec.buckets[b].lo = cfg.bucket_lo_m + b * cfg.bucket_width_m;
    rec.buckets[b].hi = std::min(cfg.bucket_hi_m, rec.buckets[b].lo + cfg.bucket_width_m);
  }

  const std::deque<Packet>& packets = engine.packets();
  for (const Packet& p : packets) {
    ++rec.generated;
    int b = static_cast<int>((src_distances[p.id] - cfg.bucket_lo_m) / cfg.bucket_width_m);
    b = std::clamp(b, 0, bucket_count - 1);
    ++rec.buckets[b].generated;
    switch (p.state) {
      case PacketState::Delivered:
        ++rec.delivered;
        delays.push_back(p.end_to_end_delay());
        ++rec.buckets[b].delivered;
        rec.buckets[b].delay_sum += p.end_to_end_delay();
        break;
      case PacketState::Expired:
        ++rec.expired;
        break;
      case PacketState::InFlight:
        ++rec.in_flight;
        break;
    }
  }
  rec.ratio = transmission_ratio(rec.delivered, rec.generated);
  rec.avg_delay_s = average_delay(delays);
  rec.reroutes = engine.total_reroutes();
  rec.failed_forwards = engine.total_failed_forwards();
  return rec;
}

std::vector<MetricsRecord> run_sweep(const ScenarioConfig& base, SweepAxis axis,
                                     const std::vector<double>& values, std::ostream* event_out) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<MetricsRecord> out;
  out.reserve(values.size());
  for (double value : values) {
    ScenarioConfig cfg = base;
    cfg.seed = derive_seed(base.seed, to_string(axis), value);
    switch (axis) {
      case SweepAxis::Radius:
        cfg.radius_m = value;
        break;
      case SweepAxis::Distance:
        cfg.bucket_lo_m = value;
        cfg.bucket_hi_m = value + base.bucket_width_m;
        break;
      case SweepAxis::Density:
        cfg.cars = static_cast<int>(value);
        break;
    }
    cfg.id = base.id + "/" + to_string(axis) + "=" + axis_value_label(value);
    if (axis == SweepAxis::Density) {
      // canonical scenario names for the standard car populations
      if (cfg.cars == 2000) cfg.id += "(sparse)";
      if (cfg.cars == 4000) cfg.id += "(common)";
      if (cfg.cars == 6000) cfg.id += "(dense)";
    }
    MetricsRecord rec = run_scenario(cfg, event_out);
    rec.axis_value = axis_value_label(value);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string metrics_to_csv(const std::vector<MetricsRecord>& records) {
  std::ostringstream out;
  out << "scenario_id,axis_value,generated,delivered,ratio,avg_delay_s,reroutes,failed_forwards\n";
  for (const MetricsRecord& r : records) {
    out << r.scenario_id << ',' << r.axis_value << ',' << r.generated << ',' << r.delivered << ',';
    if (r.ratio) out << format_fixed(*r.ratio);
    out << ',';
    if (r.avg_delay_s) out << format_fixed(*r.avg_delay_s);
    out << ',' << r.reroutes << ',' << r.failed_forwards << '\n';
  }
  return out.str();
}

}  // namespace btsc
