// btsc: street map tooling, routing-graph inspection, path planning, and
// scenario runs for the bus-trajectory street-centric routing simulator.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "btsc/experiment.hpp"
#include "btsc/path_planner.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw btsc::ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw btsc::ConfigError("cannot write '" + path + "'");
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_file(out_path, content);
  }
}

int run_map_gen(int rows, int cols, double block, const std::string& out) {
  btsc::StreetGraph g = btsc::generate_grid(rows, cols, block);
  emit(out, btsc::save_map(g));
  return 0;
}

int run_map_validate(const std::string& file) {
  btsc::StreetGraph g = btsc::load_map(read_file(file));
  std::cout << "ok: " << g.node_count() << " intersections, " << g.street_count() << " streets\n";
  return 0;
}

int run_lines_gen(const std::string& map_file, int count, double headway,
                  const std::string& out) {
  btsc::StreetGraph map = btsc::load_map(read_file(map_file));
  // recover the grid dimensions from the generated node ids
  int rows = 0, cols = 0;
  for (const btsc::Intersection& n : map.intersections()) {
    if (n.id.size() < 2 || n.id[0] != 'n') {
      throw btsc::ConfigError("lines gen needs a grid map produced by 'map gen'");
    }
    auto sep = n.id.find('_');
    rows = std::max(rows, std::stoi(n.id.substr(1, sep - 1)) + 1);
    cols = std::max(cols, std::stoi(n.id.substr(sep + 1)) + 1);
  }
  auto lines = btsc::make_synthetic_lines(map, rows, cols, count, headway);
  emit(out, btsc::save_lines(lines));
  return 0;
}

int run_graph_build(const std::string& map_file, const std::string& lines_file,
                    const std::string& out) {
  btsc::StreetGraph map = btsc::load_map(read_file(map_file));
  btsc::LinesFile lf = btsc::load_lines(map, read_file(lines_file));
  for (const std::string& w : lf.warnings) std::cerr << "warning: " << w << '\n';

  btsc::RoutingGraph rg = btsc::build_routing_graph(map, lf.lines);
  btsc::LineCoverage coverage(map, lf.lines);

  json doc;
  doc["weights"] = json::object();
  for (std::size_t i = 0; i < map.street_count(); ++i) {
    doc["weights"][map.street_at(i).id] = rg.weight(i);
  }
  doc["psc"] = json::array();
  for (std::size_t i = 0; i < map.street_count(); ++i) {
    for (const btsc::StreetId& other : map.adjacent_streets(map.street_at(i).id)) {
      doc["psc"].push_back({{"from", map.street_at(i).id},
                            {"to", other},
                            {"value", btsc::street_consistency(coverage, map.street_at(i).id,
                                                               other)}});
    }
  }
  emit(out, doc.dump(2));
  return 0;
}

int run_plan(const std::string& map_file, const std::string& lines_file, double sx, double sy,
             double dx, double dy, int k) {
  btsc::StreetGraph map = btsc::load_map(read_file(map_file));
  btsc::LinesFile lf = btsc::load_lines(map, read_file(lines_file));
  btsc::RoutingGraph rg = btsc::build_routing_graph(map, lf.lines);
  btsc::LineCoverage coverage(map, lf.lines);

  auto [src, dst] = btsc::resolve_endpoints(map, {sx, sy}, {dx, dy});
  if (src == dst) {
    std::cerr << "source and destination resolve to the same intersection '" << src << "'\n";
    return 2;
  }
  std::vector<btsc::RoutingPath> candidates = btsc::k_min_weight_paths(rg, src, dst, k);
  if (candidates.empty()) {
    std::cerr << "no path between '" << src << "' and '" << dst << "'\n";
    return 1;
  }

  std::cout << "candidates (" << src << " -> " << dst << "):\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    btsc::RoutingPath scored = btsc::score_path(coverage, candidates[i]);
    std::cout << "  " << (i + 1) << ". weight=" << scored.total_weight
              << " consistency=" << scored.ppc << " streets=";
    for (std::size_t s = 0; s < scored.streets.size(); ++s) {
      std::cout << (s ? "," : "") << scored.streets[s];
    }
    std::cout << '\n';
  }

  btsc::RoutingPath best = btsc::select_routing_path(rg, coverage, src, dst, k);
  json doc;
  doc["src_vertex"] = best.src_vertex;
  doc["dst_vertex"] = best.dst_vertex;
  doc["streets"] = best.streets;
  doc["total_weight"] = best.total_weight;
  doc["consistency"] = best.ppc;
  std::cout << "selected: " << doc.dump() << '\n';
  return 0;
}

int run_scenarios(const std::string& config_file, const std::string& sweep,
                  const std::vector<double>& values, const std::string& out,
                  const std::string& events_path, const std::string& snapshots_path,
                  const std::string& ant_trace_path, bool paper_scale) {
  btsc::ScenarioConfig cfg =
      config_file.empty() ? btsc::ScenarioConfig{} : btsc::parse_scenario(read_file(config_file));
  if (paper_scale) btsc::apply_paper_scale(cfg);
  cfg.validate();

  auto open_sink = [](const std::string& path, std::ofstream& file) -> std::ostream* {
    if (path.empty()) return nullptr;
    file.open(path);
    if (!file) throw btsc::ConfigError("cannot write '" + path + "'");
    return &file;
  };
  std::ofstream events_file, snapshots_file, trace_file;
  btsc::RunSinks sinks;
  sinks.events = open_sink(events_path, events_file);
  sinks.snapshots = open_sink(snapshots_path, snapshots_file);
  sinks.ant_trace = open_sink(ant_trace_path, trace_file);

  std::vector<btsc::MetricsRecord> records;
  if (!sweep.empty()) {
    // debug sinks other than the event log stay single-run to keep files sane
    records = btsc::run_sweep(cfg, btsc::sweep_axis_from_string(sweep), values, sinks.events);
  } else {
    records.push_back(btsc::run_scenario(cfg, sinks));
  }
  emit(out, btsc::metrics_to_csv(records));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bus-trajectory street-centric routing simulator"};
  app.require_subcommand(1);

  // map gen / map validate
  CLI::App* map_cmd = app.add_subcommand("map", "street map utilities");
  map_cmd->require_subcommand(1);
  CLI::App* map_gen = map_cmd->add_subcommand("gen", "generate a Manhattan grid map");
  int rows = 8, cols = 8;
  double block = 500.0;
  std::string map_out;
  map_gen->add_option("--rows", rows, "grid rows")->check(CLI::Range(2, 1000));
  map_gen->add_option("--cols", cols, "grid columns")->check(CLI::Range(2, 1000));
  map_gen->add_option("--block", block, "block length in meters");
  map_gen->add_option("--out", map_out, "output file (stdout when omitted)");

  CLI::App* map_validate = map_cmd->add_subcommand("validate", "validate a map file");
  std::string validate_file;
  map_validate->add_option("file", validate_file, "map JSON file")->required();

  // lines gen
  CLI::App* lines_cmd = app.add_subcommand("lines", "bus line utilities");
  lines_cmd->require_subcommand(1);
  CLI::App* lines_gen = lines_cmd->add_subcommand("gen", "generate synthetic lines over a grid map");
  std::string lines_map, lines_out;
  int lines_count = 6;
  double lines_headway = 60.0;
  lines_gen->add_option("--map", lines_map, "grid map file")->required();
  lines_gen->add_option("--count", lines_count, "number of lines");
  lines_gen->add_option("--headway", lines_headway, "departure headway in seconds");
  lines_gen->add_option("--out", lines_out, "output file (stdout when omitted)");

  // graph build
  CLI::App* graph_cmd = app.add_subcommand("graph", "routing graph utilities");
  graph_cmd->require_subcommand(1);
  CLI::App* graph_build = graph_cmd->add_subcommand("build", "weight the map by bus coverage");
  std::string gb_map, gb_lines, gb_out;
  graph_build->add_option("--map", gb_map, "map JSON file")->required();
  graph_build->add_option("--lines", gb_lines, "lines JSON file")->required();
  graph_build->add_option("--out", gb_out, "output file (stdout when omitted)");

  // plan
  CLI::App* plan_cmd = app.add_subcommand("plan", "plan a routing path between two positions");
  std::string plan_map, plan_lines;
  double sx = 0, sy = 0, dx = 0, dy = 0;
  int k = 5;
  plan_cmd->add_option("--map", plan_map, "map JSON file")->required();
  plan_cmd->add_option("--lines", plan_lines, "lines JSON file")->required();
  plan_cmd->add_option("--src-x", sx, "source x in meters")->required();
  plan_cmd->add_option("--src-y", sy, "source y in meters")->required();
  plan_cmd->add_option("--dst-x", dx, "destination x in meters")->required();
  plan_cmd->add_option("--dst-y", dy, "destination y in meters")->required();
  plan_cmd->add_option("-k,--k", k, "candidate path count")->check(CLI::PositiveNumber);

  // run
  CLI::App* run_cmd = app.add_subcommand("run", "run a scenario or a sweep");
  std::string config_file, sweep, run_out, events_path, snapshots_path, ant_trace_path;
  std::vector<double> sweep_values;
  bool paper_scale = false;
  run_cmd->add_option("--config", config_file, "scenario JSON file (defaults when omitted)");
  run_cmd->add_option("--sweep", sweep, "sweep axis: radius|distance|density");
  run_cmd->add_option("--values", sweep_values, "sweep axis values")->delimiter(',');
  run_cmd->add_option("--out", run_out, "CSV output file (stdout when omitted)");
  run_cmd->add_option("--events", events_path, "JSON-lines packet event log");
  run_cmd->add_option("--snapshots", snapshots_path,
                      "JSON-lines per-tick world snapshot dump (single runs)");
  run_cmd->add_option("--ant-trace", ant_trace_path,
                      "JSON-lines discovery protocol trace (single runs)");
  run_cmd->add_flag("--paper-scale", paper_scale, "apply the large-scale preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (map_gen->parsed()) return run_map_gen(rows, cols, block, map_out);
    if (map_validate->parsed()) return run_map_validate(validate_file);
    if (lines_gen->parsed()) return run_lines_gen(lines_map, lines_count, lines_headway, lines_out);
    if (graph_build->parsed()) return run_graph_build(gb_map, gb_lines, gb_out);
    if (plan_cmd->parsed()) return run_plan(plan_map, plan_lines, sx, sy, dx, dy, k);
    if (run_cmd->parsed()) {
      return run_scenarios(config_file, sweep, sweep_values, run_out, events_path,
                           snapshots_path, ant_trace_path, paper_scale);
    }
  } catch (const btsc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const btsc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const btsc::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
