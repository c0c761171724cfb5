#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "btsc/mobility.hpp"
#include "btsc/routing.hpp"

namespace btsc {

enum class SweepAxis { Radius, Distance, Density };

SweepAxis sweep_axis_from_string(const std::string& name);
const char* to_string(SweepAxis axis);

/// One simulation scenario. Either a map file (JSON text already loaded) or
/// a synthetic grid, either a lines file or a count of synthetic lines, a
/// vehicle population, a packet workload targeted at a source/destination
/// distance band, and the clock/radio parameters.
struct ScenarioConfig {
  std::string id = "scenario";

  // map: inline JSON text takes precedence over the grid spec
  std::string map_json;
  int grid_rows = 8;
  int grid_cols = 8;
  double grid_block_m = 500.0;

  // lines: inline JSON text takes precedence over synthetic generation
  std::string lines_json;
  int synthetic_lines = 6;

  int cars = 300;
  int buses_per_line = 7;
  double headway_s = 60.0;
  std::uint64_t seed = 1;

  double tick_s = 0.1;
  double beacon_interval_s = 1.0;
  double neighbor_expiry_s = 3.0;
  double radius_m = 200.0;
  double speed_min_kmh = 10.0;
  double speed_max_kmh = 40.0;
  double duration_s = 600.0;
  double deadline_s = 120.0;

  int packet_count = 200;
  double bucket_lo_m = 0.0;
  double bucket_hi_m = 2500.0;
  double bucket_width_m = 500.0;  // per-bucket breakdown granularity

  int k_paths = 5;
  FacoParams faco;
  HopDelayModel hop;

  void validate() const;
};

/// Parses the scenario JSON; unknown keys are rejected to catch typos.
ScenarioConfig parse_scenario(const std::string& json_text);
std::string scenario_to_json(const ScenarioConfig& config);

/// Applies the large-scale preset: an 8x8 grid of 800 m blocks, 20 lines,
/// 20 buses per line, 2000 cars, 4000 s horizon.
void apply_paper_scale(ScenarioConfig& config);

struct BucketStats {
  double lo = 0.0;
  double hi = 0.0;
  int generated = 0;
  int delivered = 0;
  double delay_sum = 0.0;
};

struct MetricsRecord {
  std::string scenario_id;
  std::string axis_value;  // empty outside sweeps
  int generated = 0;
  int delivered = 0;
  int expired = 0;
  int in_flight = 0;
  std::optional<double> ratio;
  std::optional<double> avg_delay_s;
  int reroutes = 0;
  int failed_forwards = 0;
  std::vector<BucketStats> buckets;
};

/// delivered/generated; disengaged (nullopt) when nothing was generated.
/// Throws std::logic_error when delivered exceeds generated.
std::optional<double> transmission_ratio(int delivered, int generated);

/// Mean over the supplied per-packet delays; nullopt when empty.
std::optional<double> average_delay(const std::vector<double>& delays);

/// Deterministic 64-bit FNV-1a over the textual key; used to derive
/// independent per-cell seeds so adding a sweep cell never perturbs others.
std::uint64_t derive_seed(std::uint64_t base, const std::string& axis, double value);

/// Debug sinks for a scenario run: `events` receives the JSON-lines packet
/// event log, `snapshots` one JSON line of vehicle states per tick, and
/// `ant_trace` the per-hop discovery protocol trace. All optional.
struct RunSinks {
  std::ostream* events = nullptr;
  std::ostream* snapshots = nullptr;
  std::ostream* ant_trace = nullptr;
};

/// Builds the world from the config, spawns the fleet and cars, injects the
/// packet workload spread over the horizon, steps to the configured
/// duration, and aggregates the metrics. Identical configs and seeds yield
/// identical records. `event_out`, when given, receives the JSON-lines
/// packet event log.
MetricsRecord run_scenario(const ScenarioConfig& config, std::ostream* event_out = nullptr);
MetricsRecord run_scenario(const ScenarioConfig& config, const RunSinks& sinks);

/// One run_scenario per axis value with independently derived seeds.
std::vector<MetricsRecord> run_sweep(const ScenarioConfig& base, SweepAxis axis,
                                     const std::vector<double>& values,
                                     std::ostream* event_out = nullptr);

/// CSV with the fixed column set: scenario_id, axis_value, generated,
/// delivered, ratio, avg_delay_s, reroutes, failed_forwards. Null metrics
/// render as empty fields.
std::string metrics_to_csv(const std::vector<MetricsRecord>& records);

/// Deterministic synthetic bus lines over a generated grid: a spread of
/// row, column, and L-shaped corridors.
std::vector<BusLine> make_synthetic_lines(const StreetGraph& map, int rows, int cols, int count,
                                          double headway_s);

}  // namespace btsc
