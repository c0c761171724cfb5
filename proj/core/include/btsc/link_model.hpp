#pragma once

#include <array>
#include <cstddef>

#include "btsc/geometry.hpp"

namespace btsc {

/// Instantaneous motion state of a vehicle.
struct Kinematics {
  Vec2 position;
  Vec2 velocity;
};

/// Sliding-window speed statistics fed by beacon observations. The window
/// keeps the most recent samples; mean and deviation are population
/// statistics over the window and both read 0 while the window is empty.
class VelocityStats {
 public:
  static constexpr std::size_t kWindow = 20;

  void push(double observed_speed);

  double mean() const { return mean_; }
  double deviation() const { return deviation_; }
  std::size_t sample_count() const { return count_; }

 private:
  void recompute();

  std::array<double, kWindow> samples_{};
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  double mean_ = 0.0;
  double deviation_ = 0.0;
};

/// How long two currently connected vehicles stay within `radius` of each
/// other under constant velocities: +infinity for identical velocities, 0
/// when they sit exactly on the radius and are not approaching, otherwise
/// the positive boundary-crossing time. Symmetric in its two arguments.
/// Throws std::invalid_argument when the pair is out of range.
double connection_duration(const Kinematics& a, const Kinematics& b, double radius);

/// Probability that a link with the given kinematic duration bound survives,
/// integrating the relative-speed survival density over [0, duration] by
/// adaptive Simpson quadrature (absolute tolerance 1e-6), clamped to [0, 1].
/// mu and sigma describe the speed-difference distribution of the pair.
/// A zero sigma short-circuits to the deterministic limit: 1 for positive
/// durations, 0 otherwise.
double link_reliability(double duration, double mu, double sigma, double radius);

/// Convenience overload deriving mu and sigma from the two vehicles'
/// windowed speed statistics.
double link_reliability(double duration, const VelocityStats& a, const VelocityStats& b,
                        double radius);

/// Expected link lifetime: reliability x duration. An infinite duration with
/// positive reliability stays infinite; zero reliability always yields zero.
double expected_lifetime(double duration, double reliability);

}  // namespace btsc
