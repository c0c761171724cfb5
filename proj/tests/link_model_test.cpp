#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>
#include <random>

#include "btsc/link_model.hpp"
#include "support/oracles.hpp"

using namespace btsc;
using btsc::testing::bisect_crossing;
using btsc::testing::mc_reliability;

TEST_CASE("connection duration") {
  SUBCASE("equal velocities never disconnect") {
    Kinematics a{{0, 0}, {5, 5}};
    Kinematics b{{50, 20}, {5, 5}};
    CHECK(std::isinf(connection_duration(a, b, 200)));
  }
  SUBCASE("head start with chasing vehicle matches the numeric crossing") {
    Kinematics a{{0, 0}, {10, 0}};
    Kinematics b{{100, 0}, {0, 0}};
    double t = connection_duration(a, b, 200);
    CHECK(t == doctest::Approx(30.0));
    CHECK(t == doctest::Approx(*bisect_crossing(a, b, 200)).epsilon(1e-9));
  }
  SUBCASE("boundary pair receding disconnects immediately") {
    Kinematics a{{0, 0}, {0, 0}};
    Kinematics b{{200, 0}, {1, 0}};
    CHECK(connection_duration(a, b, 200) == 0.0);
  }
  SUBCASE("boundary pair approaching stays connected for the full chord") {
    Kinematics a{{0, 0}, {0, 0}};
    Kinematics b{{200, 0}, {-1, 0}};
    CHECK(connection_duration(a, b, 200) == doctest::Approx(400.0));
  }
  SUBCASE("out-of-range pair violates the precondition") {
    Kinematics a{{0, 0}, {0, 0}};
    Kinematics b{{300, 0}, {1, 0}};
    CHECK_THROWS_AS(connection_duration(a, b, 200), std::invalid_argument);
  }
  SUBCASE("symmetry and boundary recovery on random connected pairs") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> pos(-150.0, 150.0);
    std::uniform_real_distribution<double> vel(-15.0, 15.0);
    const double radius = 250.0;
    for (int i = 0; i < 500; ++i) {
      Kinematics a{{pos(rng), pos(rng)}, {vel(rng), vel(rng)}};
      Kinematics b{{pos(rng), pos(rng)}, {vel(rng), vel(rng)}};
      if (distance(a.position, b.position) > radius) continue;
      double t = connection_duration(a, b, radius);
      CHECK(t == connection_duration(b, a, radius));
      if (std::isinf(t)) continue;
      // the pair sits exactly on the radius at the predicted time
      Vec2 pa = a.position + a.velocity * t;
      Vec2 pb = b.position + b.velocity * t;
      CHECK(distance(pa, pb) == doctest::Approx(radius).epsilon(1e-6));
    }
  }
}

TEST_CASE("velocity statistics window") {
  SUBCASE("constant stream collapses the deviation") {
    VelocityStats s;
    for (int i = 0; i < 50; ++i) s.push(12.5);
    CHECK(s.mean() == doctest::Approx(12.5));
    CHECK(s.deviation() == doctest::Approx(0.0));
    CHECK(s.sample_count() == VelocityStats::kWindow);
  }
  SUBCASE("two-point population statistics") {
    VelocityStats s;
    s.push(10.0);
    s.push(20.0);
    CHECK(s.mean() == doctest::Approx(15.0));
    CHECK(s.deviation() == doctest::Approx(5.0));
  }
  SUBCASE("window overflow matches a scratch recomputation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> speed(0.0, 30.0);
    VelocityStats s;
    std::deque<double> window;
    for (int i = 0; i < 100; ++i) {
      double v = speed(rng);
      s.push(v);
      window.push_back(v);
      if (window.size() > VelocityStats::kWindow) window.pop_front();
      double mean = 0.0;
      for (double x : window) mean += x;
      mean /= window.size();
      double var = 0.0;
      for (double x : window) var += (x - mean) * (x - mean);
      var /= window.size();
      CHECK(s.mean() == doctest::Approx(mean).epsilon(1e-12));
      CHECK(s.deviation() == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
    }
  }
}

TEST_CASE("link reliability") {
  SUBCASE("zero duration is unreliable by definition") {
    CHECK(link_reliability(0.0, 2.0, 1.0, 200.0) == 0.0);
  }
  SUBCASE("deterministic speeds give certainty for positive durations") {
    CHECK(link_reliability(50.0, 2.0, 0.0, 200.0) == 1.0);
    VelocityStats a, b;
    a.push(10.0);
    b.push(10.0);
    CHECK(link_reliability(50.0, a, b, 200.0) == 1.0);
  }
  SUBCASE("quadrature matches the Monte Carlo oracle") {
    double got = link_reliability(50.0, 2.0, 1.0, 200.0);
    double oracle = mc_reliability(2.0, 1.0, 200.0, 50.0, 1000000, 555);
    CHECK(std::abs(got - oracle) < 1e-3);
  }
  SUBCASE("monotonically nondecreasing in duration") {
    double prev = 0.0;
    for (double t : {1.0, 5.0, 20.0, 50.0, 120.0, 400.0, 2000.0}) {
      double r = link_reliability(t, 3.0, 2.0, 300.0);
      CHECK(r >= prev - 1e-12);
      CHECK(r <= 1.0);
      prev = r;
    }
  }
  SUBCASE("the density carries at most unit mass over any window") {
    // durations map one-to-one onto positive speed differences, so the full
    // positive tail can hold less than all the Gaussian mass
    for (double mu : {-4.0, 0.0, 1.5, 6.0}) {
      for (double sigma : {0.5, 2.0, 8.0}) {
        double r = link_reliability(1e7, mu, sigma, 250.0);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
      }
    }
  }
  SUBCASE("negative duration violates the precondition") {
    CHECK_THROWS_AS(link_reliability(-1.0, 2.0, 1.0, 200.0), std::invalid_argument);
  }
}

TEST_CASE("expected lifetime") {
  CHECK(expected_lifetime(30.0, 0.5) == doctest::Approx(15.0));
  CHECK(expected_lifetime(123.0, 0.0) == 0.0);
  CHECK(std::isinf(expected_lifetime(std::numeric_limits<double>::infinity(), 0.9)));
  CHECK(expected_lifetime(std::numeric_limits<double>::infinity(), 0.0) == 0.0);
  CHECK_THROWS_AS(expected_lifetime(10.0, 1.5), std::invalid_argument);
}
