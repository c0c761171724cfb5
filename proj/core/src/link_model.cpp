#include "btsc/link_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace btsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadratureTol = 1e-6;
constexpr int kQuadratureMaxDepth = 48;

// Density of the duration induced by a Gaussian speed difference: the link
// covers distance 2R at relative speed u = 2R/T, so the density in T is the
// normal density of u times |du/dT|.
double duration_density(double t, double mu, double sigma, double radius) {
  if (t <= 0.0) return 0.0;
  double u = 2.0 * radius / t;
  double z = (u - mu) / sigma;
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
  return (2.0 * radius / (sigma * t * t)) * inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth, double mu, double sigma, double radius) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = duration_density(lm, mu, sigma, radius);
  double frm = duration_density(rm, mu, sigma, radius);
  double left = simpson(fa, flm, fm, m - a);
  double right = simpson(fm, frm, fb, b - m);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, mu, sigma, radius) +
         adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, mu, sigma, radius);
}

}  // namespace

void VelocityStats::push(double observed_speed) {
  samples_[next_] = observed_speed;
  next_ = (next_ + 1) % kWindow;
  count_ = std::min(count_ + 1, kWindow);
  recompute();
}

void VelocityStats::recompute() {
  double sum = 0.0;
  for (std::size_t i = 0; i < count_; ++i) sum += samples_[i];
  mean_ = sum / static_cast<double>(count_);
  double var = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    double d = samples_[i] - mean_;
    var += d * d;
  }
  deviation_ = std::sqrt(var / static_cast<double>(count_));
}

double connection_duration(const Kinematics& a, const Kinematics& b, double radius) {
  Vec2 dd = b.position - a.position;
  Vec2 dv = b.velocity - a.velocity;
  double dd2 = norm_squared(dd);
  double r2 = radius * radius;
  if (dd2 > r2) {
    throw std::invalid_argument("vehicles are not within communication range");
  }
  if (dv == Vec2{0.0, 0.0}) {
    return kInf;
  }
  if (dd2 == r2 && dot(dd, dv) >= 0.0) {
    return 0.0;  // on the boundary and not approaching
  }
  double A = norm_squared(dv);
  double B = 2.0 * dot(dd, dv);
  double C = dd2 - r2;  // <= 0, so the discriminant is at least B^2
  double disc = B * B - 4.0 * A * C;
  return (-B + std::sqrt(disc)) / (2.0 * A);
}

double link_reliability(double duration, double mu, double sigma, double radius) {
  if (duration < 0.0) {
    throw std::invalid_argument("link duration must be nonnegative");
  }
  if (duration == 0.0) return 0.0;
  if (sigma <= 0.0) return 1.0;  // deterministic speeds: the bound is certain

  // Seed panel boundaries where the speed difference crosses mu + j*sigma;
  // the density's mass lives there and a blind bisection of a wide interval
  // could step right over it.
  std::vector<double> cuts{0.0, duration};
  for (int j = -8; j <= 8; ++j) {
    double u = mu + j * sigma;
    if (u <= 0.0) continue;
    double t = 2.0 * radius / u;
    if (t > 0.0 && t < duration) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double value = 0.0;
  double panel_tol = kQuadratureTol / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i];
    double b = cuts[i + 1];
    double fa = duration_density(a, mu, sigma, radius);
    double fm = duration_density(0.5 * (a + b), mu, sigma, radius);
    double fb = duration_density(b, mu, sigma, radius);
    double whole = simpson(fa, fm, fb, b - a);
    value += adaptive_simpson(a, b, fa, fm, fb, whole, panel_tol, kQuadratureMaxDepth, mu, sigma,
                              radius);
  }
  return std::clamp(value, 0.0, 1.0);
}

double link_reliability(double duration, const VelocityStats& a, const VelocityStats& b,
                        double radius) {
  double sigma = std::hypot(a.deviation(), b.deviation());
  return link_reliability(duration, a.mean() - b.mean(), sigma, radius);
}

double expected_lifetime(double duration, double reliability) {
  if (reliability < 0.0 || reliability > 1.0) {
    throw std::invalid_argument("reliability must lie in [0, 1]");
  }
  if (reliability == 0.0) return 0.0;
  return reliability * duration;
}

}  // namespace btsc
