#include "ssflab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ssflab/errors.hpp"

namespace ssflab {
namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

double norm3(const Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

double dist(int n, const Point& x, const Point& y) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

void check_pole(cplx k, double length, const char* op) {
  const cplx kl = k * length;
  if (std::abs(kl.imag()) < 1.0 && std::abs(std::sin(kl)) < 1e-13 * std::abs(kl))
    throw PoleError(op, "energy is a Dirichlet eigenvalue of the free operator");
}

}  // namespace

Energy Energy::off_axis(cplx z) {
  if (z.imag() == 0.0 && z.real() >= 0.0)
    throw BranchError("Energy", "z lies on the cut [0, inf); use Energy::upper_limit");
  return Energy(z, Side::off_axis);
}

Energy Energy::upper_limit(double lambda, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("Energy::upper_limit: epsilon must be > 0");
  return Energy(cplx{lambda, epsilon}, Side::upper_limit);
}

KernelId KernelId::full_space(int dimension) {
  KernelId id{dimension, FullSpace{}};
  id.validate();
  return id;
}

KernelId KernelId::interval(double a, double b) {
  KernelId id{1, Interval{a, b}};
  id.validate();
  return id;
}

KernelId KernelId::ball(int dimension, double radius) {
  KernelId id{dimension, Ball{radius}};
  id.validate();
  return id;
}

void KernelId::validate() const {
  if (dimension < 1 || dimension > 3)
    throw std::invalid_argument("KernelId: dimension must be 1, 2 or 3");
  if (const auto* iv = std::get_if<Interval>(&geometry)) {
    if (dimension != 1) throw std::invalid_argument("KernelId: intervals are one-dimensional");
    if (!(iv->a < iv->b)) throw std::invalid_argument("KernelId: interval requires a < b");
  }
  if (const auto* ball = std::get_if<Ball>(&geometry)) {
    if (dimension == 1) throw std::invalid_argument("KernelId: balls need dimension 2 or 3");
    if (!(ball->radius > 0.0)) throw std::invalid_argument("KernelId: ball requires R > 0");
  }
}

std::string KernelId::describe() const {
  std::ostringstream os;
  os << dimension << "d ";
  if (is_full_space())
    os << "full-space";
  else if (const auto* iv = std::get_if<Interval>(&geometry))
    os << "interval(" << iv->a << "," << iv->b << ")";
  else
    os << "ball(" << std::get<Ball>(geometry).radius << ")";
  return os.str();
}

cplx free_green_1d(cplx k, double distance) {
  return kI / (2.0 * k) * std::exp(kI * k * std::abs(distance));
}

cplx free_green_3d(cplx k, double distance) {
  return std::exp(kI * k * distance) / (4.0 * kPi * distance);
}

cplx free_green_2d(cplx k, double distance) { return kI / 4.0 * hankel1_0(k * distance); }

cplx free_green_radial_profile(int n, cplx k, double r) {
  switch (n) {
    case 1: return free_green_1d(k, r);
    case 2: return free_green_2d(k, r);
    case 3: return free_green_3d(k, r);
    default: throw std::invalid_argument("free_green: dimension must be 1, 2 or 3");
  }
}

cplx free_green(int n, const Energy& z, const Point& x, const Point& y) {
  if (n < 1 || n > 3) throw std::invalid_argument("free_green: dimension must be 1, 2 or 3");
  const double r = dist(n, x, y);
  if (n > 1 && r == 0.0) throw DomainError("free_green", "coincident points x = x'");
  return free_green_radial_profile(n, z.root(), r);
}

cplx interval_dirichlet_green_k(cplx k, double a, double b, double x, double y) {
  if (!(a < b)) throw std::invalid_argument("interval_dirichlet_green: requires a < b");
  if (x < a || x > b || y < a || y > b)
    throw std::invalid_argument("interval_dirichlet_green: points outside [a, b]");
  check_pole(k, b - a, "interval_dirichlet_green");
  const double lo = std::min(x, y), hi = std::max(x, y);
  // Every exponential has a nonnegative real exponent factor times i k, so all
  // are bounded by 1 for Im k >= 0.
  const cplx num = (1.0 - std::exp(2.0 * kI * k * (lo - a))) * (1.0 - std::exp(2.0 * kI * k * (b - hi)));
  const cplx den = 1.0 - std::exp(2.0 * kI * k * (b - a));
  return kI / (2.0 * k) * std::exp(kI * k * (hi - lo)) * num / den;
}

cplx interval_dirichlet_green(const Energy& z, double a, double b, double x, double y) {
  return interval_dirichlet_green_k(z.root(), a, b, x, y);
}

cplx interval_dirichlet_green_diag_dz(cplx k, double a, double b, double x) {
  const double al = x - a, be = b - x, len = b - a;
  const cplx A = std::exp(2.0 * kI * k * al), B = std::exp(2.0 * kI * k * be);
  const cplx C = std::exp(2.0 * kI * k * len);
  const cplx N = (1.0 - A) * (1.0 - B), D = 1.0 - C;
  const cplx dN = -2.0 * kI * al * A * (1.0 - B) - 2.0 * kI * be * B * (1.0 - A);
  const cplx dD = -2.0 * kI * len * C;
  const cplx dk = -kI / (2.0 * k * k) * N / D + kI / (2.0 * k) * (dN / D - N * dD / (D * D));
  return dk / (2.0 * k);
}

double interval_dirichlet_green_hyperbolic(double energy, double a, double b, double x, double y) {
  if (!(energy > 0.0)) throw std::invalid_argument("hyperbolic form needs E > 0");
  const double s = std::sqrt(energy);
  const double lo = std::min(x, y), hi = std::max(x, y);
  const double den = 1.0 - std::exp(-2.0 * s * (b - a));
  const double t1 = (std::exp(s * (lo + hi - 2.0 * b)) - std::exp(s * (2.0 * a + hi - 2.0 * b - lo))) / den;
  const double t2 = (std::exp(s * (2.0 * a - lo - hi)) - std::exp(s * (lo + 2.0 * a - 2.0 * b - hi))) / den;
  return (std::exp(-s * (hi - lo)) - t1 - t2) / (2.0 * s);
}

cplx ball_dirichlet_green_paper(int n, const Energy& z, double radius, const Point& x,
                                const Point& y) {
  if (n != 2 && n != 3)
    throw std::invalid_argument("ball_dirichlet_green_paper: dimension must be 2 or 3");
  if (!(radius > 0.0)) throw std::invalid_argument("ball_dirichlet_green_paper: R must be > 0");
  const double rx = norm3(x), ry = norm3(y);
  if (rx > radius * (1.0 + 1e-15) || ry >= radius)
    throw std::invalid_argument("ball_dirichlet_green_paper: points outside the ball");
  const double direct = dist(n, x, y);
  if (direct == 0.0) throw DomainError("ball_dirichlet_green_paper", "coincident points x = x'");
  // Image distance (|y|/R)|x - R^2 y/|y|^2| = | |y| x / R - R y / |y| |, whose
  // y -> 0 limit is R.
  double image = radius;
  if (ry > 0.0) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = ry * x[i] / radius - radius * y[i] / ry;
      s += d * d;
    }
    image = std::sqrt(s);
  }
  const cplx k = z.root();
  return free_green_radial_profile(n, k, direct) - free_green_radial_profile(n, k, image);
}

cplx radial_free_green(int l, cplx k, double r, double s) {
  if (l < 0) throw std::invalid_argument("radial_free_green: l must be >= 0");
  if (!(r > 0.0) || !(s > 0.0)) throw DomainError("radial_free_green", "radii must be > 0");
  const double lo = std::min(r, s), hi = std::max(r, s);
  const RiccatiLogs a = riccati_logs(l, k * lo);
  const RiccatiLogs b = riccati_logs(l, k * hi);
  return kI / k * std::exp(a.log_j[l] + b.log_h[l]);
}

cplx radial_ball_green(int l, cplx k, double radius, double r, double s) {
  if (l < 0) throw std::invalid_argument("radial_ball_green: l must be >= 0");
  if (!(r > 0.0) || !(s > 0.0) || r > radius || s > radius)
    throw DomainError("radial_ball_green", "radii must lie in (0, R]");
  const double lo = std::min(r, s), hi = std::max(r, s);
  const RiccatiLogs a = riccati_logs(l, k * lo);
  const RiccatiLogs b = riccati_logs(l, k * hi);
  const RiccatiLogs c = riccati_logs(l, k * radius);
  const double scale = std::abs((k * radius).imag());
  if (std::abs(std::exp(c.log_j[l] - scale)) < 1e-13)
    throw PoleError("radial_ball_green", "energy is a Dirichlet eigenvalue of the free channel");
  const cplx ratio = std::exp(b.log_j[l] - b.log_h[l] + c.log_h[l] - c.log_j[l]);
  return kI / k * std::exp(a.log_j[l] + b.log_h[l]) * (1.0 - ratio);
}

MonotonicityReport green_monotonicity_check(double energy, Interval inner, Interval outer,
                                            int samples) {
  if (!(energy > 0.0)) throw std::invalid_argument("green_monotonicity_check: E must be > 0");
  if (inner.a < outer.a || inner.b > outer.b || !(inner.a < inner.b))
    throw std::invalid_argument("green_monotonicity_check: domains must be nested");
  const Energy z = Energy::off_axis(-energy);
  const cplx k = z.root();
  MonotonicityReport rep;
  const double h = (inner.b - inner.a) / samples;
  for (int i = 0; i < samples; ++i) {
    const double x = inner.a + (i + 0.5) * h;
    for (int j = 0; j < samples; ++j) {
      const double y = inner.a + (j + 0.5) * h;
      const double gi = interval_dirichlet_green_k(k, inner.a, inner.b, x, y).real();
      const double go = interval_dirichlet_green_k(k, outer.a, outer.b, x, y).real();
      const double gf = free_green_1d(k, x - y).real();
      const double v = std::max({-gi, gi - go, go - gf, 0.0});
      if (v > rep.worst_violation) {
        rep.worst_violation = v;
        std::ostringstream os;
        os << "x=" << x << " x'=" << y << " inner=" << gi << " outer=" << go << " free=" << gf;
        rep.detail = os.str();
      }
      ++rep.samples;
    }
  }
  rep.holds = rep.worst_violation <= 1e-14;
  return rep;
}

MonotonicityReport green_monotonicity_check(double energy, Ball inner, Ball outer,
                                            const std::vector<Point>& points) {
  if (!(energy > 0.0)) throw std::invalid_argument("green_monotonicity_check: E must be > 0");
  if (!(inner.radius <= outer.radius))
    throw std::invalid_argument("green_monotonicity_check: balls must be nested");
  const Energy z = Energy::off_axis(-energy);
  MonotonicityReport rep;
  for (const Point& x : points) {
    for (const Point& y : points) {
      if (x == y) continue;
      const double gi = ball_dirichlet_green_paper(3, z, inner.radius, x, y).real();
      const double go = ball_dirichlet_green_paper(3, z, outer.radius, x, y).real();
      const double gf = free_green(3, z, x, y).real();
      const double v = std::max({-gi, gi - go, go - gf, 0.0});
      if (v > rep.worst_violation) {
        rep.worst_violation = v;
        std::ostringstream os;
        os << "inner=" << gi << " outer=" << go << " free=" << gf;
        rep.detail = os.str();
      }
      ++rep.samples;
    }
  }
  rep.holds = rep.worst_violation <= 1e-14;
  return rep;
}

}  // namespace ssflab
