#include "ssflab/spectra.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ssflab/errors.hpp"

namespace ssflab {
namespace {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 1>;
constexpr double kPi = std::numbers::pi;

bool piecewise_constant(const PotentialSpec& V) {
  return std::holds_alternative<ZeroProfile>(V.profile()) ||
         std::holds_alternative<SquareWell>(V.profile());
}

// Piece boundaries on [lo, hi]: breakpoints of V plus a cap on piece length
// when V varies inside a piece.
std::vector<double> pieces(const PotentialSpec& V, double lo, double hi, double max_len) {
  std::vector<double> cuts{lo};
  for (double x : V.breakpoints())
    if (x > lo && x < hi) cuts.push_back(x);
  cuts.push_back(hi);
  if (!piecewise_constant(V)) {
    std::vector<double> fine{lo};
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      const double len = cuts[i] - cuts[i - 1];
      const int m = std::max(1, int(std::ceil(len / max_len)));
      for (int j = 1; j <= m; ++j) fine.push_back(cuts[i - 1] + len * j / m);
    }
    cuts = std::move(fine);
  }
  return cuts;
}

// Rescales the Pruefer angle when the scale changes from s_old to s_new,
// keeping the multiple of pi (zeros of u sit at multiples of pi).
double rescale(double theta, double s_old, double s_new) {
  const double m = std::floor(theta / kPi);
  const double phi = theta - m * kPi;
  return m * kPi + std::atan2(s_new * std::sin(phi), s_old * std::cos(phi));
}

// Exact step over a piece where q is constant. Oscillatory pieces rotate the
// angle in the scale sqrt(kappa); otherwise (u, u') goes through the
// hyperbolic transfer matrix, where at most one zero can be crossed.
double constant_step(double theta, double len, double S, double kappa) {
  if (kappa > 0.0) {
    const double w = std::sqrt(kappa);
    return rescale(rescale(theta, S, w) + w * len, w, S);
  }
  const double u = std::sin(theta) / S, du = std::cos(theta);
  double u1, du1;
  if (kappa == 0.0) {
    u1 = u + du * len;
    du1 = du;
  } else {
    const double mu = std::sqrt(-kappa);
    const double e = std::exp(-2.0 * mu * len);
    const double ch = 0.5 * (1.0 + e), sh = 0.5 * (1.0 - e);  // scaled by exp(-mu len)
    u1 = u * ch + du * sh / mu;
    du1 = u * mu * sh + du * ch;
  }
  const double base = std::floor(theta / kPi) * kPi;
  const double phi = std::atan2(S * u1, du1);
  double step = std::fmod(phi - base, 2.0 * kPi);
  if (step < 0.0) step += 2.0 * kPi;
  return base + step;
}

// Integrates theta' = S cos^2 + (lambda - q(x)) / S sin^2 over [s, e] with
// constant S. q_const marks q constant on the piece.
template <class Q>
double advance(double theta, double s, double e, double S, double lambda, const Q& q,
               bool q_const, double tol) {
  if (!(e > s)) return theta;
  if (q_const) return constant_step(theta, e - s, S, lambda - q(0.5 * (s + e)));
  State y{theta};
  auto rhs = [&](const State& t, State& dt, double x) {
    const double c = std::cos(t[0]), sn = std::sin(t[0]);
    dt[0] = S * c * c + (lambda - q(x)) / S * sn * sn;
  };
  const double dt0 = std::min(e - s, 0.1 / (S + std::sqrt(std::abs(lambda - q(0.5 * (s + e))))));
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(tol, tol), rhs, y,
                          s, e, dt0);
  return y[0];
}

double local_scale(double lambda, double q) { return std::sqrt(std::max(lambda - q, 1.0)); }

struct Sweep {
  double theta;
  double last_scale;
};

// Runs the Pruefer angle across cuts starting from theta0 at cuts.front()
// with scale s0. Returns angle expressed in the given final scale.
template <class Q>
Sweep sweep(const std::vector<double>& cuts, double theta0, double s0, double lambda, const Q& q,
            bool q_const, double tol) {
  double theta = theta0, scale = s0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double s = cuts[i - 1], e = cuts[i];
    const double S = local_scale(lambda, q(0.5 * (s + e)));
    theta = rescale(theta, scale, S);
    scale = S;
    theta = advance(theta, s, e, S, lambda, q, q_const, tol);
  }
  return {theta, scale};
}

long count_from_angle(double theta) { return std::max(0L, long(std::ceil(theta / kPi)) - 1); }

bool near_multiple_of_pi(double theta) {
  const double r = theta / kPi;
  return std::abs(r - std::round(r)) < 1e-6 && std::round(r) >= 1.0;
}

double potential_floor(const PotentialSpec& V) { return std::min(0.0, V.min_value()); }
double potential_ceiling(const PotentialSpec& V) { return std::max(0.0, V.max_value()); }

// Root of f on [lo, hi] (f increasing), with the bracket widened if rounding
// makes the end signs disagree.
template <class F>
double increasing_root(const F& f, double lo, double hi, const char* op) {
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 60 && flo > 0.0; ++i) {
    const double step = std::max(1e-9, 1e-9 * std::abs(lo)) * std::pow(2.0, i);
    lo -= step;
    flo = f(lo);
  }
  for (int i = 0; i < 60 && fhi < 0.0; ++i) {
    const double step = std::max(1e-9, 1e-9 * std::abs(hi)) * std::pow(2.0, i);
    hi += step;
    fhi = f(hi);
  }
  if (flo > 0.0 || fhi < 0.0) throw NumericalError(op, "could not bracket eigenvalue");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                             boost::math::tools::eps_tolerance<double>(44), iters);
  return 0.5 * (r.first + r.second);
}

double channel_start(int ell, double radius, double lambda, double v0) {
  if (ell == 0) return 0.0;
  return std::min(0.25 * radius, 0.05 * (ell + 1) / std::sqrt(std::abs(lambda - v0) + 1.0));
}

}  // namespace

DomainSpec DomainSpec::interval(double a, double b) {
  DomainSpec d;
  d.kind = Kind::interval;
  d.dimension = 1;
  d.a = a;
  d.b = b;
  d.validate();
  return d;
}

DomainSpec DomainSpec::ball(double radius) {
  DomainSpec d;
  d.kind = Kind::ball;
  d.dimension = 3;
  d.radius = radius;
  d.validate();
  return d;
}

void DomainSpec::validate() const {
  if (kind == Kind::interval) {
    if (!(std::isfinite(a) && std::isfinite(b) && a < b))
      throw std::invalid_argument("domain: interval needs finite a < b");
    if (dimension != 1) throw std::invalid_argument("domain: interval must be one-dimensional");
  } else {
    if (!(std::isfinite(radius) && radius > 0.0))
      throw std::invalid_argument("domain: ball radius must be positive");
    if (dimension != 3) throw std::invalid_argument("domain: ball must be three-dimensional");
  }
}

double DomainSpec::size() const { return kind == Kind::interval ? b - a : radius; }

bool DomainSpec::contains(const DomainSpec& inner) const {
  if (kind != inner.kind) return false;
  if (kind == Kind::interval) return a <= inner.a && inner.b <= b;
  return inner.radius <= radius;
}

std::string DomainSpec::describe() const {
  std::ostringstream s;
  s.precision(17);
  if (kind == Kind::interval) s << "interval(" << a << "," << b << ")";
  else s << "ball(" << radius << ")";
  return s.str();
}

double prufer_angle(const PotentialSpec& V, double a, double b, double lambda,
                    const PruferOptions& options) {
  if (!(a < b)) throw std::invalid_argument("prufer_angle: need a < b");
  const auto cuts = pieces(V, a, b, 0.5);
  auto q = [&](double x) { return V(x); };
  const double s0 = local_scale(lambda, q(0.5 * (cuts[0] + cuts[1])));
  return sweep(cuts, 0.0, s0, lambda, q, piecewise_constant(V), options.tolerance).theta;
}

CountResult count_interval(const PotentialSpec& V, double a, double b, double lambda,
                           const PruferOptions& options) {
  if (V.dimension() != 1) throw std::invalid_argument("count_interval: potential must be 1D");
  if (!std::isfinite(lambda)) throw std::invalid_argument("count_interval: lambda not finite");
  CountResult out;
  out.lambda = lambda;
  const double theta = prufer_angle(V, a, b, lambda, options);
  out.count = count_from_angle(theta);
  if (near_multiple_of_pi(theta)) {
    const long below = count_from_angle(prufer_angle(V, a, b, lambda - options.coincidence, options));
    const long above = count_from_angle(prufer_angle(V, a, b, lambda + options.coincidence, options));
    if (below != above) {
      out.ambiguous = true;
      out.count = below;
      out.alternative = above;
    }
  }
  return out;
}

double ground_state_energy(const PotentialSpec& V, double a, double b, bool require_bound) {
  const double mu1 = (kPi / (b - a)) * (kPi / (b - a));
  double lo = mu1 + potential_floor(V) - 1e-6, hi = mu1 + potential_ceiling(V) + 1e-6;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (count_interval(V, a, b, mid).count >= 1) hi = mid;
    else lo = mid;
  }
  const double e0 = 0.5 * (lo + hi);
  if (require_bound && !(e0 < 0.0))
    throw NoBoundStateError("ground_state_energy", "no negative Dirichlet eigenvalue");
  return e0;
}

std::vector<double> free_interval_eigenvalues(double a, double b, double lambda_max) {
  std::vector<double> out;
  const double step = kPi / (b - a);
  for (long n = 1;; ++n) {
    const double e = (n * step) * (n * step);
    if (!(e < lambda_max)) break;
    out.push_back(e);
  }
  return out;
}

long free_interval_count(double a, double b, double lambda) {
  if (!(lambda > 0.0)) return 0;
  const double x = std::sqrt(lambda) * (b - a) / kPi;
  long n = long(std::floor(x));
  if (double(n) == x) --n;
  return n;
}

std::vector<double> interval_eigenvalues(const PotentialSpec& V, double a, double b,
                                         double lambda_max, const PruferOptions& options) {
  const long n_total = count_interval(V, a, b, lambda_max, options).count;
  std::vector<double> out;
  out.reserve(std::size_t(n_total));
  const double lo_shift = potential_floor(V), hi_shift = potential_ceiling(V);
  const double step = kPi / (b - a);
  const bool free = V.is_zero();
  for (long n = 1; n <= n_total; ++n) {
    const double mu = (n * step) * (n * step);
    if (free) {
      out.push_back(mu);
      continue;
    }
    auto f = [&](double l) { return prufer_angle(V, a, b, l, options) - n * kPi; };
    double lo = mu + lo_shift, hi = mu + hi_shift;
    if (!out.empty()) lo = std::max(lo, out.back());
    out.push_back(increasing_root(f, lo, hi, "interval_eigenvalues"));
  }
  return out;
}

std::vector<double> bound_states_1d(const PotentialSpec& V, double threshold) {
  if (V.dimension() != 1) throw std::invalid_argument("bound_states_1d: potential must be 1D");
  std::vector<double> out;
  if (V.is_zero() || V.min_value() >= 0.0) return out;
  const double lo = V.support_lo(), hi = V.support_hi();
  const auto cuts = pieces(V, lo, hi, 0.5);
  auto q = [&](double x) { return V(x); };
  const bool qc = piecewise_constant(V);
  // theta(hi) minus the angle of the solution decaying to the right, starting
  // from the solution decaying to the left. Increasing in lambda.
  auto mismatch = [&](double lambda) {
    const double kappa = std::sqrt(-lambda);
    const double s0 = local_scale(lambda, q(0.5 * (cuts[0] + cuts[1])));
    const double theta0 = std::atan2(s0, kappa);
    const Sweep r = sweep(cuts, theta0, s0, lambda, q, qc, 1e-11);
    const double theta = rescale(r.theta, r.last_scale, 1.0);
    return theta - (kPi - std::atan(1.0 / kappa));
  };
  const double top = -threshold;
  const double m_top = mismatch(top);
  const long n_states = m_top > 0.0 ? long(std::ceil(m_top / kPi)) : 0;
  const double floor_v = V.min_value();
  for (long n = 0; n < n_states; ++n) {
    auto f = [&](double l) { return mismatch(l) - n * kPi; };
    double left = out.empty() ? floor_v : out.back();
    out.push_back(increasing_root(f, left, top, "bound_states_1d"));
  }
  return out;
}

namespace {

double channel_angle(const PotentialSpec& V, int ell, double radius, double lambda,
                     const PruferOptions& options) {
  const double l2 = double(ell) * (ell + 1);
  auto q = [&](double r) { return ell == 0 ? V(r) : l2 / (r * r) + V(r); };
  const double r0 = channel_start(ell, radius, lambda, V(0.0));
  std::vector<double> cuts{r0};
  std::vector<double> base{r0};
  for (double x : V.breakpoints())
    if (x > r0 && x < radius) base.push_back(x);
  base.push_back(radius);
  for (std::size_t i = 1; i < base.size(); ++i) {
    double r = base[i - 1];
    while (r < base[i]) {
      double next = std::min(base[i], r + 0.5);
      if (ell > 0) next = std::min(next, std::max(2.0 * r, r + 1e-3));
      cuts.push_back(next);
      r = next;
    }
  }
  const bool qc = ell == 0 && piecewise_constant(V);
  const double s0 = local_scale(lambda, q(0.5 * (cuts[0] + cuts[1])));
  double theta0 = 0.0;
  if (ell > 0) {
    const double log_deriv = (ell + 1) / r0 - (lambda - V(0.0)) * r0 / (2 * ell + 3);
    theta0 = std::atan2(s0, log_deriv);
  }
  return sweep(cuts, theta0, s0, lambda, q, qc, options.tolerance).theta;
}

int channel_cutoff(const PotentialSpec& V, double radius, double lambda) {
  const double need = (lambda - potential_floor(V)) * radius * radius;
  int ell = 0;
  while (double(ell) * (ell + 1) < need) ++ell;
  return ell;
}

}  // namespace

CountResult count_radial_channel(const PotentialSpec& V, int ell, double radius, double lambda,
                                 const PruferOptions& options) {
  if (!V.radial()) throw std::invalid_argument("count_radial_channel: potential must be radial");
  if (ell < 0 || !(radius > 0.0)) throw std::invalid_argument("count_radial_channel: bad channel");
  CountResult out;
  out.lambda = lambda;
  const double theta = channel_angle(V, ell, radius, lambda, options);
  out.count = count_from_angle(theta);
  if (near_multiple_of_pi(theta)) {
    const long below = count_from_angle(channel_angle(V, ell, radius, lambda - options.coincidence, options));
    const long above = count_from_angle(channel_angle(V, ell, radius, lambda + options.coincidence, options));
    if (below != above) {
      out.ambiguous = true;
      out.count = below;
      out.alternative = above;
    }
  }
  out.per_channel.push_back({ell, out.count});
  return out;
}

std::vector<double> radial_channel_eigenvalues(const PotentialSpec& V, int ell, double radius,
                                               double lambda_max, const PruferOptions& options) {
  const long n_total = count_radial_channel(V, ell, radius, lambda_max, options).count;
  std::vector<double> out;
  const double lo_shift = potential_floor(V), hi_shift = potential_ceiling(V);
  for (long n = 1; n <= n_total; ++n) {
    const double j = boost::math::cyl_bessel_j_zero(ell + 0.5, int(n));
    const double mu = (j / radius) * (j / radius);
    if (V.is_zero()) {
      out.push_back(mu);
      continue;
    }
    auto f = [&](double l) { return channel_angle(V, ell, radius, l, options) - n * kPi; };
    double lo = mu + lo_shift, hi = mu + hi_shift;
    if (!out.empty()) lo = std::max(lo, out.back());
    out.push_back(increasing_root(f, lo, hi, "radial_channel_eigenvalues"));
  }
  return out;
}

CountResult count_ball_radial(const PotentialSpec& V, double radius, double lambda,
                              const PruferOptions& options) {
  if (!V.radial()) throw std::invalid_argument("count_ball_radial: potential must be radial");
  if (!(radius > 0.0)) throw std::invalid_argument("count_ball_radial: radius must be positive");
  CountResult out;
  out.lambda = lambda;
  const int l_max = channel_cutoff(V, radius, lambda) + 2;
  for (int ell = 0; ell <= l_max; ++ell) {
    const CountResult c = count_radial_channel(V, ell, radius, lambda, options);
    out.per_channel.push_back({ell, c.count});
    out.count += (2 * ell + 1) * c.count;
    if (c.ambiguous) {
      out.ambiguous = true;
      out.alternative += (2 * ell + 1) * c.alternative;
    } else {
      out.alternative += (2 * ell + 1) * c.count;
    }
  }
  if (!out.ambiguous) out.alternative = 0;
  return out;
}

std::vector<std::pair<double, int>> ball_eigenvalues(const PotentialSpec& V, double radius,
                                                     double lambda_max,
                                                     const PruferOptions& options) {
  std::vector<std::pair<double, int>> out;
  const int l_max = channel_cutoff(V, radius, lambda_max) + 2;
  for (int ell = 0; ell <= l_max; ++ell)
    for (double e : radial_channel_eigenvalues(V, ell, radius, lambda_max, options))
      out.emplace_back(e, 2 * ell + 1);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<double, int>> bound_states_radial(const PotentialSpec& V, double threshold) {
  if (!V.radial()) throw std::invalid_argument("bound_states_radial: potential must be radial");
  std::vector<std::pair<double, int>> out;
  if (V.is_zero() || V.min_value() >= 0.0) return out;
  const double reach = V.support_hi();
  const double radius = reach + 40.0;
  const double depth = -V.min_value();
  for (int ell = 0; double(ell) * (ell + 1) < depth * reach * reach + 2.0; ++ell)
    for (double e : radial_channel_eigenvalues(V, ell, radius, -threshold))
      out.emplace_back(e, 2 * ell + 1);
  std::sort(out.begin(), out.end());
  return out;
}

CountResult count(const PotentialSpec& V, const DomainSpec& domain, double lambda,
                  const PruferOptions& options) {
  domain.validate();
  if (domain.kind == DomainSpec::Kind::interval)
    return count_interval(V, domain.a, domain.b, lambda, options);
  return count_ball_radial(V, domain.radius, lambda, options);
}

}  // namespace ssflab
