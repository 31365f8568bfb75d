#include "checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "ssflab/birman_schwinger.hpp"
#include "ssflab/special_functions.hpp"
#include "ssflab/spectra.hpp"
#include "ssflab/ssf.hpp"

namespace ssflab::cli {

namespace {

using std::numbers::pi;
using cd = std::complex<double>;

// sqrt with Im >= 0 from the polar form, independent of the library branch code.
cd upper_root(cd z) {
  double t = std::arg(z);
  if (t < 0.0) t += 2.0 * pi;
  return std::polar(std::sqrt(std::abs(z)), 0.5 * t);
}

// sum_{n >= 1} cos(n t) / n^4 for t in [0, 2 pi].
double cos_series4(double t) {
  const double t2 = t * t;
  return pi * pi * pi * pi / 90.0 - pi * pi * t2 / 12.0 + pi * t2 * t / 12.0 - t2 * t2 / 48.0;
}

double rel(cd a, cd b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

cd interval_green_expansion(cd z, double a, double b, double x, double y, int terms) {
  const double L = b - a;
  const double lo = std::min(x, y) - a, hi = b - std::max(x, y);
  const cd g0 = lo * hi / L;
  const double u = pi * (x - a) / L, v = pi * (y - a) / L;
  const double s4 = 0.5 * (cos_series4(std::abs(u - v)) - cos_series4(u + v));
  const double scale = std::pow(L / pi, 4);
  const cd g1 = z * (2.0 / L) * scale * s4;
  cd rest = 0.0;
  for (int n = terms; n >= 1; --n) {
    const double mu = (n * pi / L) * (n * pi / L);
    rest += std::sin(n * u) * std::sin(n * v) / (mu * mu * (mu - z));
  }
  return g0 + g1 + (2.0 / L) * z * z * rest;
}

KernelCheckResult kernel_check(std::uint64_t seed, int samples) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  KernelCheckResult out;
  auto draw_z = [&](double max_modulus) {
    const double r = 0.05 * std::pow(max_modulus / 0.05, unit(rng));
    const double t = 0.02 + (2.0 * pi - 0.04) * unit(rng);
    return std::polar(r, t);
  };
  for (int i = 0; i < samples; ++i) {
    KernelCase c;
    switch (i % 3) {
      case 0: {
        c.kernel = "free1";
        c.eq = "4.6";
        c.z = draw_z(25.0);
        c.x = -5.0 + 10.0 * unit(rng);
        c.y = -5.0 + 10.0 * unit(rng);
        const double d = std::abs(c.x - c.y);
        const cd k = upper_root(c.z);
        c.oracle = cd{0.0, 1.0} / (2.0 * k) * std::exp(cd{0.0, 1.0} * k * d);
        c.value = free_green(1, Energy::off_axis(c.z), {c.x, 0, 0}, {c.y, 0, 0});
        break;
      }
      case 1: {
        c.kernel = "free3";
        c.eq = "4.28";
        c.z = draw_z(25.0);
        const Point p{-1.0 + 2.0 * unit(rng), -1.0 + 2.0 * unit(rng), -1.0 + 2.0 * unit(rng)};
        const Point q{-1.0 + 2.0 * unit(rng), -1.0 + 2.0 * unit(rng), -1.0 + 2.0 * unit(rng)};
        const double d = std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
        c.x = d;
        const cd k = upper_root(c.z);
        c.oracle = std::exp(cd{0.0, 1.0} * k * d) / (4.0 * pi * d);
        c.value = free_green(3, Energy::off_axis(c.z), p, q);
        break;
      }
      default: {
        c.kernel = "interval";
        c.eq = "4.5";
        c.a = -1.0 + 2.0 * unit(rng);
        c.b = c.a + 0.5 + 2.5 * unit(rng);
        const double L = c.b - c.a;
        // Stay away from the Dirichlet eigenvalues (n pi / L)^2.
        for (;;) {
          c.z = draw_z(10.0);
          double gap = 1e300;
          for (int n = 1; n < 8; ++n) gap = std::min(gap, std::abs(c.z - std::pow(n * pi / L, 2)));
          if (gap > 1e-2) break;
        }
        c.x = c.a + L * unit(rng);
        c.y = c.a + L * unit(rng);
        c.oracle = interval_green_expansion(c.z, c.a, c.b, c.x, c.y);
        c.value = interval_dirichlet_green(Energy::off_axis(c.z), c.a, c.b, c.x, c.y);
        break;
      }
    }
    c.rel_error = rel(c.value, c.oracle);
    out.max_rel_error = std::max(out.max_rel_error, c.rel_error);
    out.cases.push_back(c);
  }
  out.interval_monotonicity = green_monotonicity_check(1.0, Interval{0.0, 2.0}, Interval{-1.0, 3.0}, 50);
  std::vector<Point> pts;
  for (int i = 0; i < 40; ++i)
    pts.push_back({0.9 * (unit(rng) - 0.5), 0.9 * (unit(rng) - 0.5), 0.9 * (unit(rng) - 0.5)});
  out.ball_monotonicity = green_monotonicity_check(1.0, Ball{1.0}, Ball{2.0}, pts);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<CheckLine> selfcheck(std::uint64_t seed) {
  std::vector<CheckLine> lines;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  {
    double worst = 0.0;
    bool upper = true;
    for (int i = 0; i < 1000; ++i) {
      const cd z{10.0 * unit(rng), 10.0 * unit(rng)};
      const cd w = principal_sqrt(z);
      upper = upper && w.imag() >= 0.0;
      worst = std::max(worst, rel(w * w, z));
    }
    lines.push_back({"principal_sqrt branch and square", upper && worst <= 1e-14,
                     fmt("max rel %.2e", worst)});
  }
  {
    double worst = 0.0;
    for (int i = 0; i <= 60; ++i) {
      const double y = std::pow(10.0, -6.0 + 0.15 * i);
      const cd h = hankel1_0_scaled(cd{0.0, y});
      const cd k = bessel_k0_scaled(y) * 2.0 / (cd{0.0, 1.0} * pi);
      worst = std::max(worst, rel(h, k));
    }
    lines.push_back({"hankel1_0 vs K0 connection", worst <= 1e-9, fmt("max rel %.2e", worst)});
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double E = std::pow(10.0, 2.0 * (unit(rng) + 1.0));
      const double x = 2.0 * unit(rng), y = 2.0 * unit(rng);
      const double h = interval_dirichlet_green_hyperbolic(E, -2.0, 2.0, x, y);
      const cd g = interval_dirichlet_green(Energy::off_axis(-E), -2.0, 2.0, x, y);
      worst = std::max(worst, rel(g, h));
    }
    lines.push_back({"interval kernel equals hyperbolic form at z = -E", worst <= 1e-12,
                     fmt("max rel %.2e", worst)});
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      Point x{unit(rng), unit(rng), unit(rng)};
      const double nx = std::hypot(x[0], x[1], x[2]);
      for (double& c : x) c *= 2.0 / nx;
      const Point y{0.6 * unit(rng), 0.6 * unit(rng), 0.6 * unit(rng)};
      const cd z{4.0 * unit(rng), 0.5 + std::abs(unit(rng))};
      worst = std::max(worst, std::abs(ball_dirichlet_green_paper(3, Energy::off_axis(z), 2.0, x, y)));
    }
    lines.push_back({"ball image kernel vanishes on the sphere", worst <= 1e-12,
                     fmt("max |G| %.2e", worst)});
  }
  const auto well = PotentialSpec::square_well(1, 2.0, 1.0);
  {
    double worst = 0.0;
    const auto pair = factorize(well);
    for (cd z : {cd{0.0, 1.0}, cd{-1.0, 0.0}, cd{5.0, 0.1}, cd{-25.0, 0.0}}) {
      const auto op = assemble(KernelId::full_space(1), pair, default_grid(pair, 32), Energy::off_axis(z));
      const cd d = matrix_det(op.matrix());
      const cd d2 = matrix_det2(op.matrix()) * std::exp(op.matrix().trace());
      worst = std::max(worst, rel(d2, d));
    }
    lines.push_back({"det2 exp(tr K) = det", worst <= 1e-12, fmt("max rel %.2e", worst)});
  }
  {
    const auto pair = factorize(well);
    double change = 0.0;
    for (cd z : {cd{0.0, 1.0}, cd{0.0, -1.0}, cd{-1.0, 0.0}}) {
      const Energy e = Energy::off_axis(z);
      const auto g = default_grid(pair, 64);
      const double a = std::abs(fredholm_det(assemble(KernelId::full_space(1), pair, g, e)));
      const double b = std::abs(fredholm_det(assemble(KernelId::full_space(1), pair, g.refined(2), e)));
      change = std::max(change, std::abs(a - b));
    }
    lines.push_back({"Nystrom |det| stable under grid doubling", change < 1e-8,
                     fmt("max change %.2e", change)});
  }
  {
    bool ok = true;
    long prev = -1;
    for (int i = 0; i <= 100; ++i) {
      const long n = count_interval(well, -10.0, 10.0, -2.0 + 0.3 * i).count;
      ok = ok && n >= prev;
      prev = n;
    }
    lines.push_back({"counts nondecreasing in lambda", ok, "box (-10, 10)"});
  }
  {
    std::vector<double> lam;
    for (int i = 0; i <= 60; ++i) lam.push_back(-1.5 + 0.25 * i);
    const auto bump = PotentialSpec::gaussian(1, 1.0, 1.0, 4.0);
    const auto c = ssf_counting(bump, DomainSpec::interval(-10.0, 10.0), lam);
    bool integer = true, nonneg = true;
    for (double v : c.values) {
      integer = integer && v == std::round(v);
      nonneg = nonneg && v >= 0.0;
    }
    lines.push_back({"counting curve integer and >= 0 for V >= 0", integer && nonneg,
                     "Gaussian bump, box (-10, 10)"});
  }
  {
    const auto c = ssf_det(well, KernelId::full_space(1), {-3.0, -1.0});
    const double e0 = ground_state_energy(well, -40.0, 40.0);
    const bool ok = std::abs(c.values[0]) < 1e-6 && std::abs(c.values[1] + 1.0) < 2e-2;
    lines.push_back({"det curve: 0 below the spectrum, -1 on the plateau", ok,
                     fmt("xi(-3) = %.2e, e0 = %.6f", c.values[0], e0)});
  }
  return lines;
}

}  // namespace ssflab::cli
