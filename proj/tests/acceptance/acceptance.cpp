// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes or the only failures are the
// ones listed in kKnownUnattainable; --strict makes any failure fatal.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "checks.hpp"
#include "oracles.hpp"
#include "ssflab/birman_schwinger.hpp"
#include "ssflab/convergence.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/spectra.hpp"
#include "ssflab/ssf.hpp"

using namespace ssflab;

namespace {

// The high-energy criterion asks for an HS decay exponent near 1/2 and
// |det(I + K(-1e4)) - 1| < 1e-2. For bounded V the HS norm decays like
// E^{-3/4} and det - 1 ~ tr K = int V / (2 sqrt E) = -0.02 at E = 1e4, so
// neither can hold for the square well.
const std::set<int> kKnownUnattainable{3};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0.0, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const PotentialSpec& well() {
  static const PotentialSpec v = PotentialSpec::square_well(1, 2.0, 1.0);
  return v;
}

PotentialSpec mixed() {
  return PotentialSpec::sampled(1, {-3.0, -1.5, -0.5, 0.5, 1.5, 3.0}, {0.0, -2.0, -1.0, 1.5, 0.8, 0.0});
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

double identity_error(const Eigen::MatrixXcd& m) {
  const cplx d = matrix_det(m);
  return std::abs(matrix_det2(m) * std::exp(m.trace()) - d) / std::abs(d);
}

Verdict kernel_exactness() {
  const auto r = cli::kernel_check(20240601, 100);
  const bool ok = r.max_rel_error <= 1e-10 && r.seconds < 1.0 && r.interval_monotonicity.holds &&
                  r.ball_monotonicity.holds;
  return {ok, fmt("max rel %.2e over 100 cases in %.3f s", r.max_rel_error, r.seconds)};
}

Verdict determinant_identity() {
  double worst = 0.0;
  std::size_t count = 0;
  auto check = [&](const BSOperator& op) {
    worst = std::max(worst, identity_error(op.matrix()));
    ++count;
  };
  const std::vector<cplx> energies{{0.0, 1.0}, {0.0, -1.0}, {-1.0, 0.0}, {-25.0, 0.0}, {5.0, 0.01},
                                   {-1.0, 1.0}, {2.0, 0.5}, {-1e4, 0.0}};
  for (const auto& v : {well(), mixed(), PotentialSpec::gaussian(1, -3.0, 0.7, 4.0)}) {
    const auto pair = factorize(v);
    for (int per_panel : {16, 64})
      for (cplx z : energies) {
        const Energy e = Energy::off_axis(z);
        check(assemble(KernelId::full_space(1), pair, default_grid(pair, per_panel), e));
        check(assemble(KernelId::interval(-5.0, 5.0), pair, default_grid(pair, per_panel), e));
      }
  }
  const auto v3 = PotentialSpec::square_well(3, 5.0, 1.0);
  const auto pair3 = factorize(v3);
  for (cplx z : energies) {
    const Energy e = Energy::off_axis(z);
    for (const auto& op : assemble_channels(KernelId::full_space(3), pair3, default_grid(pair3, 64), e, 12))
      check(op);
    for (const auto& op : assemble_channels(KernelId::ball(3, 5.0), pair3, default_grid(pair3, 64), e, 12))
      check(op);
  }
  return {worst <= 1e-12, fmt("max rel %.2e over %g matrices", worst, double(count))};
}

Verdict high_energy() {
  const auto pair = factorize(well());
  std::vector<double> lx, ly;
  cplx det_far = 0.0;
  for (double E : {10.0, 100.0, 1e3, 1e4}) {
    const auto op = assemble(KernelId::full_space(1), pair, default_grid(pair), Energy::off_axis(-E));
    lx.push_back(std::log(E));
    ly.push_back(std::log(op.hs_norm()));
    if (E == 1e4) det_far = fredholm_det(op);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double alpha = -sxy / sxx;
  const double gap = std::abs(det_far - 1.0);
  const bool ok = alpha >= 0.45 && alpha <= 0.55 && gap < 1e-2;
  return {ok, fmt("HS exponent %.4f (window [0.45, 0.55]), |det(-1e4) - 1| = %.4e (limit 1e-2); "
                  "trace int V / (2 sqrt E) = %.4e",
                  alpha, gap, well().integral() / (2.0 * 100.0))};
}

Verdict pipeline_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto lam = linspace(-2.0, 10.0, 241);
  const auto a = ssf_det(well(), KernelId::full_space(1), lam);
  const auto b = ssf_det2(well(), KernelId::full_space(1), lam);
  const double e0 = ground_state_energy(well(), -40.0, 40.0);
  double sup = 0.0, plateau = 0.0;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (a.reliable[i] && b.reliable[i]) sup = std::max(sup, std::abs(a.values[i] - b.values[i]));
    if (lam[i] > e0 + 0.02 && lam[i] < -0.02)
      plateau = std::max({plateau, std::abs(a.values[i] + 1.0), std::abs(b.values[i] + 1.0)});
  }
  const double t = seconds_since(t0);
  return {sup <= 2e-3 && plateau <= 0.02 && t < 60.0,
          fmt("sup |det - det2| = %.2e, plateau deviation %.2e, %.1f s", sup, plateau, t)};
}

Verdict trace_formula() {
  const double a = -20.0, b = 20.0, L = 400.0;
  const cplx z{0.0, 1.0};
  const auto curve = counting_curve(well(), DomainSpec::interval(a, b), L);

  // g = (lambda^2 + 1) / (lambda - z)^2 turns the weighted integral into int xi (lambda - z)^-2.
  TestFunction g;
  g.name = "trace";
  g.evaluate = [z](double l) { return (l * l + 1.0) / ((l - z) * (l - z)); };
  g.tail_sup = [](double) { return 1.0; };
  const auto w = integrate_weighted(curve, g);
  const cplx lhs = -w.value;

  // Eigenvalue sums below L, plus the boundary term of the truncated integral.
  cplx rhs = 0.0;
  const auto ev = interval_eigenvalues(well(), a, b, L);
  const auto ev0 = free_interval_eigenvalues(a, b, L);
  for (double e : ev) rhs += 1.0 / (e - z);
  for (double e : ev0) rhs -= 1.0 / (e - z);
  const double xi_L = double(ev0.size()) - double(ev.size());
  rhs += xi_L / (L - z);

  const double rel = std::abs(lhs - rhs) / std::abs(rhs);
  return {rel <= 1e-4, fmt("relative error %.2e, |lhs| = %.6f, tail bound %.1e", rel, std::abs(lhs), w.tail_bound)};
}

const SsfCurve& well_limit() {
  static const SsfCurve c = limit_curve(well(), 400.0);
  return c;
}

Verdict weak_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<TestFunction> tests{TestFunction::bump(1.0, 2.0), TestFunction::gaussian(1.0, 1.0),
                                  TestFunction::arctan(), TestFunction::constant(),
                                  TestFunction::indicator(-1.0, 4.0)};
  for (int m = 0; m <= 2; ++m)
    for (int n = 0; n <= 2; ++n)
      if (m + n >= 1) tests.push_back(TestFunction::resolvent_monomial(m, n));
  const auto seq = DomainSequence::symmetric_boxes({10.0, 20.0, 40.0});
  const auto r = weak_convergence_report(seq, well(), well_limit(), tests);
  bool ok = true;
  double worst_ratio = 0.0;
  std::string failing;
  for (const auto& s : r.series) {
    const double ratio = s.final_error / std::max(s.first_error, 1e-300);
    worst_ratio = std::max(worst_ratio, ratio);
    const bool good = s.monotone && s.final_error <= 0.5 * s.first_error;
    if (!good) failing += " " + s.name;
    ok = ok && good;
  }
  const double t = seconds_since(t0);
  ok = ok && t < 600.0;
  return {ok, fmt("%g series, worst final/first %.2e, %.1f s", double(r.series.size()), worst_ratio, t) +
                  (failing.empty() ? "" : ", failing:" + failing)};
}

Verdict total_mass_convergence() {
  const auto r = total_mass_report(DomainSequence::symmetric_boxes({10.0, 20.0, 40.0}), well());
  bool ok = !r.series.empty();
  std::string text;
  for (const auto& s : r.series) {
    ok = ok && s.monotone;
    if (!text.empty()) text += "; ";
    text += s.name + fmt(" %.2e -> %.2e", s.first_error, s.final_error);
  }
  return {ok, text};
}

Verdict cesaro() {
  const auto plateau = cesaro_limit(well(), -0.05, {25.0, 50.0, 100.0, 200.0});
  const double at200 = plateau.averages.back();
  const auto one = cesaro_limit(well(), 1.0, {25.0, 50.0, 100.0, 200.0, 400.0});
  bool decreasing = true;
  for (std::size_t i = 1; i < one.errors.size(); ++i) decreasing = decreasing && one.errors[i] < one.errors[i - 1];
  const bool ok = std::abs(at200 + 1.0) <= 0.1 && decreasing;
  return {ok, fmt("average at lambda = -0.05, R = 200: %.4f; errors at lambda = 1: %.2e -> %.2e", at200,
                  one.errors.front(), one.errors.back())};
}

Verdict monotonicity_and_chain_rule() {
  const auto lam = linspace(-2.5, 15.0, 71);
  const auto bump = PotentialSpec::gaussian(1, 1.0, 1.0, 4.0);
  const auto box = DomainSpec::interval(-15.0, 15.0);
  bool exact = true;
  for (double v : ssf_counting(bump, box, lam).values) exact = exact && v >= 0.0;
  for (double v : ssf_counting(well(), box, lam).values) exact = exact && v <= 0.0;
  double det_slack = 0.0;
  for (double v : ssf_det(bump, KernelId::full_space(1), lam).values) det_slack = std::max(det_slack, -v);
  for (double v : ssf_det(well(), KernelId::full_space(1), lam).values) det_slack = std::max(det_slack, v);

  const auto counting = chain_rule_check(mixed(), box, lam);
  const auto det = chain_rule_check(mixed(), lam);
  const bool ok = exact && det_slack <= 1e-2 && counting.residual == 0.0 && counting.plus_nonnegative &&
                  counting.minus_nonnegative && det.residual <= 5e-3 && det.plus_nonnegative &&
                  det.minus_nonnegative;
  return {ok, std::string("counting signs ") + (exact ? "exact" : "violated") +
                  fmt("; det sign slack %.1e; chain residual counting %g, det %.2e", det_slack,
                      counting.residual, det.residual)};
}

Verdict counting_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0;
  const int n = 4000;
  for (int trial = 0; trial < 20; ++trial) {
    const double depth = 0.5 + 6.0 * u(rng), half = 0.3 + 1.5 * u(rng);
    PotentialSpec v = PotentialSpec::zero(1);
    switch (trial % 3) {
      case 0: v = PotentialSpec::square_well(1, depth, half); break;
      case 1: v = PotentialSpec::gaussian(1, -depth, half, 4.0 * half); break;
      default:
        v = PotentialSpec::sampled(1, {-2.0 * half, -half, 0.0, half, 2.0 * half},
                                   {0.0, -depth, 0.5 * depth, -0.7 * depth, 0.0});
    }
    const double a = -4.0 - 4.0 * u(rng), b = 4.0 + 4.0 * u(rng);
    const double h = (b - a) / (n + 1);
    const auto fd = oracle::fd_eigenvalues([&](double x) { return v(x); }, a, b, n);
    // lambda is redrawn while it lies within the finite-difference error of an
    // oracle eigenvalue, where the oracle itself cannot decide the count.
    double lambda = 0.0;
    for (;;) {
      lambda = -depth + (depth + 20.0) * u(rng);
      const double margin = 1e-3 + 10.0 * h * h * (lambda + depth) * (lambda + depth) / 12.0;
      double gap = 1e300;
      for (Eigen::Index i = 0; i < fd.size(); ++i) gap = std::min(gap, std::abs(fd[i] - lambda));
      if (gap > margin) break;
    }
    agree += count_interval(v, a, b, lambda).count == oracle::count_below(fd, lambda) ? 1 : 0;
  }
  return {agree == 20, fmt("%g of 20 cases equal", agree)};
}

Verdict radial_3d() {
  long mismatches = 0, cases = 0;
  for (double R : {1.0, 2.0, 3.5, 5.0})
    for (double lambda : {3.0, 10.0, 25.0, 50.0, 120.0}) {
      ++cases;
      mismatches += count_ball_radial(PotentialSpec::zero(3), R, lambda).count != oracle::free_ball_count(R, lambda);
    }

  const auto v = PotentialSpec::square_well(3, 5.0, 1.0);
  const auto pair = factorize(v);
  double change = 0.0;
  for (cplx z : {cplx{-1.0, 0.0}, cplx{0.0, 1.0}, cplx{2.0, 0.5}}) {
    const Energy e = Energy::off_axis(z);
    const auto g = default_grid(pair, 64);
    const auto base = det2_radial(KernelId::full_space(3), pair, g, e);
    const auto more = det2_radial_fixed(KernelId::full_space(3), pair, g, e, base.l_max + 20);
    const auto finer = det2_radial_fixed(KernelId::full_space(3), pair, g.refined(2), e, base.l_max);
    const auto same = det2_radial_fixed(KernelId::full_space(3), pair, g, e, base.l_max);
    change = std::max({change, std::abs(more.log_value - base.log_value),
                       std::abs(finer.log_value - same.log_value)});
  }

  const auto r = determinant_convergence(DomainSequence::balls({5.0, 10.0, 20.0}), v, Energy::off_axis(-1.0));
  bool decreasing = !r.series.empty();
  for (const auto& s : r.series) decreasing = decreasing && s.monotone && s.final_error < s.first_error;
  const bool ok = mismatches == 0 && change < 1e-6 && decreasing;
  return {ok, fmt("ball counts %g/%g equal, det2 change %.2e, ", double(cases - mismatches), double(cases), change) +
                  (decreasing ? "ball determinant errors decreasing" : "ball determinant errors not decreasing")};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--strict") == 0) strict = true;

  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "kernel exactness", kernel_exactness},
      {2, "determinant identity", determinant_identity},
      {3, "high-energy limits", high_energy},
      {4, "pipeline cross-agreement", pipeline_agreement},
      {5, "trace formula", trace_formula},
      {6, "weak convergence", weak_convergence},
      {7, "total-mass convergence", total_mass_convergence},
      {8, "Cesaro averages", cesaro},
      {9, "monotonicity and chain rule", monotonicity_and_chain_rule},
      {10, "counting oracle equivalence", counting_oracle},
      {11, "3D radial", radial_3d},
  };

  int failed = 0, unexpected = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const bool known = !v.pass && kKnownUnattainable.count(c.id) > 0;
    std::printf("%s %2d %s: %s [%.1f s]%s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                seconds_since(t0), known ? " (known unattainable)" : "");
    std::fflush(stdout);
    if (!v.pass) {
      ++failed;
      if (!known) ++unexpected;
    }
  }
  std::printf("%d of %zu criteria pass", int(criteria.size()) - failed, criteria.size());
  if (failed > unexpected) std::printf(", %d known unattainable", failed - unexpected);
  std::printf("\n");
  return (strict ? failed : unexpected) == 0 ? 0 : 1;
}
