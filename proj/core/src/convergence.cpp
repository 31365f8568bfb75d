#include "ssflab/convergence.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ssflab/birman_schwinger.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/parallel.hpp"
#include "ssflab/quadrature.hpp"

namespace ssflab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

// Jump-only curves (counting with steps) ignore their samples.
bool samples_active(const SsfCurve& c) {
  return !(c.method == SsfMethod::counting && !c.jumps.empty());
}

double sample_part(const SsfCurve& c, double lambda) {
  if (!samples_active(c) || c.lambdas.empty()) return 0.0;
  if (lambda < c.lambdas.front() || lambda > c.lambdas.back()) return 0.0;
  const auto it = std::upper_bound(c.lambdas.begin(), c.lambdas.end(), lambda);
  if (it == c.lambdas.end()) return c.values.back();
  const std::size_t i = std::size_t(it - c.lambdas.begin());
  if (i == 0) return c.values.front();
  const double t = (lambda - c.lambdas[i - 1]) / (c.lambdas[i] - c.lambdas[i - 1]);
  return (1.0 - t) * c.values[i - 1] + t * c.values[i];
}

double root_variable(double lambda) {
  return lambda < 0.0 ? -std::sqrt(-lambda) : std::sqrt(lambda);
}

// Cubic in sign(lambda) sqrt|lambda| through the four samples around lambda;
// threshold behaviour is analytic in that variable.
double sample_part_cubic(const SsfCurve& c, double lambda) {
  if (!samples_active(c) || c.lambdas.empty()) return 0.0;
  const std::size_t n = c.lambdas.size();
  if (lambda < c.lambdas.front() || lambda > c.lambdas.back()) return 0.0;
  if (n < 4) return sample_part(c, lambda);
  const std::size_t i =
      std::size_t(std::upper_bound(c.lambdas.begin(), c.lambdas.end(), lambda) - c.lambdas.begin());
  const std::size_t first = std::min(n - 4, i < 2 ? 0 : i - 2);
  const double t = root_variable(lambda);
  std::array<double, 4> nodes;
  for (std::size_t j = 0; j < 4; ++j) nodes[j] = root_variable(c.lambdas[first + j]);
  double s = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    double w = 1.0;
    for (std::size_t m = 0; m < 4; ++m)
      if (m != j) w *= (t - nodes[m]) / (nodes[j] - nodes[m]);
    s += w * c.values[first + j];
  }
  return s;
}

// value_at with a binary search over cumulative jump sums.
class FastCurve {
 public:
  explicit FastCurve(const SsfCurve& c) : curve_(c) {
    double s = 0.0;
    for (const Jump& j : c.jumps) {
      at_.push_back(j.lambda);
      s += j.size;
      cum_.push_back(s);
    }
  }
  double operator()(double lambda) const {
    const auto it = std::lower_bound(at_.begin(), at_.end(), lambda);
    const double steps = it == at_.begin() ? 0.0 : cum_[std::size_t(it - at_.begin()) - 1];
    return steps + sample_part_cubic(curve_, lambda);
  }

 private:
  const SsfCurve& curve_;
  std::vector<double> at_;
  std::vector<double> cum_;
};

bool identically_zero(const SsfCurve& c) {
  if (!c.jumps.empty()) return false;
  return std::all_of(c.values.begin(), c.values.end(), [](double v) { return v == 0.0; });
}

double curve_start(const SsfCurve& c) {
  double s = kInf;
  if (!c.jumps.empty()) s = c.jumps.front().lambda;
  if (samples_active(c) && !c.lambdas.empty()) s = std::min(s, c.lambdas.front());
  return s;
}

double curve_coverage(const SsfCurve& c) {
  if (identically_zero(c)) return kInf;
  if (!c.lambdas.empty()) return c.lambdas.back();
  return c.jumps.back().lambda;
}

using Transform = double (*)(double);
double as_is(double x) { return x; }
double positive_part(double x) { return std::max(x, 0.0); }
double negative_part(double x) { return std::max(-x, 0.0); }

WeightedIntegral integrate_impl(const SsfCurve& curve, const TestFunction& g,
                                const IntegrationOptions& options, Transform transform) {
  if (!g.evaluate) throw std::invalid_argument("integrate_weighted: test function has no evaluator");
  if (!(options.lambda_max > 0.0))
    throw std::invalid_argument("integrate_weighted: lambda_max must be positive");
  WeightedIntegral out;
  out.lambda_max = options.lambda_max;
  if (identically_zero(curve)) return out;
  const double lambda_max = options.lambda_max;
  const bool tail_needed = g.support_hi > lambda_max;
  if (tail_needed && curve_coverage(curve) < lambda_max)
    throw CoverageError("integrate_weighted", "curve ends at " + fmt(curve_coverage(curve)) +
                                                   " below lambda_max " + fmt(lambda_max));
  const FastCurve xi(curve);
  const double lo = std::max(curve_start(curve), g.support_lo);
  const double hi = std::min(lambda_max, g.support_hi);

  if (hi > lo) {
    std::vector<double> cuts{lo, hi};
    for (const Jump& j : curve.jumps)
      if (j.lambda > lo && j.lambda < hi) cuts.push_back(j.lambda);
    if (samples_active(curve))
      for (double l : curve.lambdas)
        if (l > lo && l < hi) cuts.push_back(l);
    for (double b : g.breakpoints)
      if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double re = 0.0, im = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      const double a = cuts[i - 1], b = cuts[i];
      // Jump-only segments carry a constant xi; evaluate it once.
      const bool constant = !samples_active(curve);
      const double xi_mid = transform(xi(0.5 * (a + b)));
      if (constant && xi_mid == 0.0) continue;
      auto integrand = [&](double l) {
        const double x = constant ? xi_mid : transform(xi(l));
        return x / (l * l + 1.0) * g(l);
      };
      re += GK::integrate([&](double l) { return integrand(l).real(); }, a, b, 10, 1e-13);
      im += GK::integrate([&](double l) { return integrand(l).imag(); }, a, b, 10, 1e-13);
    }
    out.value = {re, im};
  }

  if (tail_needed) {
    double envelope = 0.0;
    const double a = 0.5 * lambda_max;
    for (int i = 0; i <= 256; ++i)
      envelope = std::max(envelope, std::abs(transform(xi(a + (lambda_max - a) * i / 256.0))));
    for (const Jump& j : curve.jumps)
      if (j.lambda >= a && j.lambda <= lambda_max) {
        envelope = std::max(envelope, std::abs(transform(xi(j.lambda))));
        envelope = std::max(envelope, std::abs(transform(xi(std::nextafter(j.lambda, kInf)))));
      }
    if (samples_active(curve))
      for (std::size_t i = 0; i < curve.lambdas.size(); ++i)
        if (curve.lambdas[i] >= a && curve.lambdas[i] <= lambda_max)
          envelope = std::max(envelope, std::abs(transform(xi(curve.lambdas[i]))));
    const double sup_g = g.tail_sup ? g.tail_sup(lambda_max) : kInf;
    out.tail_bound = envelope * sup_g * (0.5 * kPi - std::atan(lambda_max));
    if (!(out.tail_bound <= options.tolerance))
      throw CoverageError("integrate_weighted", "tail bound " + fmt(out.tail_bound) +
                                                     " exceeds tolerance " + fmt(options.tolerance) +
                                                     " at lambda_max " + fmt(lambda_max));
  }
  return out;
}

// a - b, with jumps merged and samples interpolated onto the union grid.
SsfCurve difference(const SsfCurve& a, const SsfCurve& b) {
  SsfCurve out;
  out.method = (samples_active(a) || samples_active(b)) ? SsfMethod::det : SsfMethod::counting;
  out.jumps = a.jumps;
  for (Jump j : b.jumps) out.jumps.push_back({j.lambda, -j.size});
  std::stable_sort(out.jumps.begin(), out.jumps.end(),
                   [](const Jump& x, const Jump& y) { return x.lambda < y.lambda; });
  out.anchor = std::min(a.anchor, b.anchor);
  out.pair_id = a.pair_id + " - " + b.pair_id;
  const double cover = std::min(curve_coverage(a), curve_coverage(b));
  if (out.method == SsfMethod::counting) {
    const double lo = std::min(curve_start(a), curve_start(b));
    out.lambdas = {std::isfinite(lo) ? lo - 1.0 : -1.0, cover};
    out.values = {0.0, 0.0};
  } else {
    std::vector<double> grid;
    if (samples_active(a)) grid.insert(grid.end(), a.lambdas.begin(), a.lambdas.end());
    if (samples_active(b)) grid.insert(grid.end(), b.lambdas.begin(), b.lambdas.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    while (!grid.empty() && grid.back() > cover) grid.pop_back();
    for (double l : grid) {
      out.lambdas.push_back(l);
      out.values.push_back(sample_part(a, l) - sample_part(b, l));
    }
  }
  out.reliable.assign(out.lambdas.size(), true);
  out.epsilon_used.assign(out.lambdas.size(), 0.0);
  return out;
}

// Samples of the limit curve on (0, lambda_max].
std::vector<double> limit_grid(double lambda_max) {
  std::vector<double> g;
  for (int i = 0; i < 200; ++i) g.push_back(1e-8 * std::pow(5e6, i / 200.0));
  for (int i = 0; i < 190; ++i) g.push_back(0.05 + 0.005 * i);
  for (int i = 0; i < 360; ++i) g.push_back(1.0 + 0.025 * i);
  for (double l = 10.0; l < lambda_max; l *= 1.01) g.push_back(l);
  g.erase(std::remove_if(g.begin(), g.end(), [&](double l) { return l >= lambda_max; }), g.end());
  g.push_back(lambda_max);
  return g;
}

std::string eq_for(TestFunction::Kind k) {
  return k == TestFunction::Kind::indicator ? "3.85" : "3.84";
}

// Per-domain counting curves covering lambda_max, cached per lambda_max.
class CurveCache {
 public:
  CurveCache(const DomainSequence& seq, const PotentialSpec& V) : seq_(seq), V_(V) {}
  const std::vector<SsfCurve>& at(double lambda_max) {
    auto it = cache_.find(lambda_max);
    if (it != cache_.end()) return it->second;
    std::vector<SsfCurve> curves(seq_.domains.size());
    parallel_for(curves.size(), [&](std::size_t i) {
      curves[i] = counting_curve(V_, seq_.domains[i], lambda_max);
    });
    return cache_.emplace(lambda_max, std::move(curves)).first->second;
  }

 private:
  const DomainSequence& seq_;
  const PotentialSpec& V_;
  std::map<double, std::vector<SsfCurve>> cache_;
};

// Limit integral and per-domain rows, doubling lambda_max up to the cap when
// a tail bound is too large.
ConvergenceSeries run_series(const std::string& name, const std::string& eq,
                             const std::string& kind, const TestFunction& g,
                             const DomainSequence& seq, CurveCache& curves, const SsfCurve& limit,
                             const IntegrationOptions& options, std::vector<std::string>& notes) {
  IntegrationOptions opts = options;
  for (;;) {
    try {
      ConvergenceSeries s;
      s.name = name;
      s.eq = eq;
      s.kind = kind;
      s.resolution = options.resolution;
      const WeightedIntegral L = integrate_impl(limit, g, opts, as_is);
      s.limit = L.value;
      const auto& cs = curves.at(opts.lambda_max);
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const WeightedIntegral I = integrate_impl(cs[i], g, opts, as_is);
        s.rows.push_back({seq.domains[i].describe(), seq.domains[i].size(), I.value,
                          std::abs(I.value - L.value), I.tail_bound + L.tail_bound});
      }
      if (opts.lambda_max != options.lambda_max)
        notes.push_back(name + ": lambda_max raised to " + fmt(opts.lambda_max));
      s.finish();
      return s;
    } catch (const CoverageError&) {
      if (2.0 * opts.lambda_max > opts.lambda_cap || curve_coverage(limit) < 2.0 * opts.lambda_max)
        throw;
      opts.lambda_max *= 2.0;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(TestFunction::Kind k) {
  switch (k) {
    case TestFunction::Kind::compact_support: return "compact_support";
    case TestFunction::Kind::vanishing_at_infinity: return "vanishing_at_infinity";
    case TestFunction::Kind::bounded_continuous: return "bounded_continuous";
    case TestFunction::Kind::indicator: return "indicator";
    case TestFunction::Kind::resolvent_monomial: return "resolvent_monomial";
    case TestFunction::Kind::custom: return "custom";
  }
  return "custom";
}

TestFunction TestFunction::bump(double center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("bump: radius must be positive");
  TestFunction f;
  f.kind = Kind::compact_support;
  f.name = "bump(" + fmt(center) + "," + fmt(radius) + ")";
  f.evaluate = [center, radius](double l) -> cplx {
    const double t = (l - center) / radius;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
  };
  f.support_lo = center - radius;
  f.support_hi = center + radius;
  f.breakpoints = {f.support_lo, center, f.support_hi};
  const double hi = f.support_hi;
  f.tail_sup = [hi](double l) { return l >= hi ? 0.0 : 1.0; };
  return f;
}

TestFunction TestFunction::gaussian(double center, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian: width must be positive");
  TestFunction f;
  f.kind = Kind::vanishing_at_infinity;
  f.name = "gaussian(" + fmt(center) + "," + fmt(width) + ")";
  f.evaluate = [center, width](double l) -> cplx {
    const double t = (l - center) / width;
    return std::exp(-t * t);
  };
  f.breakpoints = {center};
  f.tail_sup = [center, width](double l) {
    if (l <= center) return 1.0;
    const double t = (l - center) / width;
    return std::exp(-t * t);
  };
  return f;
}

TestFunction TestFunction::arctan() {
  TestFunction f;
  f.kind = Kind::bounded_continuous;
  f.name = "arctan";
  f.evaluate = [](double l) -> cplx { return std::atan(l); };
  f.tail_sup = [](double) { return 0.5 * kPi; };
  return f;
}

TestFunction TestFunction::constant(double value) {
  TestFunction f;
  f.kind = Kind::bounded_continuous;
  f.name = "constant(" + fmt(value) + ")";
  f.evaluate = [value](double) -> cplx { return value; };
  f.tail_sup = [value](double) { return std::abs(value); };
  return f;
}

TestFunction TestFunction::indicator(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("indicator: need lo < hi");
  TestFunction f;
  f.kind = Kind::indicator;
  f.name = "indicator[" + fmt(lo) + "," + fmt(hi) + "]";
  f.evaluate = [lo, hi](double l) -> cplx { return (l >= lo && l <= hi) ? 1.0 : 0.0; };
  f.support_lo = lo;
  f.support_hi = hi;
  f.breakpoints = {lo, hi};
  f.tail_sup = [hi](double l) { return l > hi ? 0.0 : 1.0; };
  return f;
}

TestFunction TestFunction::resolvent_monomial(int m, int n) {
  if (m < 0 || n < 0) throw std::invalid_argument("resolvent_monomial: powers must be >= 0");
  TestFunction f;
  f.kind = Kind::resolvent_monomial;
  f.name = "resolvent(" + std::to_string(m) + "," + std::to_string(n) + ")";
  f.evaluate = [m, n](double l) -> cplx {
    return std::pow(cplx{l, 1.0}, -m) * std::pow(cplx{l, -1.0}, -n);
  };
  f.tail_sup = [m, n](double l) {
    return l > 0.0 ? std::pow(l * l + 1.0, -0.5 * (m + n)) : 1.0;
  };
  return f;
}

WeightedMeasureView WeightedMeasureView::from_split(SsfCurve xi, SsfCurve xi_plus,
                                                    SsfCurve xi_minus) {
  WeightedMeasureView v;
  v.source = std::move(xi);
  v.positive = std::move(xi_plus);
  v.negative = std::move(xi_minus);
  return v;
}

WeightedMeasureView WeightedMeasureView::from_parts(SsfCurve xi) {
  WeightedMeasureView v;
  v.positive = xi;
  v.negative = xi;
  v.source = std::move(xi);
  v.pointwise = true;
  return v;
}

double WeightedMeasureView::density_plus(double lambda) const {
  const double x = pointwise ? std::max(source.value_at(lambda), 0.0) : positive.value_at(lambda);
  return x / (lambda * lambda + 1.0);
}

double WeightedMeasureView::density_minus(double lambda) const {
  const double x = pointwise ? std::max(-source.value_at(lambda), 0.0) : negative.value_at(lambda);
  return x / (lambda * lambda + 1.0);
}

DomainSequence DomainSequence::symmetric_boxes(const std::vector<double>& half_widths) {
  DomainSequence s;
  for (double h : half_widths) s.domains.push_back(DomainSpec::interval(-h, h));
  s.limit_tag = "full_line";
  s.validate();
  return s;
}

DomainSequence DomainSequence::balls(const std::vector<double>& radii) {
  DomainSequence s;
  for (double r : radii) s.domains.push_back(DomainSpec::ball(r));
  s.limit_tag = "full_space";
  s.validate();
  return s;
}

void DomainSequence::validate() const {
  if (domains.empty()) throw std::invalid_argument("domain sequence is empty");
  for (std::size_t i = 0; i < domains.size(); ++i) {
    domains[i].validate();
    if (domains[i].kind != domains[0].kind)
      throw std::invalid_argument("domain sequence mixes intervals and balls");
    if (i > 0) {
      if (!domains[i].contains(domains[i - 1]) || !(domains[i].size() > domains[i - 1].size()))
        throw std::invalid_argument("domain " + domains[i].describe() +
                                    " does not strictly contain " + domains[i - 1].describe());
    }
  }
}

WeightedIntegral integrate_weighted(const SsfCurve& curve, const TestFunction& g,
                                    const IntegrationOptions& options) {
  return integrate_impl(curve, g, options, as_is);
}

void ConvergenceSeries::finish() {
  monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].error > rows[i - 1].error + resolution) monotone = false;
  first_error = rows.empty() ? 0.0 : rows.front().error;
  final_error = rows.empty() ? 0.0 : rows.back().error;
}

bool ConvergenceReport::all_monotone() const {
  return std::all_of(series.begin(), series.end(),
                     [](const ConvergenceSeries& s) { return s.monotone; });
}

SsfOptions reference_ssf_options() {
  SsfOptions o;
  o.eps_schedule = {1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4};
  o.threshold_scale = 0.2;
  o.min_epsilon_scale = 1e-8;
  o.exclusion_radius = 0.0;
  return o;
}

SsfCurve limit_curve(const PotentialSpec& V, double lambda_max, const SsfOptions& options) {
  if (V.dimension() != 1) throw std::invalid_argument("limit_curve: potential must be 1D");
  if (!(lambda_max > 0.0)) throw std::invalid_argument("limit_curve: lambda_max must be positive");
  const std::vector<double> grid = limit_grid(lambda_max);
  SsfCurve out;
  out.method = SsfMethod::det;
  out.pair_id = "limit(" + V.describe() + ")";
  out.epsilon_schedule = options.eps_schedule;
  out.published_constant = 0.0;
  if (V.is_zero()) {
    out.lambdas = grid;
    out.lambdas.insert(out.lambdas.begin(), 0.0);
    out.values.assign(out.lambdas.size(), 0.0);
    out.epsilon_used.assign(out.lambdas.size(), 0.0);
    out.reliable.assign(out.lambdas.size(), true);
    return out;
  }
  const std::vector<double> bound = bound_states_1d(V);
  SsfOptions opts = options;
  opts.exclusion_radius = 0.0;
  const SsfCurve c = ssf_det(V, KernelId::full_space(1), grid, opts);
  const double nb = double(bound.size());
  for (double e : bound) out.jumps.push_back({e, -1.0});
  out.excluded = c.excluded;
  out.anchor = c.anchor;
  out.constant = c.constant;
  out.lambdas.push_back(0.0);
  out.values.push_back(c.values.front() + nb);
  out.epsilon_used.push_back(c.epsilon_used.front());
  out.reliable.push_back(false);
  for (std::size_t i = 0; i < c.size(); ++i) {
    out.lambdas.push_back(c.lambdas[i]);
    out.values.push_back(c.values[i] + nb);
    out.epsilon_used.push_back(c.epsilon_used[i]);
    out.reliable.push_back(c.reliable[i]);
  }
  return out;
}

SsfCurve counting_curve(const PotentialSpec& V, const DomainSpec& domain, double lambda_max,
                        const PruferOptions& options) {
  SsfCurve out;
  out.method = SsfMethod::counting;
  out.pair_id = domain.describe();
  out.jumps = counting_jumps(V, domain, lambda_max, options);
  const double lo = out.jumps.empty() ? std::min(0.0, V.min_value()) - 1.0
                                      : std::min(out.jumps.front().lambda, 0.0) - 1.0;
  out.anchor = lo;
  out.lambdas = {lo, lambda_max};
  out.values = {0.0, out.value_at(lambda_max)};
  out.epsilon_used = {0.0, 0.0};
  out.reliable = {true, true};
  return out;
}

ConvergenceReport weak_convergence_report(const DomainSequence& seq, const PotentialSpec& V,
                                          const SsfCurve& limit,
                                          const std::vector<TestFunction>& tests,
                                          const IntegrationOptions& options) {
  seq.validate();
  ConvergenceReport report;
  report.experiment = "weak_convergence";
  report.limit_pipeline = to_string(limit.method);
  CurveCache curves(seq, V);
  for (const TestFunction& g : tests) {
    if (g.kind == TestFunction::Kind::compact_support) {
      // Vague path: integrate over the support only, no tail.
      IntegrationOptions vague = options;
      vague.lambda_max = std::max(g.support_hi, 1e-12);
      ConvergenceSeries s = run_series(g.name + " vague", "3.82", to_string(g.kind), g, seq,
                                       curves, limit, vague, report.notes);
      report.series.push_back(std::move(s));
    }
    report.series.push_back(run_series(g.name, eq_for(g.kind), to_string(g.kind), g, seq, curves,
                                       limit, options, report.notes));
    if (g.kind == TestFunction::Kind::indicator)
      report.notes.push_back(g.name +
                             ": the limit measure has a density, so its endpoints carry no mass");
  }
  return report;
}

MassPair total_mass(const WeightedMeasureView& view, const IntegrationOptions& options) {
  const TestFunction one = TestFunction::constant(1.0);
  MassPair m;
  WeightedIntegral p, n;
  if (view.pointwise) {
    p = integrate_impl(view.source, one, options, positive_part);
    n = integrate_impl(view.source, one, options, negative_part);
  } else {
    p = integrate_impl(view.positive, one, options, as_is);
    n = integrate_impl(view.negative, one, options, as_is);
  }
  m.plus = p.value.real();
  m.minus = n.value.real();
  m.tail_plus = p.tail_bound;
  m.tail_minus = n.tail_bound;
  return m;
}

ConvergenceReport total_mass_report(const DomainSequence& seq, const PotentialSpec& V,
                                    const IntegrationOptions& options,
                                    const SsfOptions& ssf_options) {
  seq.validate();
  if (V.dimension() != 1) throw std::invalid_argument("total_mass_report: potential must be 1D");
  const SignSplit split = sign_split(V);
  ConvergenceReport report;
  report.experiment = "total_mass";
  report.limit_pipeline = "det";

  const SsfCurve xi = limit_curve(V, options.lambda_max, ssf_options);
  const SsfCurve xi_plus = limit_curve(split.positive, options.lambda_max, ssf_options);
  const WeightedMeasureView limit =
      WeightedMeasureView::from_split(xi, xi_plus, difference(xi_plus, xi));
  const MassPair lm = total_mass(limit, options);

  std::vector<MassPair> masses(seq.domains.size());
  parallel_for(masses.size(), [&](std::size_t i) {
    const DomainSpec& d = seq.domains[i];
    const SsfCurve c = counting_curve(V, d, options.lambda_max);
    const SsfCurve cp = counting_curve(split.positive, d, options.lambda_max);
    masses[i] = total_mass(WeightedMeasureView::from_split(c, cp, difference(cp, c)), options);
  });

  ConvergenceSeries plus, minus;
  plus.name = "mass_plus";
  minus.name = "mass_minus";
  plus.eq = minus.eq = "3.86a";
  plus.kind = minus.kind = "bounded_continuous";
  plus.resolution = minus.resolution = options.resolution;
  plus.limit = lm.plus;
  minus.limit = lm.minus;
  double sup_mass = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const DomainSpec& d = seq.domains[i];
    plus.rows.push_back({d.describe(), d.size(), masses[i].plus, std::abs(masses[i].plus - lm.plus),
                         masses[i].tail_plus + lm.tail_plus});
    minus.rows.push_back({d.describe(), d.size(), masses[i].minus,
                          std::abs(masses[i].minus - lm.minus),
                          masses[i].tail_minus + lm.tail_minus});
    sup_mass = std::max(sup_mass, masses[i].plus + masses[i].minus);
  }
  plus.finish();
  minus.finish();
  report.series = {plus, minus};
  report.notes.push_back("sup over the sequence of total mass: " + fmt(sup_mass));
  return report;
}

// ---------------------------------------------------------------------------

namespace {

// Pruefer angle from scale s_old to s_new, keeping the multiple of pi.
double rescale_angle(double theta, double s_old, double s_new) {
  const double m = std::floor(theta / kPi);
  const double phi = theta - m * kPi;
  return m * kPi + std::atan2(s_new * std::sin(phi), s_old * std::cos(phi));
}

// xi(lambda) for the Dirichlet half-line pair at lambda > 0: the Pruefer
// angles of H0 and H, taken in the scale sqrt(lambda) past the support.
double half_line_xi(const PotentialSpec& V, double lambda) {
  const double b = std::max(V.support_hi(), 0.0) + 1.0;
  const double s = std::sqrt(std::max(lambda, 1.0));
  const double k = std::sqrt(lambda);
  const double t0 = rescale_angle(prufer_angle(PotentialSpec::zero(1), 0.0, b, lambda), s, k);
  const double t = rescale_angle(prufer_angle(V, 0.0, b, lambda), s, k);
  return (t0 - t) / kPi;
}

struct Event {
  double r;
  double delta;
};

}  // namespace

CesaroResult cesaro_limit(const PotentialSpec& V, double lambda, const std::vector<double>& radii,
                          const CesaroOptions& options) {
  if (V.dimension() != 1) throw std::invalid_argument("cesaro_limit: potential must be 1D");
  if (radii.empty()) throw std::invalid_argument("cesaro_limit: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw std::invalid_argument("cesaro_limit: radii must be positive and increasing");
  if (!std::isfinite(lambda)) throw std::invalid_argument("cesaro_limit: lambda not finite");

  CesaroResult out;
  out.lambda = lambda;
  out.radii = radii;
  out.half_line = options.half_line;

  std::vector<double> bound;
  if (!V.is_zero()) {
    if (options.half_line) {
      const double b = std::max(V.support_hi(), 0.0) + 40.0;
      bound = interval_eigenvalues(V, 0.0, b, -1e-6);
    } else {
      bound = bound_states_1d(V);
    }
  }
  std::vector<double> special = bound;
  special.push_back(0.0);
  for (double e : special) {
    const double d = std::abs(lambda - e);
    if (d < options.exclusion_radius)
      throw DomainError("cesaro_limit", "lambda = " + fmt(lambda) + " lies within " +
                                            fmt(options.exclusion_radius) + " of " + fmt(e));
    if (d < options.warning_radius)
      out.warnings.push_back("lambda = " + fmt(lambda) + " is within " +
                             fmt(options.warning_radius) + " of " +
                             (e == 0.0 ? std::string("the threshold 0")
                                       : "the eigenvalue " + fmt(e)));
  }

  // Limit value.
  if (lambda < 0.0) {
    out.limit_estimate =
        -double(std::count_if(bound.begin(), bound.end(), [&](double e) { return e < lambda; }));
    out.limit_pipeline = options.half_line ? "prufer" : "det";
  } else if (V.is_zero()) {
    out.limit_estimate = 0.0;
  } else if (options.half_line) {
    out.limit_estimate = half_line_xi(V, lambda);
    out.limit_pipeline = "prufer";
  } else {
    out.limit_estimate = ssf_det(V, KernelId::full_space(1), {lambda}, options.ssf).values.front();
    out.limit_pipeline = "det";
  }

  // Events in r of xi(lambda; H_r, H0_r) = N0_r - N_r. For V = 0 the two
  // counts are identical and there are none.
  const double R = radii.back();
  const double length_factor = options.half_line ? 1.0 : 2.0;
  std::vector<Event> events;
  if (lambda > 0.0 && !V.is_zero()) {
    for (long n = 1;; ++n) {
      const double r = n * kPi / (length_factor * std::sqrt(lambda));
      if (r >= R) break;
      events.push_back({r, 1.0});
    }
  }
  auto N = [&](double r) -> long {
    if (r <= 0.0) return 0;
    const double a = options.half_line ? 0.0 : -r;
    return count_interval(V, a, r, lambda).count;
  };
  const double h = kPi / (8.0 * std::sqrt(std::max(lambda - std::min(V.min_value(), 0.0), 1.0)));
  // Bisection down to 1e-12 between radii with different counts.
  std::function<void(double, long, double, long)> locate = [&](double r1, long n1, double r2,
                                                               long n2) {
    if (n1 == n2) return;
    if (r2 - r1 < 1e-12 * std::max(1.0, r2)) {
      events.push_back({r2, -double(n2 - n1)});
      return;
    }
    const double m = 0.5 * (r1 + r2);
    const long nm = N(m);
    locate(r1, n1, m, nm);
    locate(m, nm, r2, n2);
  };
  double r_prev = V.is_zero() ? R : 0.0;
  long n_prev = 0;
  while (r_prev < R) {
    const double r = std::min(R, r_prev + h);
    const long n = N(r);
    locate(r_prev, n_prev, r, n);
    r_prev = r;
    n_prev = n;
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.r < b.r; });
  out.events = events.size();

  for (double Ri : radii) {
    double integral = 0.0;
    for (const Event& e : events) {
      if (e.r >= Ri) break;
      integral += e.delta * (Ri - e.r);
    }
    const double avg = integral / Ri;
    out.averages.push_back(avg);
    out.errors.push_back(std::abs(avg - out.limit_estimate));
  }
  return out;
}

ConvergenceReport determinant_convergence(const DomainSequence& seq, const PotentialSpec& V,
                                          const Energy& z, int per_panel) {
  seq.validate();
  if (z.side() != Energy::Side::off_axis)
    throw std::invalid_argument("determinant_convergence: z must be off the axis");
  ConvergenceReport report;
  report.experiment = "determinant_convergence";
  const bool balls = seq.domains.front().kind == DomainSpec::Kind::ball;
  ConvergenceSeries det_s, det2_s;
  det_s.name = "det";
  det_s.eq = "3.27";
  det2_s.name = "det2";
  det2_s.eq = "3.98";
  det_s.kind = det2_s.kind = "determinant";
  const std::size_t n = seq.domains.size();
  std::vector<cplx> d(n, 1.0), d2(n, 1.0);
  cplx D = 1.0, D2 = 1.0;

  if (!balls) {
    if (V.dimension() != 1)
      throw std::invalid_argument("determinant_convergence: boxes need a 1D potential");
    report.limit_pipeline = "det";
    if (!V.is_zero()) {
      const FactorPair full = factorize(V);
      const BSOperator op = assemble(KernelId::full_space(1), full, default_grid(full, per_panel), z);
      D = fredholm_det(op);
      D2 = det2(op);
      parallel_for(n, [&](std::size_t i) {
        const DomainSpec& dom = seq.domains[i];
        if (V.support_hi() <= dom.a || V.support_lo() >= dom.b) return;
        const FactorPair pair = factorize(V, dom.a, dom.b);
        const BSOperator opj =
            assemble(KernelId::interval(dom.a, dom.b), pair, default_grid(pair, per_panel), z);
        d[i] = fredholm_det(opj);
        d2[i] = det2(opj);
      });
    }
  } else {
    if (V.dimension() != 3)
      throw std::invalid_argument("determinant_convergence: balls need a radial 3D potential");
    report.limit_pipeline = "det2";
    if (!V.is_zero()) {
      const FactorPair pair = factorize(V);
      const QuadratureGrid grid = default_grid(pair, per_panel);
      const ChannelOptions copts;
      const int top = radial_channel_count(grid, z.root(), copts);
      D2 = det2_radial_fixed(KernelId::full_space(3), pair, grid, z, top, copts).value();
      parallel_for(n, [&](std::size_t i) {
        const DomainSpec& dom = seq.domains[i];
        d2[i] = det2_radial_fixed(KernelId::ball(3, dom.radius), pair, grid, z, top, copts).value();
      });
    }
    report.notes.push_back("balls: det_2 channel products only");
  }

  for (std::size_t i = 0; i < n; ++i) {
    const DomainSpec& dom = seq.domains[i];
    if (!balls) det_s.rows.push_back({dom.describe(), dom.size(), d[i], std::abs(d[i] - D), 0.0});
    det2_s.rows.push_back({dom.describe(), dom.size(), d2[i], std::abs(d2[i] - D2), 0.0});
  }
  det_s.limit = D;
  det2_s.limit = D2;
  if (!balls) {
    det_s.finish();
    report.series.push_back(det_s);
  }
  det2_s.finish();
  report.series.push_back(det2_s);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

namespace ode = boost::numeric::odeint;
using OdeState = std::array<cplx, 3>;

// Solution of -u'' + (V - z) u = f on [c, d] glued to free exterior
// solutions; the left/right exterior is a box edge at distance with reflection
// factor w (w = 0 for the full line).
struct Resolved {
  std::vector<double> x, w;   // quadrature nodes and weights on [c, d]
  std::vector<cplx> u;
  cplx left = 0.0, right = 0.0;  // u = C phi_L (x < c), u = C phi_R (x > d)
};

Resolved resolve(const PotentialSpec& V, const TestFunction& f, cplx k, double c, double d,
                 cplx w_left, cplx w_right, const std::vector<double>& breaks) {
  std::vector<double> cuts{c, d};
  for (double b : breaks)
    if (b > c && b < d) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  Resolved out;
  const GaussRule& rule = gauss_legendre(20);
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double len = cuts[i] - cuts[i - 1];
    const int m = std::max(1, int(std::ceil(len / 0.25)));
    for (int j = 0; j < m; ++j) {
      const double a = cuts[i - 1] + len * j / m, b = cuts[i - 1] + len * (j + 1) / m;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        out.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q]);
        out.w.push_back(0.5 * (b - a) * rule.weights[q]);
      }
    }
  }
  const cplx z = k * k;
  const cplx I{0.0, 1.0};
  // state: phi, phi', cumulative integral of phi f
  auto rhs = [&](const OdeState& s, OdeState& ds, double x) {
    ds[0] = s[1];
    ds[1] = (V(x) - z) * s[0];
    ds[2] = s[0] * f(x);
  };
  auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<OdeState>>(1e-12, 1e-12);
  const std::size_t n = out.x.size();
  std::vector<OdeState> L(n), Rr(n);
  {
    OdeState s{1.0 - w_left, -I * k * (1.0 + w_left), 0.0};
    std::vector<double> times{c};
    times.insert(times.end(), out.x.begin(), out.x.end());
    times.push_back(d);
    std::size_t idx = 0;
    ode::integrate_times(stepper, rhs, s, times.begin(), times.end(), 1e-3,
                         [&](const OdeState& st, double) {
                           if (idx >= 1 && idx <= n) L[idx - 1] = st;
                           ++idx;
                         });
    L.push_back(s);  // value at d
  }
  {
    OdeState s{1.0 - w_right, I * k * (1.0 + w_right), 0.0};
    std::vector<double> times{d};
    times.insert(times.end(), out.x.rbegin(), out.x.rend());
    times.push_back(c);
    std::size_t idx = 0;
    ode::integrate_times(stepper, rhs, s, times.begin(), times.end(), -1e-3,
                         [&](const OdeState& st, double) {
                           if (idx >= 1 && idx <= n) Rr[n - idx] = st;
                           ++idx;
                         });
    Rr.push_back(s);  // value at c; component 2 = -int_c^d phi_R f
  }
  // W = phi_L' phi_R - phi_L phi_R', evaluated at d.
  const OdeState& Ld = L.back();
  const cplx W = Ld[1] * (1.0 - w_right) - Ld[0] * (I * k * (1.0 + w_right));
  const cplx IL_total = Ld[2];
  const cplx IR_total = -Rr.back()[2];
  out.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx IL = L[i][2];
    const cplx IR = -Rr[i][2];  // int_x^d phi_R f
    out.u[i] = -(Rr[i][0] * IL + L[i][0] * IR) / W;
  }
  out.left = -IR_total / W;
  out.right = -IL_total / W;
  return out;
}

// int_0^len |A e^{ikt} + B e^{-ikt}|^2 dt for Im k > 0.
double exterior_norm2(cplx A, cplx B, cplx k, double len) {
  const double alpha = k.real(), kappa = k.imag();
  double s = std::norm(A) * (-std::expm1(-2.0 * kappa * len)) / (2.0 * kappa);
  if (B != cplx{}) {
    const double lb = 2.0 * std::log(std::abs(B));
    s += (std::exp(lb + 2.0 * kappa * len) - std::exp(lb)) / (2.0 * kappa);
    const cplx osc = alpha == 0.0 ? cplx{len, 0.0}
                                  : (std::exp(cplx{0.0, 2.0 * alpha * len}) - 1.0) /
                                        cplx{0.0, 2.0 * alpha};
    s += 2.0 * std::real(A * std::conj(B) * osc);
  }
  return s;
}

}  // namespace

ConvergenceReport resolvent_strong_convergence_spotcheck(const DomainSequence& seq,
                                                         const PotentialSpec& V, cplx z,
                                                         const std::vector<TestFunction>& probes) {
  seq.validate();
  if (V.dimension() != 1 || seq.domains.front().kind != DomainSpec::Kind::interval)
    throw std::invalid_argument("resolvent spot check: 1D boxes only");
  if (z.imag() == 0.0 && z.real() >= 0.0)
    throw std::invalid_argument("resolvent spot check: z must be off the spectrum");
  const cplx k = principal_sqrt(z);
  const cplx I{0.0, 1.0};
  ConvergenceReport report;
  report.experiment = "resolvent_strong_convergence";
  report.limit_pipeline = "ode";
  report.notes.push_back(
      "probes orthogonal to the direction of domain growth do not exist in 1D; skipped");
  const DomainSpec& first = seq.domains.front();
  if (!V.is_zero() && (V.support_lo() < first.a || V.support_hi() > first.b))
    throw std::invalid_argument("resolvent spot check: potential support must lie inside " +
                                first.describe());

  for (const TestFunction& f : probes) {
    if (!f.compact()) throw std::invalid_argument("resolvent spot check: probe " + f.name +
                                                  " must have compact support");
    if (f.support_lo < first.a || f.support_hi > first.b)
      throw std::invalid_argument("resolvent spot check: probe " + f.name +
                                  " must lie inside every domain");
    std::vector<double> breaks = f.breakpoints;
    for (double b : V.breakpoints()) breaks.push_back(b);
    ConvergenceSeries s;
    s.name = f.name;
    s.eq = "3.15";
    s.kind = "resolvent";

    const double c0 = V.is_zero() ? f.support_lo : std::min(f.support_lo, V.support_lo());
    const double d0 = V.is_zero() ? f.support_hi : std::max(f.support_hi, V.support_hi());
    const Resolved full = resolve(V, f, k, c0, d0, 0.0, 0.0, breaks);
    double full_norm2 = 0.0;
    for (std::size_t i = 0; i < full.x.size(); ++i) full_norm2 += full.w[i] * std::norm(full.u[i]);

    std::vector<double> diff(seq.domains.size());
    parallel_for(seq.domains.size(), [&](std::size_t j) {
      const DomainSpec& dom = seq.domains[j];
      const PotentialSpec Vj = V.is_zero() ? V : V.restricted(dom.a, dom.b);
      const double c = c0, d = d0;
      const cplx wl = std::exp(2.0 * I * k * (c - dom.a));
      const cplx wr = std::exp(2.0 * I * k * (dom.b - d));
      // Interior: box and full solutions on [c, d]; then the outer strips.
      const Resolved box = resolve(Vj, f, k, c, d, wl, wr, breaks);
      double s2 = 0.0;
      const Resolved& fullc = full;
      for (std::size_t i = 0; i < box.x.size(); ++i)
        s2 += box.w[i] * std::norm(box.u[i] - fullc.u[i]);
      // Left strip (a, c): t = c - x; box u = C (e^{ikt} - wl e^{-ikt}), full u = C' e^{ikt}.
      s2 += exterior_norm2(box.left - fullc.left, -box.left * wl, k, c - dom.a);
      s2 += exterior_norm2(box.right - fullc.right, -box.right * wr, k, dom.b - d);
      // Outside the box only the full solution remains.
      const double kap = k.imag();
      s2 += std::norm(fullc.left) * std::exp(-2.0 * kap * (c - dom.a)) / (2.0 * kap);
      s2 += std::norm(fullc.right) * std::exp(-2.0 * kap * (dom.b - d)) / (2.0 * kap);
      diff[j] = std::sqrt(std::max(s2, 0.0));
    });
    for (std::size_t j = 0; j < seq.domains.size(); ++j)
      s.rows.push_back({seq.domains[j].describe(), seq.domains[j].size(), diff[j], diff[j], 0.0});
    s.limit = std::sqrt(full_norm2);
    s.finish();
    report.series.push_back(std::move(s));
  }
  return report;
}

ConvergenceReport moment_convergence(const DomainSequence& seq, const PotentialSpec& V, cplx a,
                                     cplx z, int n_max, const SsfCurve& limit,
                                     const IntegrationOptions& options) {
  seq.validate();
  if (a.imag() == 0.0 || z.imag() == 0.0)
    throw std::invalid_argument("moment_convergence: a and z must be off the axis");
  if (n_max < 1) throw std::invalid_argument("moment_convergence: n_max must be >= 1");
  ConvergenceReport report;
  report.experiment = "moment_convergence";
  report.limit_pipeline = to_string(limit.method);
  CurveCache curves(seq, V);
  for (int n = 1; n <= n_max; ++n) {
    TestFunction g;
    g.kind = TestFunction::Kind::custom;
    g.name = "moment n=" + std::to_string(n);
    g.evaluate = [a, z, n](double l) -> cplx {
      return (l * l + 1.0) / ((l - a) * std::pow(l - z, n));
    };
    const auto eval = g.evaluate;
    g.tail_sup = [eval, n](double l) {
      double m = n == 1 ? 1.0 : 0.0;
      for (double mu = std::max(l, 1e-12); mu < 1e12 * std::max(l, 1.0); mu *= 1.05)
        m = std::max(m, std::abs(eval(mu)));
      return 1.05 * m;
    };
    report.series.push_back(run_series(g.name, n == 1 ? "3.25" : "3.43", "moment", g, seq, curves,
                                       limit, options, report.notes));
  }
  return report;
}

KirschReport kirsch_demo(const DomainSequence& balls, const PotentialSpec& V, double lambda_max) {
  balls.validate();
  if (balls.domains.front().kind != DomainSpec::Kind::ball || V.dimension() != 3)
    throw std::invalid_argument("kirsch_demo: needs balls and a radial 3D potential");
  KirschReport out;
  out.lambda_max = lambda_max;
  const std::size_t n = balls.domains.size();
  out.sup_abs.assign(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const auto jumps = counting_jumps(V, balls.domains[i], lambda_max);
    double s = 0.0, sup = 0.0;
    for (std::size_t j = 0; j < jumps.size(); ++j) {
      s += jumps[j].size;
      if (j + 1 == jumps.size() || jumps[j + 1].lambda != jumps[j].lambda)
        sup = std::max(sup, std::abs(s));
    }
    out.sup_abs[i] = sup;
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.radii.push_back(balls.domains[i].radius);
    if (i > 0 && out.sup_abs[i] < out.sup_abs[i - 1]) out.nondecreasing = false;
  }
  out.exceeds_first = n > 1 && out.sup_abs.back() > out.sup_abs.front();
  return out;
}

}  // namespace ssflab
