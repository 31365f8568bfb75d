#include "ssflab/ssf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ssflab/errors.hpp"
#include "ssflab/parallel.hpp"

namespace ssflab {
namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double x) {
  x = std::remainder(x, 2.0 * kPi);
  return x <= -kPi ? x + 2.0 * kPi : x;
}

void check_grid(const std::vector<double>& lambdas, const char* op) {
  if (lambdas.empty()) throw std::invalid_argument(std::string(op) + ": empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!std::isfinite(lambdas[i]))
      throw std::invalid_argument(std::string(op) + ": lambda grid has non-finite entries");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw std::invalid_argument(std::string(op) + ": lambda grid must be strictly increasing");
  }
}

void check_schedule(const std::vector<double>& eps) {
  if (eps.empty()) throw std::invalid_argument("eps_schedule: empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !std::isfinite(eps[i]))
      throw std::invalid_argument("eps_schedule: entries must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1]))
      throw std::invalid_argument("eps_schedule: entries must be strictly decreasing");
  }
}

// Value at 0 of the polynomial through (x_i, y_i).
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  double out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) w *= x[j] / (x[j] - x[i]);
    out += w * y[i];
  }
  return out;
}

double distance_to(const std::vector<double>& points, double x) {
  double d = std::numeric_limits<double>::infinity();
  for (double p : points) d = std::min(d, std::abs(x - p));
  return d;
}

SsfCurve zero_curve(const std::vector<double>& lambdas, SsfMethod method, std::string pair_id,
                    const std::vector<double>& schedule) {
  SsfCurve c;
  c.lambdas = lambdas;
  c.values.assign(lambdas.size(), 0.0);
  c.method = method;
  c.anchor = lambdas.front() - 1.0;
  c.epsilon_schedule = schedule;
  c.epsilon_used.assign(lambdas.size(), 0.0);
  c.reliable.assign(lambdas.size(), true);
  c.pair_id = std::move(pair_id);
  return c;
}

// Continuous phase along one epsilon line, refining where any component
// moves by pi/2 or more between neighbours.
class Tracker {
 public:
  Tracker(const PhaseEvaluator& f, int max_depth) : f_(f), max_depth_(max_depth) {}

  double phase() const {
    double total = extra_;
    for (const auto& [c, u] : unwrapped_) total += weights_.at(c) * u;
    return total;
  }

  void start(const PhaseSample& s) {
    unwrapped_.clear();
    raw_.clear();
    weights_.clear();
    absorb(s);
  }

  // Advances from the current point (lambda_a) to lambda_b whose sample is sb.
  void advance(double lambda_a, const PhaseSample& sa, double lambda_b, const PhaseSample& sb,
               const std::function<Energy(double)>& energy_at, int depth = 0) {
    if (needs_split(sa, sb)) {
      if (depth >= max_depth_) {
        std::ostringstream os;
        os.precision(17);
        os << "phase jump not resolved after " << max_depth_ << " bisections near lambda = "
           << lambda_b;
        throw UnwrapError("unwrap", os.str(), lambda_b);
      }
      const double mid = 0.5 * (lambda_a + lambda_b);
      const PhaseSample sm = f_(energy_at(mid));
      advance(lambda_a, sa, mid, sm, energy_at, depth + 1);
      advance(mid, sm, lambda_b, sb, energy_at, depth + 1);
      return;
    }
    absorb(sb);
    ++evaluations_;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  static bool needs_split(const PhaseSample& a, const PhaseSample& b) {
    const std::size_t n = std::min(a.logs.size(), b.logs.size());
    for (std::size_t c = 0; c < n; ++c)
      if (std::abs(wrap(b.logs[c].imag() - a.logs[c].imag())) >= 0.5 * kPi) return true;
    return false;
  }

  void absorb(const PhaseSample& s) {
    for (std::size_t c = 0; c < s.logs.size(); ++c) {
      const double r = s.logs[c].imag();
      auto it = raw_.find(c);
      if (it == raw_.end()) {
        unwrapped_[c] = wrap(r);
      } else {
        unwrapped_[c] += wrap(r - it->second);
      }
      raw_[c] = r;
      weights_[c] = c < s.weights.size() ? s.weights[c] : 1.0;
    }
    for (auto it = raw_.begin(); it != raw_.end();) {
      if (it->first >= s.logs.size()) {
        unwrapped_.erase(it->first);
        weights_.erase(it->first);
        it = raw_.erase(it);
      } else {
        ++it;
      }
    }
    extra_ = s.extra;
  }

  const PhaseEvaluator& f_;
  int max_depth_;
  std::map<std::size_t, double> unwrapped_, raw_, weights_;
  double extra_ = 0.0;
  std::size_t evaluations_ = 0;
};

std::string full_line_id(const PotentialSpec& V, const char* what) {
  std::ostringstream os;
  os << what << " H = H0 + V, H0 = -Laplacian on R^" << V.dimension() << ", V = " << V.describe();
  return os.str();
}

std::vector<double> bound_state_energies(const PotentialSpec& V) {
  std::vector<double> out;
  if (V.dimension() == 1) {
    out = bound_states_1d(V);
  } else {
    for (const auto& [e, m] : bound_states_radial(V)) out.push_back(e);
  }
  return out;
}

}  // namespace

std::string to_string(SsfMethod m) {
  switch (m) {
    case SsfMethod::det: return "det";
    case SsfMethod::det2: return "det2";
    case SsfMethod::counting: return "counting";
  }
  return "unknown";
}

double SsfCurve::value_at(double lambda) const {
  double v = 0.0;
  for (const Jump& j : jumps) {
    if (j.lambda < lambda) v += j.size;
    else break;
  }
  if (method == SsfMethod::counting && !jumps.empty()) return v;
  if (lambdas.empty() || lambda < lambdas.front() || lambda > lambdas.back()) return v;
  const auto it = std::upper_bound(lambdas.begin(), lambdas.end(), lambda);
  if (it == lambdas.end()) return v + values.back();
  const std::size_t i = std::size_t(it - lambdas.begin());
  if (i == 0) return v + values.front();
  const double t = (lambda - lambdas[i - 1]) / (lambdas[i] - lambdas[i - 1]);
  return v + (1.0 - t) * values[i - 1] + t * values[i];
}

cplx PhaseSample::total_log() const {
  cplx s = cplx{0.0, extra};
  for (std::size_t c = 0; c < logs.size(); ++c) s += (c < weights.size() ? weights[c] : 1.0) * logs[c];
  return s;
}

SsfCurve phase_curve(const PhaseEvaluator& evaluate, const std::vector<double>& lambdas,
                     std::vector<double> special_points, double spectrum_floor, SsfMethod method,
                     std::string pair_id, const SsfOptions& options) {
  check_grid(lambdas, "phase_curve");
  check_schedule(options.eps_schedule);
  std::sort(special_points.begin(), special_points.end());

  // Anchor below both spectra where the determinant is close to 1.
  double anchor = std::min(spectrum_floor, lambdas.front()) - 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const double dev = std::abs(std::exp(evaluate(Energy::off_axis(anchor)).total_log()) - 1.0);
    if (dev <= options.anchor_tolerance) break;
    if (it >= 30) {
      throw ConvergenceError("anchor", "determinant not within tolerance of 1 at the anchor",
                             previous, dev);
    }
    previous = dev;
    anchor *= 2.0;
  }

  // Path: anchor, a geometric bridge to the grid, the grid, and points around
  // every special point so that no eigenvalue is stepped over.
  std::vector<double> path{anchor};
  const double target = lambdas.front();
  const double start = std::min(spectrum_floor, target) - 1.0;
  for (double x = 0.25 * anchor; x < start; x *= 0.25) path.push_back(x);
  for (int k = 0; k < 60; ++k) {
    const double x = target - (target - start) * std::ldexp(1.0, -k);
    if (x <= anchor) continue;
    if (target - x < 0.05) break;
    path.push_back(x);
  }
  path.insert(path.end(), lambdas.begin(), lambdas.end());
  for (double p : special_points)
    for (double off : {-0.1, -0.05, -0.02, -0.005, 0.005, 0.02, 0.05, 0.1})
      if (p + off > anchor && p + off < lambdas.back()) path.push_back(p + off);
  std::sort(path.begin(), path.end());
  path.erase(std::unique(path.begin(), path.end()), path.end());
  std::vector<std::size_t> output_index(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    output_index[i] = std::size_t(std::lower_bound(path.begin(), path.end(), lambdas[i]) - path.begin());

  auto scale_at = [&](double lambda) {
    const double d = distance_to(special_points, lambda);
    return std::max(options.min_epsilon_scale, std::min(1.0, d / options.threshold_scale));
  };

  const std::size_t ne = options.eps_schedule.size();
  std::vector<std::vector<double>> phase(ne, std::vector<double>(lambdas.size()));
  std::vector<double> anchor_phase(ne);
  SsfCurve curve;
  for (std::size_t e = 0; e < ne; ++e) {
    const double eps = options.eps_schedule[e];
    auto energy_at = [&](double lambda) {
      return Energy::upper_limit(lambda, eps * scale_at(lambda));
    };
    std::vector<PhaseSample> samples(path.size());
    parallel_for(path.size(), [&](std::size_t i) { samples[i] = evaluate(energy_at(path[i])); });
    Tracker tracker(evaluate, options.max_refinement_depth);
    tracker.start(samples[0]);
    anchor_phase[e] = tracker.phase();
    BranchTrack track;
    auto record = [&](std::size_t i) {
      if (!options.keep_tracks) return;
      track.contour.push_back(energy_at(path[i]));
      track.raw_args.push_back(std::arg(std::exp(samples[i].total_log())));
      track.unwrapped_args.push_back(tracker.phase());
    };
    record(0);
    std::size_t next_out = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
      tracker.advance(path[i - 1], samples[i - 1], path[i], samples[i], energy_at);
      record(i);
      while (next_out < lambdas.size() && output_index[next_out] == i) phase[e][next_out++] = tracker.phase();
    }
    if (options.keep_tracks) curve.tracks.push_back(std::move(track));
  }

  curve.lambdas = lambdas;
  curve.method = method;
  curve.anchor = anchor;
  curve.epsilon_schedule = options.eps_schedule;
  curve.pair_id = std::move(pair_id);
  curve.excluded = special_points;
  const double phi_anchor = extrapolate_to_zero(options.eps_schedule, anchor_phase);
  curve.constant = -phi_anchor / kPi;
  curve.values.resize(lambdas.size());
  curve.epsilon_used.resize(lambdas.size());
  curve.reliable.resize(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const bool ok = distance_to(special_points, lambdas[i]) > options.exclusion_radius;
    std::vector<double> col(ne);
    for (std::size_t e = 0; e < ne; ++e) col[e] = phase[e][i];
    curve.reliable[i] = ok;
    if (ok) {
      curve.values[i] = (extrapolate_to_zero(options.eps_schedule, col) - phi_anchor) / kPi;
      curve.epsilon_used[i] = 0.0;
    } else {
      curve.values[i] = (col.back() - phi_anchor) / kPi;
      curve.epsilon_used[i] = options.eps_schedule.back() * scale_at(lambdas[i]);
    }
  }
  return curve;
}

SsfCurve ssf_det(const PotentialSpec& V, const KernelId& kernel, const std::vector<double>& lambdas,
                 const SsfOptions& options) {
  kernel.validate();
  if (kernel.dimension != 1 || !kernel.is_full_space() || V.dimension() != 1)
    throw std::invalid_argument("ssf_det: needs a 1D potential and the full-line kernel");
  check_grid(lambdas, "ssf_det");
  check_schedule(options.eps_schedule);
  std::string id = full_line_id(V, "det:");
  if (V.is_zero()) return zero_curve(lambdas, SsfMethod::det, id, options.eps_schedule);
  const FactorPair pair = factorize(V);
  const QuadratureGrid grid = default_grid(pair, options.per_panel);
  PhaseEvaluator f = [&](const Energy& z) {
    const BSOperator op = assemble(kernel, pair, grid, z, options.assembly);
    return PhaseSample{{log_fredholm_det(op)}, {1.0}, 0.0};
  };
  auto specials = bound_state_energies(V);
  specials.push_back(0.0);
  return phase_curve(f, lambdas, specials, std::min(0.0, V.min_value()), SsfMethod::det,
                     std::move(id), options);
}

SsfCurve ssf_det2(const PotentialSpec& V, const KernelId& kernel,
                  const std::vector<double>& lambdas, const SsfOptions& options) {
  kernel.validate();
  if (!kernel.is_full_space() || kernel.dimension != V.dimension() ||
      (kernel.dimension != 1 && kernel.dimension != 3))
    throw std::invalid_argument("ssf_det2: needs a 1D or radial 3D potential and the matching full-space kernel");
  check_grid(lambdas, "ssf_det2");
  check_schedule(options.eps_schedule);
  std::string id = full_line_id(V, "det2:");
  SsfCurve curve;
  if (V.is_zero()) {
    curve = zero_curve(lambdas, SsfMethod::det2, id, options.eps_schedule);
    if (kernel.dimension == 3) curve.published_constant = 0.0;
    return curve;
  }
  const FactorPair pair = factorize(V);
  const QuadratureGrid grid = default_grid(pair, options.per_panel);
  auto specials = bound_state_energies(V);
  specials.push_back(0.0);
  const double floor = std::min(0.0, V.min_value());
  if (kernel.dimension == 1) {
    const EtaCorrection et = eta_1d(pair, kernel);
    PhaseEvaluator f = [&](const Energy& z) {
      // In 1D both Im log det_2 and Im eta blow up like 1/k at threshold;
      // their sum is tame, so it is tracked as one phase.
      const BSOperator op = assemble(kernel, pair, grid, z, options.assembly);
      return PhaseSample{{log_det2(op) + cplx{0.0, et.value(z.value()).imag()}}, {1.0}, 0.0};
    };
    return phase_curve(f, lambdas, specials, floor, SsfMethod::det2, std::move(id), options);
  }
  const EtaCorrection et = eta(3, V.integral());
  ChannelOptions copt = options.channels;
  copt.assembly = options.assembly;
  PhaseEvaluator f = [&](const Energy& z) {
    const int top = radial_channel_count(grid, z.root(), copt);
    const ChannelProduct cp = det2_radial_fixed(kernel, pair, grid, z, top, copt);
    PhaseSample s;
    s.logs = cp.channel_logs;
    s.weights.resize(s.logs.size());
    for (std::size_t l = 0; l < s.logs.size(); ++l) s.weights[l] = double(2 * l + 1);
    s.extra = cp.tail.imag() + et.value(z.value()).imag();
    return s;
  };
  curve = phase_curve(f, lambdas, specials, floor, SsfMethod::det2, std::move(id), options);
  curve.published_constant = 0.0;
  return curve;
}

std::vector<Jump> counting_jumps(const PotentialSpec& V, const DomainSpec& domain,
                                 double lambda_max, const PruferOptions& options) {
  domain.validate();
  std::vector<Jump> out;
  if (domain.kind == DomainSpec::Kind::interval) {
    for (double e : free_interval_eigenvalues(domain.a, domain.b, lambda_max)) out.push_back({e, 1.0});
    for (double e : interval_eigenvalues(V, domain.a, domain.b, lambda_max, options))
      out.push_back({e, -1.0});
  } else {
    for (const auto& [e, m] : ball_eigenvalues(PotentialSpec::zero(3), domain.radius, lambda_max, options))
      out.push_back({e, double(m)});
    for (const auto& [e, m] : ball_eigenvalues(V, domain.radius, lambda_max, options))
      out.push_back({e, -double(m)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Jump& x, const Jump& y) { return x.lambda < y.lambda; });
  return out;
}

SsfCurve ssf_counting(const PotentialSpec& V, const DomainSpec& domain,
                      const std::vector<double>& lambdas, const PruferOptions& options) {
  check_grid(lambdas, "ssf_counting");
  domain.validate();
  if (V.dimension() != domain.dimension)
    throw std::invalid_argument("ssf_counting: potential and domain dimensions differ");
  const PotentialSpec zero = PotentialSpec::zero(domain.dimension);
  SsfCurve c;
  c.lambdas = lambdas;
  c.method = SsfMethod::counting;
  c.anchor = std::min(0.0, V.min_value()) - 1.0;
  c.values.resize(lambdas.size());
  c.epsilon_used.assign(lambdas.size(), 0.0);
  c.reliable.resize(lambdas.size());
  std::vector<CountResult> free_counts(lambdas.size()), counts(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    free_counts[i] = count(zero, domain, lambdas[i], options);
    counts[i] = count(V, domain, lambdas[i], options);
  });
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    c.values[i] = double(free_counts[i].count - counts[i].count);
    c.reliable[i] = !free_counts[i].ambiguous && !counts[i].ambiguous;
  }
  c.jumps = counting_jumps(V, domain, lambdas.back(), options);
  std::ostringstream os;
  os << "counting: H = H0 + V, H0 = Dirichlet Laplacian on " << domain.describe()
     << ", V = " << V.describe();
  c.pair_id = os.str();
  return c;
}

ChainRuleReport chain_rule_check(const PotentialSpec& V, const DomainSpec& domain,
                                 const std::vector<double>& lambdas, const PruferOptions& options) {
  const SignSplit split = sign_split(V);
  const PotentialSpec zero = PotentialSpec::zero(domain.dimension);
  ChainRuleReport r;
  r.method = SsfMethod::counting;
  r.lambdas = lambdas;
  const std::size_t n = lambdas.size();
  r.xi.resize(n);
  r.xi_plus.resize(n);
  r.xi_minus.resize(n);
  r.reliable.assign(n, true);
  parallel_for(n, [&](std::size_t i) {
    const CountResult n0 = count(zero, domain, lambdas[i], options);
    const CountResult np = count(split.positive, domain, lambdas[i], options);
    const CountResult nv = count(V, domain, lambdas[i], options);
    r.xi[i] = double(n0.count - nv.count);
    r.xi_plus[i] = double(n0.count - np.count);
    r.xi_minus[i] = double(nv.count - np.count);
    r.reliable[i] = !(n0.ambiguous || np.ambiguous || nv.ambiguous);
  });
  r.min_plus = r.min_minus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.reliable[i]) continue;
    r.residual = std::max(r.residual, std::abs(r.xi[i] - (r.xi_plus[i] - r.xi_minus[i])));
    r.min_plus = std::min(r.min_plus, r.xi_plus[i]);
    r.min_minus = std::min(r.min_minus, r.xi_minus[i]);
  }
  r.plus_nonnegative = r.min_plus >= 0.0;
  r.minus_nonnegative = r.min_minus >= 0.0;
  return r;
}

ChainRuleReport chain_rule_check(const PotentialSpec& V, const std::vector<double>& lambdas,
                                 const SsfOptions& options, double slack) {
  if (V.dimension() != 1) throw std::invalid_argument("chain_rule_check: determinant pipeline is 1D");
  const KernelId kernel = KernelId::full_space(1);
  const SignSplit split = sign_split(V);
  ChainRuleReport r;
  r.method = SsfMethod::det;
  r.lambdas = lambdas;
  const SsfCurve full = ssf_det(V, kernel, lambdas, options);
  const SsfCurve plus = ssf_det(split.positive, kernel, lambdas, options);
  SsfCurve rel;
  if (split.negative.is_zero()) {
    rel = zero_curve(lambdas, SsfMethod::det, "relative", options.eps_schedule);
  } else {
    PhaseEvaluator f = [&](const Energy& z) {
      return PhaseSample{{log_relative_det(kernel, V, options.per_panel, z, options.assembly)},
                         {1.0},
                         0.0};
    };
    auto specials = bound_state_energies(V);
    specials.push_back(0.0);
    rel = phase_curve(f, lambdas, specials, std::min(0.0, V.min_value()), SsfMethod::det,
                      "relative: H = H0 + V against H0 + V+, V = " + V.describe(), options);
  }
  const std::size_t n = lambdas.size();
  r.xi = full.values;
  r.xi_plus = plus.values;
  r.xi_minus.resize(n);
  r.reliable.resize(n);
  r.min_plus = r.min_minus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    r.xi_minus[i] = -rel.values[i];
    r.reliable[i] = full.reliable[i] && plus.reliable[i] && rel.reliable[i];
    if (!r.reliable[i]) continue;
    r.residual = std::max(r.residual, std::abs(r.xi[i] - (r.xi_plus[i] - r.xi_minus[i])));
    r.min_plus = std::min(r.min_plus, r.xi_plus[i]);
    r.min_minus = std::min(r.min_minus, r.xi_minus[i]);
  }
  r.plus_nonnegative = r.min_plus >= -slack;
  r.minus_nonnegative = r.min_minus >= -slack;
  return r;
}

}  // namespace ssflab
