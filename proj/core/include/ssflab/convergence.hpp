#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ssflab/kernels.hpp"
#include "ssflab/potential.hpp"
#include "ssflab/spectra.hpp"
#include "ssflab/ssf.hpp"

namespace ssflab {

struct TestFunction {
  enum class Kind {
    compact_support,
    vanishing_at_infinity,
    bounded_continuous,
    indicator,
    resolvent_monomial,
    custom
  };
  Kind kind = Kind::custom;
  std::string name;
  std::function<cplx(double)> evaluate;
  /// Points where g has kinks or jumps; quadrature splits there.
  std::vector<double> breakpoints;
  /// g vanishes outside [support_lo, support_hi].
  double support_lo = -std::numeric_limits<double>::infinity();
  double support_hi = std::numeric_limits<double>::infinity();
  /// sup |g(mu)| over mu >= lambda.
  std::function<double(double)> tail_sup;

  cplx operator()(double lambda) const { return evaluate(lambda); }
  bool compact() const { return std::isfinite(support_lo) && std::isfinite(support_hi); }

  /// exp(1 - 1 / (1 - t^2)) with t = (lambda - center) / radius; Gaussian-like, compact.
  static TestFunction bump(double center, double radius);
  static TestFunction gaussian(double center, double width);
  static TestFunction arctan();
  static TestFunction constant(double value = 1.0);
  static TestFunction indicator(double lo, double hi);
  /// (lambda + i)^-m (lambda - i)^-n.
  static TestFunction resolvent_monomial(int m, int n);
};
std::string to_string(TestFunction::Kind k);

/// Measures with densities xi_+/(lambda^2 + 1) and xi_-/(lambda^2 + 1).
struct WeightedMeasureView {
  SsfCurve source;
  SsfCurve positive;
  SsfCurve negative;
  bool pointwise = false;

  /// xi_+ and xi_- from the chain-rule split (both nonnegative).
  static WeightedMeasureView from_split(SsfCurve xi, SsfCurve xi_plus, SsfCurve xi_minus);
  /// xi_+ = max(xi, 0), xi_- = max(-xi, 0).
  static WeightedMeasureView from_parts(SsfCurve xi);
  double density_plus(double lambda) const;
  double density_minus(double lambda) const;
};

/// Nested finite domains growing to the whole space.
struct DomainSequence {
  std::vector<DomainSpec> domains;
  std::string limit_tag;

  static DomainSequence symmetric_boxes(const std::vector<double>& half_widths);
  static DomainSequence balls(const std::vector<double>& radii);
  /// Throws std::invalid_argument unless domains are of one kind, nested and growing.
  void validate() const;
};

struct IntegrationOptions {
  double lambda_max = 400.0;
  double tolerance = 5e-3;   ///< allowed tail bound
  double lambda_cap = 12800.0;
  /// Accuracy of the limit integrals; error changes below it are not resolved.
  double resolution = 1e-8;
};

struct WeightedIntegral {
  cplx value = 0.0;
  double tail_bound = 0.0;
  double lambda_max = 0.0;
};

/// int xi(lambda) (lambda^2 + 1)^-1 g(lambda) dlambda up to lambda_max with an
/// explicit bound on the rest. Samples are interpolated by local cubics in
/// sign(lambda) sqrt|lambda|. Throws CoverageError when the bound exceeds
/// the tolerance or the curve ends before lambda_max.
WeightedIntegral integrate_weighted(const SsfCurve& curve, const TestFunction& g,
                                    const IntegrationOptions& options = {});

struct ConvergenceRow {
  std::string domain;
  double domain_size = 0.0;
  cplx value = 0.0;
  double error = 0.0;
  double tail_bound = 0.0;
};

struct ConvergenceSeries {
  std::string name;
  std::string eq;
  std::string kind;
  cplx limit = 0.0;
  std::vector<ConvergenceRow> rows;
  bool monotone = true;
  double first_error = 0.0;
  double final_error = 0.0;
  /// Errors may grow by this much and still count as nonincreasing.
  double resolution = 0.0;

  /// Fills monotone, first_error and final_error from rows.
  void finish();
};

struct ConvergenceReport {
  std::string experiment;
  std::string limit_pipeline;
  std::vector<ConvergenceSeries> series;
  std::vector<std::string> notes;
  bool all_monotone() const;
};

/// Options for reference curves: five epsilons, a wider scaling window near
/// thresholds, every point extrapolated. Pointwise error about 1e-10 for the
/// square-well examples.
SsfOptions reference_ssf_options();

/// xi(.; H, H0) on the line: exact steps at the bound states plus ssf_det
/// samples on (0, lambda_max]. 1D only. Every sample is extrapolated.
SsfCurve limit_curve(const PotentialSpec& V, double lambda_max,
                     const SsfOptions& options = reference_ssf_options());
/// Counting curve of a finite domain in step form, covering lambda <= lambda_max.
SsfCurve counting_curve(const PotentialSpec& V, const DomainSpec& domain, double lambda_max,
                        const PruferOptions& options = {});

ConvergenceReport weak_convergence_report(const DomainSequence& seq, const PotentialSpec& V,
                                          const SsfCurve& limit,
                                          const std::vector<TestFunction>& tests,
                                          const IntegrationOptions& options = {});

struct MassPair {
  double plus = 0.0;
  double minus = 0.0;
  double tail_plus = 0.0;
  double tail_minus = 0.0;
};
MassPair total_mass(const WeightedMeasureView& view, const IntegrationOptions& options = {});

/// Masses of eta_{xi_j,+-} over the sequence against the limit split, using
/// the chain-rule split of V.
ConvergenceReport total_mass_report(const DomainSequence& seq, const PotentialSpec& V,
                                    const IntegrationOptions& options = {},
                                    const SsfOptions& ssf_options = reference_ssf_options());

struct CesaroResult {
  double lambda = 0.0;
  std::vector<double> radii;
  std::vector<double> averages;
  std::vector<double> errors;
  double limit_estimate = 0.0;
  std::string limit_pipeline = "det";
  std::size_t events = 0;
  bool half_line = false;
  std::vector<std::string> warnings;
};

struct CesaroOptions {
  bool half_line = false;     ///< boxes (0, r) instead of (-r, r)
  double exclusion_radius = 0.02;
  double warning_radius = 0.1;
  SsfOptions ssf{};
};

/// Running averages (1/R) int_0^R xi(lambda; H_r, H0_r) dr over Dirichlet boxes.
/// Counting curves are piecewise constant in r, so the integral is summed
/// exactly over the located crossing radii.
CesaroResult cesaro_limit(const PotentialSpec& V, double lambda, const std::vector<double>& radii,
                          const CesaroOptions& options = {});

/// |D_j(z) - D(z)| and the det_2 analogue; balls use det_2 channel products only.
ConvergenceReport determinant_convergence(const DomainSequence& seq, const PotentialSpec& V,
                                          const Energy& z, int per_panel = 64);

/// L2 distance between (H_j - z)^-1 f (extended by 0) and (H - z)^-1 f for
/// compactly supported probes, from the ODE boundary-value problems. 1D only.
ConvergenceReport resolvent_strong_convergence_spotcheck(const DomainSequence& seq,
                                                         const PotentialSpec& V, cplx z,
                                                         const std::vector<TestFunction>& probes);

/// int xi_j(lambda) / ((lambda - a)(lambda - z)^n) dlambda, n = 1..n_max.
ConvergenceReport moment_convergence(const DomainSequence& seq, const PotentialSpec& V, cplx a,
                                     cplx z, int n_max, const SsfCurve& limit,
                                     const IntegrationOptions& options = {});

struct KirschReport {
  std::vector<double> radii;
  std::vector<double> sup_abs;   ///< sup over lambda <= lambda_max of |xi_j|
  double lambda_max = 0.0;
  bool nondecreasing = true;
  bool exceeds_first = false;
};

/// Growth of sup |xi_j| for a radial 3D potential over balls.
KirschReport kirsch_demo(const DomainSequence& balls, const PotentialSpec& V, double lambda_max);

}  // namespace ssflab
