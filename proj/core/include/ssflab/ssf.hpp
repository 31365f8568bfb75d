#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssflab/birman_schwinger.hpp"
#include "ssflab/kernels.hpp"
#include "ssflab/potential.hpp"
#include "ssflab/spectra.hpp"

namespace ssflab {

enum class SsfMethod { det, det2, counting };
std::string to_string(SsfMethod m);

/// Step of size `size` at `lambda`: xi(mu) gains `size` for mu > lambda.
struct Jump {
  double lambda = 0.0;
  double size = 0.0;
};

/// Points of a phase contour lambda + i eps(lambda) with the principal and the
/// continuously continued argument of the determinant.
struct BranchTrack {
  std::vector<Energy> contour;
  std::vector<double> raw_args;
  std::vector<double> unwrapped_args;
};

struct SsfCurve {
  std::vector<double> lambdas;
  std::vector<double> values;
  SsfMethod method = SsfMethod::det;
  /// Point below the spectra of both operators where the value is 0.
  double anchor = 0.0;
  std::vector<double> epsilon_schedule;
  /// 0 where the value is the extrapolation to the real axis, otherwise the
  /// smallest epsilon actually used.
  std::vector<double> epsilon_used;
  std::vector<bool> reliable;
  std::string pair_id;
  /// Exact steps. Counting curves are represented by these alone; other
  /// curves add them to the interpolated samples.
  std::vector<Jump> jumps;
  /// Eigenvalues and thresholds around which points are flagged unreliable.
  std::vector<double> excluded;
  /// Additive constant fixed by the anchor, and the published one if any.
  double constant = 0.0;
  std::optional<double> published_constant;
  std::vector<BranchTrack> tracks;

  std::size_t size() const { return lambdas.size(); }
  /// Sum of jumps below lambda, plus (except for counting curves with jumps)
  /// linear interpolation of the samples, which count as 0 outside the grid.
  double value_at(double lambda) const;
};

struct SsfOptions {
  std::vector<double> eps_schedule{1e-2, 5e-3, 2.5e-3};
  double exclusion_radius = 0.02;
  /// Within this distance of an excluded point every epsilon is scaled by
  /// distance / threshold_scale (but not below min_epsilon_scale).
  double threshold_scale = 0.04;
  double min_epsilon_scale = 1e-3;
  int max_refinement_depth = 20;
  double anchor_tolerance = 0.05;
  int per_panel = 64;
  ChannelOptions channels{};
  AssemblyOptions assembly{};
  bool keep_tracks = false;
};

/// Per-point input to the phase machinery: log-determinant components with
/// weights (one for 1D, 2l + 1 per channel in 3D) plus a continuous extra phase.
struct PhaseSample {
  std::vector<cplx> logs;
  std::vector<double> weights;
  double extra = 0.0;
  cplx total_log() const;
};
using PhaseEvaluator = std::function<PhaseSample(const Energy&)>;

/// xi = (Phi(lambda + i0) - Phi(anchor)) / pi with Phi the continuously tracked
/// phase, Richardson-extrapolated over the epsilon schedule.
SsfCurve phase_curve(const PhaseEvaluator& evaluate, const std::vector<double>& lambdas,
                     std::vector<double> special_points, double spectrum_floor, SsfMethod method,
                     std::string pair_id, const SsfOptions& options = {});

/// Full determinant, 1D full line.
SsfCurve ssf_det(const PotentialSpec& V, const KernelId& kernel, const std::vector<double>& lambdas,
                 const SsfOptions& options = {});
/// det_2 with the eta correction, 1D full line or 3D radial full space.
SsfCurve ssf_det2(const PotentialSpec& V, const KernelId& kernel,
                  const std::vector<double>& lambdas, const SsfOptions& options = {});
/// N_{H0}(lambda) - N_H(lambda) on a finite domain.
SsfCurve ssf_counting(const PotentialSpec& V, const DomainSpec& domain,
                      const std::vector<double>& lambdas, const PruferOptions& options = {});
/// Exact step representation of the counting curve up to lambda_max.
std::vector<Jump> counting_jumps(const PotentialSpec& V, const DomainSpec& domain,
                                 double lambda_max, const PruferOptions& options = {});

struct ChainRuleReport {
  SsfMethod method = SsfMethod::counting;
  std::vector<double> lambdas;
  std::vector<double> xi;        ///< xi(.; H, H0)
  std::vector<double> xi_plus;   ///< xi(.; H0 + V+, H0)
  std::vector<double> xi_minus;  ///< -xi(.; H, H0 + V+)
  std::vector<bool> reliable;
  double residual = 0.0;         ///< sup |xi - (xi_plus - xi_minus)| over reliable points
  double min_plus = 0.0;
  double min_minus = 0.0;
  bool plus_nonnegative = true;
  bool minus_nonnegative = true;
};

/// Counting pipeline on a finite domain.
ChainRuleReport chain_rule_check(const PotentialSpec& V, const DomainSpec& domain,
                                 const std::vector<double>& lambdas,
                                 const PruferOptions& options = {});
/// Determinant pipeline on the full line (1D). Sign slack for the
/// nonnegativity flags is `slack`.
ChainRuleReport chain_rule_check(const PotentialSpec& V, const std::vector<double>& lambdas,
                                 const SsfOptions& options = {}, double slack = 1e-2);

}  // namespace ssflab
