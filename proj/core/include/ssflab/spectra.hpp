#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssflab/potential.hpp"

namespace ssflab {

/// Finite domain with Dirichlet boundary: an interval (a, b) in 1D or a ball
/// of radius R in 3D.
struct DomainSpec {
  enum class Kind { interval, ball };
  Kind kind = Kind::interval;
  int dimension = 1;
  double a = 0.0;
  double b = 1.0;
  double radius = 1.0;

  static DomainSpec interval(double a, double b);
  static DomainSpec ball(double radius);
  void validate() const;
  /// b - a for intervals, R for balls.
  double size() const;
  bool contains(const DomainSpec& inner) const;
  std::string describe() const;
};

struct ChannelCount {
  int ell = 0;
  long count = 0;
};

struct CountResult {
  double lambda = 0.0;
  long count = 0;
  std::vector<ChannelCount> per_channel;
  /// Set when lambda is within the coincidence tolerance of an eigenvalue;
  /// count is then the lower candidate and alternative the upper one.
  bool ambiguous = false;
  long alternative = 0;
};

struct PruferOptions {
  double tolerance = 1e-10;     ///< ODE tolerance; pieces with constant V are exact
  double coincidence = 1e-9;    ///< lambda window for the ambiguity flag
};

/// Dirichlet eigenvalues of -d^2/dx^2 + V on (a, b) strictly below lambda,
/// by the modified Pruefer phase.
CountResult count_interval(const PotentialSpec& V, double a, double b, double lambda,
                           const PruferOptions& options = {});

/// Pruefer angle theta(b; lambda) with theta(a) = 0. Eigenvalue n (n = 1, 2, ...)
/// is the lambda where it equals n pi.
double prufer_angle(const PotentialSpec& V, double a, double b, double lambda,
                    const PruferOptions& options = {});

/// Lowest Dirichlet eigenvalue by bisection on counts, to absolute 1e-8.
/// With require_bound, throws NoBoundStateError unless it is negative.
double ground_state_energy(const PotentialSpec& V, double a, double b,
                           bool require_bound = false);

/// All Dirichlet eigenvalues below lambda_max, ascending, each to about 1e-12.
std::vector<double> interval_eigenvalues(const PotentialSpec& V, double a, double b,
                                         double lambda_max, const PruferOptions& options = {});

/// Free eigenvalues (n pi / (b - a))^2 below lambda_max.
std::vector<double> free_interval_eigenvalues(double a, double b, double lambda_max);
/// Number of free eigenvalues strictly below lambda.
long free_interval_count(double a, double b, double lambda);

/// Bound states of -d^2/dx^2 + V on the line below -threshold, from a large box.
std::vector<double> bound_states_1d(const PotentialSpec& V, double threshold = 1e-6);

/// Radial channel l on (0, R): -u'' + (l(l+1)/r^2 + V) u, Dirichlet at both ends.
/// Eigenvalue count below lambda.
CountResult count_radial_channel(const PotentialSpec& V, int ell, double radius, double lambda,
                                 const PruferOptions& options = {});
std::vector<double> radial_channel_eigenvalues(const PotentialSpec& V, int ell, double radius,
                                               double lambda_max,
                                               const PruferOptions& options = {});

/// Eigenvalues of -Laplace + V on the ball B_R below lambda, with multiplicities
/// (2l + 1). Channels run until l(l+1)/R^2 + min V >= lambda, plus two.
CountResult count_ball_radial(const PotentialSpec& V, double radius, double lambda,
                              const PruferOptions& options = {});

/// (eigenvalue, multiplicity) pairs on the ball below lambda_max, ascending.
std::vector<std::pair<double, int>> ball_eigenvalues(const PotentialSpec& V, double radius,
                                                     double lambda_max,
                                                     const PruferOptions& options = {});

/// Bound states of a radial 3D potential in full space below -threshold, with
/// multiplicity, from a ball 40 units wider than the support.
std::vector<std::pair<double, int>> bound_states_radial(const PotentialSpec& V,
                                                        double threshold = 1e-3);

/// Generic count on a DomainSpec.
CountResult count(const PotentialSpec& V, const DomainSpec& domain, double lambda,
                  const PruferOptions& options = {});

}  // namespace ssflab
