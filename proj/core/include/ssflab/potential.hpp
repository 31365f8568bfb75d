#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace ssflab {

/// V = -depth on |x| < half_width (r < half_width in 3D), zero outside.
struct SquareWell {
  double depth = 0.0;
  double half_width = 1.0;
};

/// V = amplitude * exp(-(x / width)^2), cut off at the support radius.
struct Gaussian {
  double amplitude = 0.0;
  double width = 1.0;
};

/// Piecewise linear through (abscissae, values), zero outside the sample range.
/// In 3D the abscissae are radii.
struct Sampled {
  std::vector<double> abscissae;
  std::vector<double> values;
};

struct ZeroProfile {};

using Profile = std::variant<ZeroProfile, SquareWell, Gaussian, Sampled>;

/// Real, bounded, compactly supported potential in dimension 1 or radial in 3D.
class PotentialSpec {
 public:
  enum class Part { whole, positive, negative };

  static PotentialSpec zero(int dimension = 1);
  static PotentialSpec square_well(int dimension, double depth, double half_width);
  static PotentialSpec gaussian(int dimension, double amplitude, double width,
                                double support_radius);
  static PotentialSpec sampled(int dimension, std::vector<double> abscissae,
                               std::vector<double> values);

  int dimension() const { return dimension_; }
  bool radial() const { return dimension_ == 3; }
  double support_radius() const { return support_radius_; }
  const Profile& profile() const { return profile_; }
  Part part() const { return part_; }

  /// V at coordinate x (1D) or radius r (3D).
  double operator()(double x) const;
  bool is_zero() const;

  /// Support endpoints, kinks, jumps and sign changes inside the clip window,
  /// sorted. Empty for the zero potential.
  std::vector<double> breakpoints() const;

  /// Lower and upper end of the (clipped) support.
  double support_lo() const;
  double support_hi() const;

  /// int V d^n x and int |V| d^n x.
  double integral() const;
  double l1_norm() const;
  double min_value() const;
  double max_value() const;

  /// (|V| + V)/2 and (|V| - V)/2.
  PotentialSpec positive_part() const;
  PotentialSpec negative_part() const;

  /// V restricted to (lo, hi) (1D coordinates or radii), zero outside.
  PotentialSpec restricted(double lo, double hi) const;
  /// factor * V.
  PotentialSpec scaled(double factor) const;

  std::string describe() const;

 private:
  double raw(double x) const;
  double integrate(bool absolute) const;

  int dimension_ = 1;
  Profile profile_ = ZeroProfile{};
  double support_radius_ = 0.0;
  Part part_ = Part::whole;
  double scale_ = 1.0;
  double clip_lo_ = -std::numeric_limits<double>::infinity();
  double clip_hi_ = std::numeric_limits<double>::infinity();
};

/// V = u v with v = |V|^{1/2}, u = v sgn V, optionally restricted to a
/// finite domain.
class FactorPair {
 public:
  explicit FactorPair(PotentialSpec potential) : potential_(std::move(potential)) {}

  const PotentialSpec& potential() const { return potential_; }
  double v(double x) const;
  double u(double x) const;
  double V(double x) const { return potential_(x); }
  bool restricted() const { return restricted_; }

 private:
  friend FactorPair factorize(const PotentialSpec&, double, double);
  PotentialSpec potential_;
  bool restricted_ = false;
};

FactorPair factorize(const PotentialSpec& V);
/// Factorization of the restriction of V to (lo, hi).
FactorPair factorize(const PotentialSpec& V, double lo, double hi);

struct SignSplit {
  PotentialSpec positive;
  PotentialSpec negative;
};

SignSplit sign_split(const PotentialSpec& V);

}  // namespace ssflab
