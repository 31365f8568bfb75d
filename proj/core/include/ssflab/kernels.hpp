#pragma once

#include <array>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "ssflab/special_functions.hpp"

namespace ssflab {

/// Spectral parameter. off_axis energies lie off the cut [0, inf) of the free
/// operator (negative reals are allowed); upper_limit energies stand for
/// lambda + i0 and carry the finite epsilon used to approximate it.
class Energy {
 public:
  enum class Side { off_axis, upper_limit };

  static Energy off_axis(cplx z);
  static Energy upper_limit(double lambda, double epsilon);

  cplx value() const { return z_; }
  Side side() const { return side_; }
  double epsilon() const { return side_ == Side::upper_limit ? z_.imag() : 0.0; }
  double lambda() const { return z_.real(); }
  /// sqrt on the physical sheet (Im >= 0).
  cplx root() const { return principal_sqrt(z_); }

 private:
  Energy(cplx z, Side side) : z_(z), side_(side) {}
  cplx z_;
  Side side_;
};

struct FullSpace {};
struct Interval {
  double a = 0.0;
  double b = 1.0;
};
struct Ball {
  double radius = 1.0;
};

/// Which resolvent kernel: dimension plus geometry; boundary is always Dirichlet.
struct KernelId {
  int dimension = 1;
  std::variant<FullSpace, Interval, Ball> geometry = FullSpace{};

  static KernelId full_space(int dimension);
  static KernelId interval(double a, double b);
  static KernelId ball(int dimension, double radius);

  bool is_full_space() const { return std::holds_alternative<FullSpace>(geometry); }
  /// Throws std::invalid_argument when the invariants fail.
  void validate() const;
  std::string describe() const;
};

using Point = std::array<double, 3>;

/// Free resolvent kernel (-Laplace - z)^{-1}(x, y) in dimension n = 1, 2, 3.
/// In 1D only x[0], y[0] are used.
cplx free_green(int n, const Energy& z, const Point& x, const Point& y);
cplx free_green_1d(cplx k, double distance);
cplx free_green_3d(cplx k, double distance);
cplx free_green_2d(cplx k, double distance);

/// Dirichlet Green's function of -d^2/dx^2 on (a, b), written so that it stays
/// finite for any Im k >= 0 (the hyperbolic form at z = -E falls out of it).
cplx interval_dirichlet_green(const Energy& z, double a, double b, double x, double y);
cplx interval_dirichlet_green_k(cplx k, double a, double b, double x, double y);
/// Derivative with respect to z of the diagonal G(z, x, x).
cplx interval_dirichlet_green_diag_dz(cplx k, double a, double b, double x);

/// Hyperbolic form at z = -E, kept separately so the two can be compared.
double interval_dirichlet_green_hyperbolic(double energy, double a, double b, double x, double y);

/// Image-charge ball kernel in its published form:
///   psi_n(z, |x - y|) - psi_n(z, (|y|/R) |x - R^2 y / |y|^2|).
/// The image term does not solve the Helmholtz equation at energy z; use the
/// radial partial-wave kernels when the exact ball resolvent is needed.
cplx ball_dirichlet_green_paper(int n, const Energy& z, double radius, const Point& x,
                                const Point& y);

/// psi_n(z, r): free kernel as a function of distance.
cplx free_green_radial_profile(int n, cplx k, double r);

/// Free partial-wave kernel on L^2((0, inf), dr) for channel l:
///   g_l(r, s) = (i/k) jhat_l(k min) hhat_l(k max).
cplx radial_free_green(int l, cplx k, double r, double s);
/// Dirichlet partial-wave kernel on (0, R).
cplx radial_ball_green(int l, cplx k, double radius, double r, double s);

struct MonotonicityReport {
  bool holds = true;
  double worst_violation = 0.0;
  std::size_t samples = 0;
  std::string detail;
};

/// Checks 0 <= G_inner <= G_outer <= G_free at z = -E on the sample grid
/// (samples x samples points of the inner interval).
MonotonicityReport green_monotonicity_check(double energy, Interval inner, Interval outer,
                                            int samples);
/// Same for balls in 3D, using the published image kernel.
MonotonicityReport green_monotonicity_check(double energy, Ball inner, Ball outer,
                                            const std::vector<Point>& points);

}  // namespace ssflab
