#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ssflab/kernels.hpp"

namespace ssflab::cli {

struct KernelCase {
  std::string kernel;  ///< free1, free3 or interval
  std::string eq;
  std::complex<double> z;
  double a = 0.0, b = 0.0;  ///< interval ends (interval cases)
  double x = 0.0, y = 0.0;  ///< points (distance in 3D)
  std::complex<double> value;
  std::complex<double> oracle;
  double rel_error = 0.0;
};

struct KernelCheckResult {
  std::vector<KernelCase> cases;
  double max_rel_error = 0.0;
  double seconds = 0.0;
  MonotonicityReport interval_monotonicity;
  MonotonicityReport ball_monotonicity;
};

/// Random (z, x, y) cases for the free 1D/3D and interval kernels against
/// closed forms and the eigenfunction expansion, plus the domain monotonicity
/// checks. Deterministic for a given seed.
KernelCheckResult kernel_check(std::uint64_t seed, int samples);

/// Eigenfunction expansion of the Dirichlet Green's function on (a, b):
/// sum_n (2/L) sin(n pi (x-a)/L) sin(n pi (y-a)/L) / ((n pi / L)^2 - z).
/// The z = 0 value and the n^-4 part of the series are summed in closed form,
/// the remainder (terms ~ n^-6) explicitly.
std::complex<double> interval_green_expansion(std::complex<double> z, double a, double b, double x,
                                              double y, int terms = 4000);

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Fast invariant suite behind `ssf-lab selfcheck`.
std::vector<CheckLine> selfcheck(std::uint64_t seed);

}  // namespace ssflab::cli
