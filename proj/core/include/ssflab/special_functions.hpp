#pragma once

#include <complex>
#include <vector>

namespace ssflab {

using cplx = std::complex<double>;

/// Square root on the physical sheet: w*w == z and Im w >= 0. On the positive
/// real axis the limit from the upper half plane (+sqrt) is returned.
cplx principal_sqrt(cplx z);

/// Hankel function H0^(1)(w) for Im w >= 0, w != 0.
cplx hankel1_0(cplx w);

/// H0^(1)(w) * exp(-i w); finite where the unscaled value under/overflows.
cplx hankel1_0_scaled(cplx w);

/// Modified Bessel K0(x) for Re x > 0 (series / Steed continued fraction).
/// Kept separate from hankel1_0 so the two can be checked against each other.
cplx bessel_k0(cplx x);

/// K0(x) * exp(x).
cplx bessel_k0_scaled(cplx x);

/// Logarithms of the Riccati-Bessel functions jhat_l(x) = x j_l(x) and
/// hhat_l(x) = x h_l^(1)(x) for l = 0..l_max. Working in logs keeps the
/// products jhat_l(x) hhat_l(y) finite for large l and small x.
struct RiccatiLogs {
  std::vector<cplx> log_j;
  std::vector<cplx> log_h;
};

RiccatiLogs riccati_logs(int l_max, cplx x);

/// Log of sin(x), stable for large |Im x|.
cplx log_sin(cplx x);

}  // namespace ssflab
