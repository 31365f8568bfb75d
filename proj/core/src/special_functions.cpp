#include "ssflab/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssflab/errors.hpp"
#include "ssflab/quadrature.hpp"

namespace ssflab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr cplx kI{0.0, 1.0};

// Hankel asymptotic series, scaled by exp(-i w). Valid for |w| >= ~17 where the
// smallest term is below 1e-15.
cplx hankel_asymptotic_scaled(cplx w) {
  cplx sum = 1.0;
  cplx term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double a = (2.0 * k - 1.0) * (2.0 * k - 1.0);
    // i^k * a_k(0) / w^k with a_k(0) = (-1)^k prod (2j-1)^2 / (k! 8^k)
    term *= -kI * a / (8.0 * k * w);
    const double mag = std::abs(term);
    if (mag > prev) break;
    sum += term;
    if (mag < 1e-17 * std::abs(sum)) break;
    prev = mag;
  }
  return std::sqrt(2.0 / (kPi * w)) * std::exp(-kI * kPi / 4.0) * sum;
}

// J0 + i Y0 by ascending series; only used where cancellation is mild.
cplx hankel_series(cplx w) {
  const cplx q = -(w * w) / 4.0;
  cplx term = 1.0;
  cplx j0 = 1.0;
  cplx s = 0.0;
  double harmonic = 0.0;
  for (int k = 1; k < 300; ++k) {
    term *= q / double(k * k);
    harmonic += 1.0 / k;
    j0 += term;
    s += harmonic * term;
    if (std::abs(term) * harmonic < 1e-17 * (std::abs(j0) + std::abs(s)) && k > 2) break;
  }
  const cplx y0 = (2.0 / kPi) * ((std::log(w / 2.0) + kEulerGamma) * j0 - s);
  return j0 + kI * y0;
}

// (2/pi) int_0^{pi/2} exp(i w cos s) ds - (2i/pi) int_0^inf exp(-w sinh t) dt,
// for Re w >= ~7 and moderate |w|.
cplx hankel_contour(cplx w) {
  const GaussRule& rule = gauss_legendre(96);
  const auto& x = rule.nodes;
  const auto& wt = rule.weights;
  cplx first = 0.0;
  const double half = kPi / 4.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = half * (x[i] + 1.0);
    first += wt[i] * half * std::exp(kI * w * std::cos(s));
  }
  // exp(-w sinh t) decays below 1e-18 once Re(w) sinh t > 42.
  const double tmax = std::asinh(42.0 / w.real());
  cplx second = 0.0;
  const double ht = tmax / 2.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = ht * (x[i] + 1.0);
    second += wt[i] * ht * std::exp(-w * std::sinh(t));
  }
  return (2.0 / kPi) * first - (2.0 * kI / kPi) * second;
}

// K0(zeta) exp(zeta) = int_0^inf exp(-zeta (cosh t - 1)) dt by the trapezoid
// rule, which converges geometrically with a step tied to the analyticity strip.
cplx k0_trapezoid_scaled(cplx zeta) {
  const double re = zeta.real();
  const double im = std::abs(zeta.imag());
  const double d = 0.9 * std::atan2(re, im);
  const double h = 2.0 * kPi * d / 42.0;
  cplx sum = 0.5;
  for (int n = 1; n < 100000; ++n) {
    const double t = n * h;
    const double c = std::cosh(t) - 1.0;
    const cplx f = std::exp(-zeta * c);
    sum += f;
    if (re * c > 45.0) break;
  }
  return h * sum;
}

cplx hankel_scaled_right(cplx w) {
  const double aw = std::abs(w);
  if (aw >= 17.0) return hankel_asymptotic_scaled(w);
  if (w.imag() > 3.0) return (2.0 / (kI * kPi)) * k0_trapezoid_scaled(-kI * w);
  if (aw <= 8.0) return hankel_series(w) * std::exp(-kI * w);
  return hankel_contour(w) * std::exp(-kI * w);
}

cplx k0_series(cplx x) {
  const cplx q = x * x / 4.0;
  cplx term = 1.0;
  cplx i0 = 1.0;
  cplx s = 0.0;
  double harmonic = 0.0;
  for (int k = 1; k < 300; ++k) {
    term *= q / double(k * k);
    harmonic += 1.0 / k;
    i0 += term;
    s += harmonic * term;
    if (std::abs(term) * harmonic < 1e-17 * (std::abs(i0) + std::abs(s)) && k > 2) break;
  }
  return -(std::log(x / 2.0) + kEulerGamma) * i0 + s;
}

// Steed's continued fraction CF2 for K0 (Temme's normalization), scaled by exp(x).
cplx k0_cf2_scaled(cplx x) {
  cplx b = 2.0 * (1.0 + x);
  cplx d = 1.0 / b;
  cplx h = d;
  cplx delh = d;
  cplx q1 = 0.0;
  cplx q2 = 1.0;
  const double a1 = 0.25;
  cplx q = a1;
  cplx c = a1;
  double a = -a1;
  cplx s = 1.0 + q * delh;
  for (int i = 2; i < 100000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / double(i);
    const cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-17 * std::abs(s)) break;
  }
  return std::sqrt(kPi / (2.0 * x)) / s;
}

// sin(x) exp(-|Im x|) and cos(x) exp(-|Im x|) without overflow.
std::pair<cplx, cplx> scaled_sin_cos(cplx x) {
  const double y = x.imag();
  const double re = x.real();
  const cplx e_small = std::exp(cplx{-2.0 * std::abs(y), 0.0});  // exp(-2|y|)
  cplx ep, em;  // exp(ix), exp(-ix), each times exp(-|y|)
  if (y >= 0.0) {
    ep = std::polar(1.0, re) * e_small;
    em = std::polar(1.0, -re);
  } else {
    ep = std::polar(1.0, re);
    em = std::polar(1.0, -re) * e_small;
  }
  return {(ep - em) / (2.0 * kI), (ep + em) / 2.0};
}

}  // namespace

cplx principal_sqrt(cplx z) {
  if (z == cplx{}) return {};
  cplx w = std::sqrt(z);
  if (w.imag() < 0.0 || (w.imag() == 0.0 && w.real() < 0.0)) w = -w;
  return w;
}

cplx hankel1_0_scaled(cplx w) {
  if (w == cplx{}) throw DomainError("hankel1_0", "logarithmic singularity at w = 0");
  if (w.imag() < -1e-12 * std::abs(w))
    throw DomainError("hankel1_0", "argument below the real axis");
  if (w.imag() < 0.0) w.imag(0.0);
  if (w.real() < 0.0) {
    // H0(w) = -conj(H0(-conj w)) on the upper half plane; the scaling factor
    // transforms the same way.
    return -std::conj(hankel_scaled_right(-std::conj(w)));
  }
  return hankel_scaled_right(w);
}

cplx hankel1_0(cplx w) { return hankel1_0_scaled(w) * std::exp(kI * w); }

cplx bessel_k0_scaled(cplx x) {
  if (x == cplx{}) throw DomainError("bessel_k0", "logarithmic singularity at x = 0");
  if (x.real() <= 0.0) throw DomainError("bessel_k0", "requires Re x > 0");
  if (std::abs(x) <= 2.0) return k0_series(x) * std::exp(x);
  return k0_cf2_scaled(x);
}

cplx bessel_k0(cplx x) { return bessel_k0_scaled(x) * std::exp(-x); }

cplx log_sin(cplx x) {
  const auto [s, c] = scaled_sin_cos(x);
  (void)c;
  return std::log(s) + std::abs(x.imag());
}

RiccatiLogs riccati_logs(int l_max, cplx x) {
  if (l_max < 0) throw std::invalid_argument("riccati_logs: l_max must be nonnegative");
  if (x == cplx{}) throw DomainError("riccati_logs", "x = 0");
  RiccatiLogs out;
  out.log_j.resize(l_max + 1);
  out.log_h.resize(l_max + 1);

  // hhat by upward ratio recurrence; h is dominant going up in l.
  out.log_h[0] = cplx{0.0, -kPi / 2.0} + kI * x;
  cplx q = -kI + 1.0 / x;
  for (int l = 1; l <= l_max; ++l) {
    out.log_h[l] = out.log_h[l - 1] + std::log(q);
    q = (2.0 * l + 1.0) / x - 1.0 / q;
  }

  const double ax = std::abs(x);
  const cplx log_x = std::log(x);
  if (ax <= 2.0) {
    const cplx mx2 = -x * x / 2.0;
    for (int l = 0; l <= l_max; ++l) {
      cplx term = 1.0, sum = 1.0;
      for (int m = 1; m < 60; ++m) {
        term *= mx2 / (double(m) * (2.0 * l + 2.0 * m + 1.0));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
      }
      const double log_dfact =
          std::lgamma(2.0 * l + 2.0) - l * std::numbers::ln2 - std::lgamma(l + 1.0);
      out.log_j[l] = double(l + 1) * log_x - log_dfact + std::log(sum);
    }
    return out;
  }

  // Miller: ratios p_l = jhat_l / jhat_{l-1} from a downward continued fraction.
  const int top = std::max(l_max, 1);
  const int start = top + static_cast<int>(2.0 * ax) + 50;
  std::vector<cplx> p(top + 2);
  cplx pn = 0.0;
  for (int l = start; l >= 1; --l) {
    cplx den = (2.0 * l + 1.0) / x - pn;
    if (den == cplx{}) den = 1e-300;
    pn = 1.0 / den;
    if (l <= top) p[l] = pn;
  }
  const auto [s, c] = scaled_sin_cos(x);
  const cplx j1s = s / x - c;
  const double shift = std::abs(x.imag());
  if (std::abs(s) >= std::abs(j1s)) {
    out.log_j[0] = std::log(s) + shift;
    for (int l = 1; l <= l_max; ++l) out.log_j[l] = out.log_j[l - 1] + std::log(p[l]);
  } else {
    const cplx lj1 = std::log(j1s) + shift;
    out.log_j[0] = lj1 - std::log(p[1]);
    if (l_max >= 1) out.log_j[1] = lj1;
    for (int l = 2; l <= l_max; ++l) out.log_j[l] = out.log_j[l - 1] + std::log(p[l]);
  }
  return out;
}

}  // namespace ssflab
