#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bs_internal.hpp"
#include "ssflab/birman_schwinger.hpp"
#include "ssflab/errors.hpp"

namespace ssflab {
namespace {

constexpr cplx kI{0.0, 1.0};

// Partial-wave kernels g_l(r, s) = (i/k) jhat_l(k r<) hhat_l(k r>), optionally
// with the Dirichlet correction at r = R, for l in [l_lo, l_hi].
class RadialProvider final : public detail::KernelProvider {
 public:
  RadialProvider(cplx k, int l_lo, int l_hi, std::optional<double> radius)
      : k_(k), l_lo_(l_lo), l_hi_(l_hi), radius_(radius) {
    if (radius_) {
      edge_ = riccati_logs(l_hi_, k_ * *radius_);
      // jhat_l hhat_l is O(1) when oscillatory and about x / (2l + 1) when
      // evanescent; it vanishes only at a zero of jhat_l.
      const double ax = std::abs(k_ * *radius_);
      for (int l = l_lo_; l <= l_hi_; ++l)
        if (std::abs(std::exp(edge_.log_j[l] + edge_.log_h[l])) <
            1e-13 * std::min(1.0, ax / (2.0 * l + 1.0)))
          throw PoleError("assemble_channels", "energy is a Dirichlet eigenvalue of a free channel");
    }
  }
  int components() const override { return l_hi_ - l_lo_ + 1; }
  double rate(double x) const override {
    return std::max(std::abs(k_), 1e-3) + (l_hi_ + 1.0) / std::max(x, 1e-300);
  }
  double wavenumber() const override { return std::abs(k_); }

  void row(double x, std::span<const double> ys, cplx* out) const override {
    const RiccatiLogs lx = riccati_logs(l_hi_, k_ * x);
    const std::size_t m = ys.size();
    const int nc = components();
    for (std::size_t q = 0; q < m; ++q) {
      const double y = ys[q];
      const RiccatiLogs ly = riccati_logs(l_hi_, k_ * y);
      const RiccatiLogs& lo = y < x ? ly : lx;
      const RiccatiLogs& hi = y < x ? lx : ly;
      for (int c = 0; c < nc; ++c) out[c * m + q] = value(l_lo_ + c, lo, hi);
    }
  }
  void diagonal(double x, cplx* out) const override {
    const RiccatiLogs lx = riccati_logs(l_hi_, k_ * x);
    for (int c = 0; c < components(); ++c) out[c] = value(l_lo_ + c, lx, lx);
  }

 private:
  cplx value(int l, const RiccatiLogs& lo, const RiccatiLogs& hi) const {
    const cplx free = kI / k_ * std::exp(lo.log_j[l] + hi.log_h[l]);
    if (!radius_) return free;
    const cplx ratio = std::exp(hi.log_j[l] - hi.log_h[l] + edge_.log_h[l] - edge_.log_j[l]);
    return free * (1.0 - ratio);
  }

  cplx k_;
  int l_lo_, l_hi_;
  std::optional<double> radius_;
  RiccatiLogs edge_;
};

void check_radial(const KernelId& kernel, const FactorPair& pair, const QuadratureGrid& grid) {
  kernel.validate();
  if (kernel.dimension != 3)
    throw std::invalid_argument("assemble_channels: kernel must be three-dimensional");
  if (!pair.potential().radial())
    throw std::invalid_argument("assemble_channels: potential must be radial (dimension 3)");
  if (grid.empty()) return;
  if (grid.lo() < 0.0) throw std::invalid_argument("assemble_channels: radii must be >= 0");
  if (const auto* ball = std::get_if<Ball>(&kernel.geometry))
    if (grid.hi() > ball->radius)
      throw std::invalid_argument("assemble_channels: grid extends outside the ball");
  if (grid.rule() != QuadratureRule::gauss_legendre)
    throw std::invalid_argument("assemble_channels: radial grids must be Gauss-Legendre");
}

// Least-squares fit of t_l ~ sum_p c_p nu^-p (p = 2..order+1) on l in
// [top - window + 1, top], summed analytically over l > top.
cplx fitted_tail(const std::vector<cplx>& t, int top, int window, int order) {
  const int first = top - window + 1;
  if (first < 1 || order < 1) return 0.0;
  const double nu_top = top + 0.5;
  Eigen::MatrixXd A(window, order);
  Eigen::MatrixXd rhs(window, 2);
  for (int r = 0; r < window; ++r) {
    const int l = first + r;
    const double s = nu_top / (l + 0.5);
    double sp = s * s;
    for (int p = 0; p < order; ++p) {
      A(r, p) = sp;
      sp *= s;
    }
    rhs(r, 0) = t[l].real();
    rhs(r, 1) = t[l].imag();
  }
  const Eigen::MatrixXd d = A.colPivHouseholderQr().solve(rhs);
  cplx tail = 0.0;
  for (int p = 0; p < order; ++p) {
    const double power = p + 2.0;
    // c_p = d_p * nu_top^power; sum_{l > top} nu^-power = zeta(power, top + 1.5)
    const double factor = std::pow(nu_top, power) * hurwitz_zeta(power, top + 1.5);
    tail += cplx{d(p, 0), d(p, 1)} * factor;
  }
  return tail;
}

}  // namespace

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) throw std::invalid_argument("hurwitz_zeta: need s > 1, a > 0");
  // Euler-Maclaurin with N direct terms.
  constexpr int N = 12;
  double sum = 0.0;
  for (int n = 0; n < N; ++n) sum += std::pow(n + a, -s);
  const double x = N + a;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  static constexpr double b2k[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
                                   -691.0 / 2730, 7.0 / 6};
  double rising = s;          // s (s+1) ... (s + 2k - 2)
  double fact = 2.0;          // (2k)!
  double xp = std::pow(x, -s - 1.0);
  for (int k = 1; k <= 7; ++k) {
    sum += b2k[k - 1] / fact * rising * xp;
    rising *= (s + 2 * k - 1) * (s + 2 * k);
    fact *= (2.0 * k + 1) * (2.0 * k + 2);
    xp /= x * x;
  }
  return sum;
}

std::vector<BSOperator> assemble_channels(const KernelId& kernel, const FactorPair& pair,
                                          const QuadratureGrid& grid, const Energy& z, int l_lo,
                                          int l_hi, const AssemblyOptions& options) {
  check_radial(kernel, pair, grid);
  if (l_lo < 0 || l_hi < l_lo) throw std::invalid_argument("assemble_channels: bad channel range");
  std::optional<double> radius;
  if (const auto* ball = std::get_if<Ball>(&kernel.geometry)) radius = ball->radius;
  const RadialProvider provider(z.root(), l_lo, l_hi, radius);
  detail::Assembled a = detail::assemble_generic(provider, pair, grid, options);
  std::vector<BSOperator> ops;
  ops.reserve(a.matrices.size());
  for (std::size_t c = 0; c < a.matrices.size(); ++c)
    ops.emplace_back(std::move(a.matrices[c]), z, kernel, grid, Channel{l_lo + int(c)},
                     a.trace[c], a.trace_sq[c], a.hs_sq[c]);
  return ops;
}

std::vector<BSOperator> assemble_channels(const KernelId& kernel, const FactorPair& pair,
                                          const QuadratureGrid& grid, const Energy& z, int l_max,
                                          const AssemblyOptions& options) {
  return assemble_channels(kernel, pair, grid, z, 0, l_max, options);
}

ChannelProduct det2(std::span<const BSOperator> channels) {
  ChannelProduct out;
  for (const BSOperator& op : channels) {
    if (!op.channel()) throw std::invalid_argument("det2: operator has no channel tag");
    const cplx l = log_det2(op);
    out.channel_logs.push_back(l);
    out.log_value += double(op.channel()->multiplicity()) * l;
    out.l_max = std::max(out.l_max, op.channel()->ell);
  }
  return out;
}

ChannelProduct det2_radial_fixed(const KernelId& kernel, const FactorPair& pair,
                                 const QuadratureGrid& grid, const Energy& z, int l_max,
                                 const ChannelOptions& options) {
  ChannelProduct out;
  if (grid.empty()) return out;
  if (l_max < options.fit_window) throw std::invalid_argument("det2_radial_fixed: l_max below fit window");
  const auto ops = assemble_channels(kernel, pair, grid, z, 0, l_max, options.assembly);
  std::vector<cplx> t(ops.size());
  out.channel_logs.resize(ops.size());
  cplx head = 0.0;
  for (std::size_t l = 0; l < ops.size(); ++l) {
    out.channel_logs[l] = log_det2(ops[l]);
    t[l] = double(2 * l + 1) * out.channel_logs[l];
    head += t[l];
  }
  out.l_max = l_max;
  out.tail = fitted_tail(t, l_max, options.fit_window, options.fit_order);
  if (l_max - 8 >= options.fit_window) {
    cplx head8 = head;
    for (int l = l_max - 7; l <= l_max; ++l) head8 -= t[l];
    out.tail_error = std::abs(head + out.tail - head8 -
                              fitted_tail(t, l_max - 8, options.fit_window, options.fit_order));
  }
  out.log_value = head + out.tail;
  return out;
}

int radial_channel_count(const QuadratureGrid& grid, cplx k, const ChannelOptions& options) {
  if (grid.empty()) return options.l_min;
  const double reach = std::abs(k) * grid.hi();
  const int top = std::max(options.l_min, int(std::ceil(2.0 * reach)) + options.fit_window + 16);
  return std::min(top, options.l_cap);
}

ChannelProduct det2_radial(const KernelId& kernel, const FactorPair& pair,
                           const QuadratureGrid& grid, const Energy& z,
                           const ChannelOptions& options) {
  ChannelProduct out;
  if (grid.empty()) return out;
  int top = radial_channel_count(grid, z.root(), options);
  for (;;) {
    const auto ops = assemble_channels(kernel, pair, grid, z, 0, top, options.assembly);
    std::vector<cplx> logs(ops.size()), t(ops.size());
    for (std::size_t l = 0; l < ops.size(); ++l) {
      logs[l] = log_det2(ops[l]);
      t[l] = double(2 * l + 1) * logs[l];
    }
    auto total_at = [&](int upto) {
      cplx s = 0.0;
      for (int l = 0; l <= upto; ++l) s += t[l];
      return s + fitted_tail(t, upto, options.fit_window, options.fit_order);
    };
    const cplx total = total_at(top);
    double err = std::numeric_limits<double>::infinity();
    if (top - 8 >= options.fit_window) {
      err = std::max(std::abs(total - total_at(top - 4)), std::abs(total - total_at(top - 8)));
    }
    if (err < options.tolerance || top >= options.l_cap) {
      out.channel_logs = logs;
      out.l_max = top;
      cplx head = 0.0;
      for (int l = 0; l <= top; ++l) head += t[l];
      out.tail = total - head;
      out.tail_error = err;
      out.log_value = total;
      return out;
    }
    top = std::min(options.l_cap, top + std::max(8, top / 2));
  }
}

}  // namespace ssflab
