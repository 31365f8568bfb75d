#include "ssflab/birman_schwinger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bs_internal.hpp"
#include "ssflab/errors.hpp"

namespace ssflab {
namespace {
constexpr cplx kI{0.0, 1.0};
}  // namespace

namespace detail {
namespace {

struct SubPoint {
  double y;
  double w;
  int panel;
};

// Appends Gauss points on [s, e], graded toward the end nearest `focus`.
void add_segment(double s, double e, double focus, double rate, double max_len, int q,
                 int panel, std::vector<SubPoint>& out) {
  const double len = e - s;
  if (!(len > 0.0)) return;
  const GaussRule& gl = gauss_legendre(q);
  auto emit = [&](double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < q; ++i) out.push_back({mid + half * gl.nodes[i], half * gl.weights[i], panel});
  };
  const bool from_start = std::abs(focus - s) <= std::abs(focus - e);
  double h = std::min({len, 8.0 / rate, max_len});
  double done = 0.0;
  while (done < len) {
    const double step = std::min(h, len - done);
    const double a = done, b = done + step;
    if (from_start) emit(s + a, s + b);
    else emit(e - b, e - a);
    done = b;
    h = std::min(2.0 * h, max_len);
  }
}

}  // namespace

Assembled assemble_generic(const KernelProvider& provider, const FactorPair& pair,
                           const QuadratureGrid& grid, const AssemblyOptions& options) {
  const int nc = provider.components();
  const std::size_t n = grid.size();
  Assembled out;
  out.matrices.assign(nc, Eigen::MatrixXcd::Zero(n, n));
  out.trace.assign(nc, 0.0);
  out.trace_sq.assign(nc, 0.0);
  out.hs_sq.assign(nc, 0.0);
  if (n == 0) return out;

  const auto& nodes = grid.nodes();
  const auto& weights = grid.weights();
  const auto& panels = grid.panels();
  const bool product =
      options.mode == AssemblyMode::product && grid.rule() == QuadratureRule::gauss_legendre;

  std::vector<double> u(n), v(n), V(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = pair.u(nodes[i]);
    v[i] = pair.v(nodes[i]);
    V[i] = u[i] * v[i];
  }

  std::vector<std::vector<double>> panel_nodes(panels.size()), panel_bary(panels.size());
  for (std::size_t p = 0; p < panels.size(); ++p) {
    panel_nodes[p].assign(nodes.begin() + panels[p].first,
                          nodes.begin() + panels[p].first + panels[p].count);
    panel_bary[p] = barycentric_weights(panel_nodes[p]);
  }

  const double kabs = std::max(provider.wavenumber(), 1e-300);
  const double max_len = options.phase_per_piece / kabs;
  std::vector<SubPoint> sub;
  std::vector<double> ys, vy;
  std::vector<cplx> vals, diag(nc);
  std::vector<double> basis;
  std::vector<Eigen::VectorXcd> acc(nc);

  for (std::size_t i = 0; i < n; ++i) {
    const double x = nodes[i];
    const double rate = provider.rate(x);
    sub.clear();
    for (std::size_t p = 0; p < panels.size(); ++p) {
      const double lo = panels[p].lo, hi = panels[p].hi;
      if (x > lo && x < hi) {
        add_segment(lo, x, x, rate, max_len, options.split_points, int(p), sub);
        add_segment(x, hi, x, rate, max_len, options.split_points, int(p), sub);
      } else {
        add_segment(lo, hi, x, rate, max_len, options.split_points, int(p), sub);
      }
    }
    const std::size_t m = sub.size();
    ys.resize(m);
    vy.resize(m);
    for (std::size_t q = 0; q < m; ++q) {
      ys[q] = sub[q].y;
      vy[q] = pair.V(sub[q].y);
    }
    vals.resize(std::size_t(nc) * m);
    provider.row(x, ys, vals.data());
    provider.diagonal(x, diag.data());

    const double wi = weights[i];
    for (int c = 0; c < nc; ++c) {
      out.trace[c] += wi * V[i] * diag[c];
      cplx tsq = 0.0;
      double hs = 0.0;
      for (std::size_t q = 0; q < m; ++q) {
        const cplx g = vals[c * m + q];
        tsq += sub[q].w * vy[q] * g * g;
        hs += sub[q].w * std::abs(vy[q]) * std::norm(g);
      }
      out.trace_sq[c] += wi * V[i] * tsq;
      out.hs_sq[c] += wi * std::abs(V[i]) * hs;
    }

    if (!product) {
      std::vector<double> ynodes(nodes.begin(), nodes.end());
      std::vector<cplx> direct(std::size_t(nc) * n);
      provider.row(x, ynodes, direct.data());
      for (int c = 0; c < nc; ++c)
        for (std::size_t k = 0; k < n; ++k)
          out.matrices[c](i, k) = u[i] * direct[c * n + k] * v[k] * std::sqrt(wi * weights[k]);
      continue;
    }

    for (int c = 0; c < nc; ++c) acc[c] = Eigen::VectorXcd::Zero(n);
    for (std::size_t q = 0; q < m; ++q) {
      const int p = sub[q].panel;
      const std::size_t first = panels[p].first, cnt = panels[p].count;
      basis.resize(cnt);
      lagrange_basis(panel_nodes[p], panel_bary[p], sub[q].y, basis.data());
      for (int c = 0; c < nc; ++c) {
        const cplx gw = vals[c * m + q] * sub[q].w;
        cplx* row = acc[c].data() + first;
        for (std::size_t j = 0; j < cnt; ++j) row[j] += gw * basis[j];
      }
    }
    const double swi = std::sqrt(wi);
    for (int c = 0; c < nc; ++c)
      for (std::size_t k = 0; k < n; ++k)
        out.matrices[c](i, k) = swi * u[i] * acc[c][k] * v[k] / std::sqrt(weights[k]);
  }
  return out;
}

namespace {

class FreeLine final : public KernelProvider {
 public:
  explicit FreeLine(cplx k) : k_(k) {}
  int components() const override { return 1; }
  double rate(double) const override { return std::max(std::abs(k_), 1e-3); }
  double wavenumber() const override { return std::abs(k_); }
  void row(double x, std::span<const double> ys, cplx* out) const override {
    const cplx pre = kI / (2.0 * k_);
    for (std::size_t q = 0; q < ys.size(); ++q) out[q] = pre * std::exp(kI * k_ * std::abs(x - ys[q]));
  }
  void diagonal(double, cplx* out) const override { out[0] = kI / (2.0 * k_); }

 private:
  cplx k_;
};

class IntervalLine final : public KernelProvider {
 public:
  IntervalLine(cplx k, double a, double b) : k_(k), a_(a), b_(b) {
    (void)interval_dirichlet_green_k(k_, a_, b_, 0.5 * (a + b), 0.5 * (a + b));  // pole check
  }
  int components() const override { return 1; }
  double rate(double) const override { return std::max(std::abs(k_), 1e-3); }
  double wavenumber() const override { return std::abs(k_); }
  void row(double x, std::span<const double> ys, cplx* out) const override {
    for (std::size_t q = 0; q < ys.size(); ++q)
      out[q] = interval_dirichlet_green_k(k_, a_, b_, x, ys[q]);
  }
  void diagonal(double x, cplx* out) const override {
    out[0] = interval_dirichlet_green_k(k_, a_, b_, x, x);
  }

 private:
  cplx k_;
  double a_, b_;
};

}  // namespace
}  // namespace detail

BSOperator::BSOperator(Eigen::MatrixXcd matrix, Energy z, KernelId kernel, QuadratureGrid grid,
                       std::optional<Channel> channel, cplx exact_trace, cplx exact_trace_sq,
                       double exact_hs_sq)
    : matrix_(std::move(matrix)),
      z_(z),
      kernel_(std::move(kernel)),
      grid_(std::move(grid)),
      channel_(channel),
      exact_trace_(exact_trace),
      exact_trace_sq_(exact_trace_sq),
      exact_hs_sq_(exact_hs_sq) {
  if (!matrix_.allFinite())
    throw NumericalError("assemble", "non-finite entries in the Nystrom matrix");
}

cplx BSOperator::matrix_trace_sq() const {
  // tr(K^2) = sum_jk K_jk K_kj without forming the product
  return matrix_.cwiseProduct(matrix_.transpose()).sum();
}

QuadratureGrid default_grid(const FactorPair& pair, int per_panel, QuadratureRule rule) {
  const auto b = pair.potential().breakpoints();
  if (b.empty()) return {};
  return QuadratureGrid::composite(b, per_panel, rule);
}

namespace {

void check_grid(const KernelId& kernel, const QuadratureGrid& grid) {
  if (grid.empty()) return;
  if (const auto* iv = std::get_if<Interval>(&kernel.geometry)) {
    if (grid.lo() < iv->a || grid.hi() > iv->b)
      throw std::invalid_argument("assemble: grid extends outside the interval");
  }
  if (const auto* ball = std::get_if<Ball>(&kernel.geometry)) {
    if (grid.hi() > ball->radius) throw std::invalid_argument("assemble: grid extends outside the ball");
  }
  if (kernel.dimension == 3 && grid.lo() < 0.0)
    throw std::invalid_argument("assemble: radial grid must lie in r >= 0");
}

}  // namespace

BSOperator assemble(const KernelId& kernel, const FactorPair& pair, const QuadratureGrid& grid,
                    const Energy& z, const AssemblyOptions& options) {
  kernel.validate();
  if (kernel.dimension != 1)
    throw std::invalid_argument("assemble: use assemble_channels for radial 3D potentials");
  if (pair.potential().dimension() != 1)
    throw std::invalid_argument("assemble: potential dimension does not match the kernel");
  check_grid(kernel, grid);
  const cplx k = z.root();
  detail::Assembled a;
  if (kernel.is_full_space()) {
    a = detail::assemble_generic(detail::FreeLine(k), pair, grid, options);
  } else {
    const auto& iv = std::get<Interval>(kernel.geometry);
    a = detail::assemble_generic(detail::IntervalLine(k, iv.a, iv.b), pair, grid, options);
  }
  return BSOperator(std::move(a.matrices[0]), z, kernel, grid, std::nullopt, a.trace[0],
                    a.trace_sq[0], a.hs_sq[0]);
}

cplx log_det_identity_plus(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::Index n = m.rows();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Eigen::MatrixXcd::Identity(n, n) + m);
  const auto& U = lu.matrixLU();
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += std::log(U(i, i));
  if (lu.permutationP().determinant() < 0) s += cplx{0.0, std::numbers::pi};
  return s;
}

cplx matrix_det(const Eigen::MatrixXcd& m) { return std::exp(log_det_identity_plus(m)); }

cplx matrix_det2(const Eigen::MatrixXcd& m) {
  return std::exp(log_det_identity_plus(m) - m.trace());
}

cplx log_fredholm_det(const BSOperator& op) {
  if (op.kernel().dimension != 1)
    throw std::invalid_argument("fredholm_det: only defined for one-dimensional operators");
  const cplx d1 = op.exact_trace() - op.matrix_trace();
  const cplx d2 = op.exact_trace_sq() - op.matrix_trace_sq();
  const cplx l = log_det_identity_plus(op.matrix()) + d1 - 0.5 * d2;
  if (!std::isfinite(l.real()) || !std::isfinite(l.imag()))
    throw NumericalError("fredholm_det", "determinant is not finite");
  return l;
}

cplx fredholm_det(const BSOperator& op) { return std::exp(log_fredholm_det(op)); }

cplx log_det2(const BSOperator& op) {
  const cplx d2 = op.exact_trace_sq() - op.matrix_trace_sq();
  const cplx l = log_det_identity_plus(op.matrix()) - op.matrix_trace() - 0.5 * d2;
  if (!std::isfinite(l.real()) || !std::isfinite(l.imag()))
    throw NumericalError("det2", "determinant is not finite");
  return l;
}

cplx det2(const BSOperator& op) { return std::exp(log_det2(op)); }

EtaCorrection eta(int dimension, double integral_V) {
  EtaCorrection e;
  e.dimension = dimension;
  e.integral_V = integral_V;
  const double pi = std::numbers::pi;
  if (dimension == 3) {
    e.value = [integral_V, pi](cplx z) { return kI * principal_sqrt(z) * integral_V / (4.0 * pi); };
    e.derivative = [integral_V, pi](cplx z) {
      return kI * integral_V / (8.0 * pi * principal_sqrt(z));
    };
  } else if (dimension == 2) {
    e.value = [integral_V, pi](cplx z) { return -integral_V / (4.0 * pi) * std::log(-z); };
    e.derivative = [integral_V, pi](cplx z) { return -integral_V / (4.0 * pi * z); };
  } else {
    throw std::invalid_argument("eta: dimension must be 2 or 3 (use eta_1d in 1D)");
  }
  return e;
}

EtaCorrection eta_1d(const FactorPair& pair, const KernelId& kernel) {
  if (kernel.dimension != 1) throw std::invalid_argument("eta_1d: one-dimensional kernels only");
  EtaCorrection e;
  e.dimension = 1;
  e.integral_V = pair.potential().integral();
  const QuadratureGrid grid = default_grid(pair, 64);
  std::vector<double> xs = grid.nodes(), ws = grid.weights(), vs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vs[i] = pair.V(xs[i]);
  if (kernel.is_full_space()) {
    const double iv = e.integral_V;
    e.value = [iv](cplx z) { return kI * iv / (2.0 * principal_sqrt(z)); };
    e.derivative = [iv](cplx z) {
      const cplx k = principal_sqrt(z);
      return -kI * iv / (4.0 * k * k * k);
    };
  } else {
    const Interval iv = std::get<Interval>(kernel.geometry);
    e.value = [=](cplx z) {
      const cplx k = principal_sqrt(z);
      cplx s = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        s += ws[i] * vs[i] * interval_dirichlet_green_k(k, iv.a, iv.b, xs[i], xs[i]);
      return s;
    };
    e.derivative = [=](cplx z) {
      const cplx k = principal_sqrt(z);
      cplx s = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        s += ws[i] * vs[i] * interval_dirichlet_green_diag_dz(k, iv.a, iv.b, xs[i]);
      return s;
    };
  }
  return e;
}

GridConvergence converge_grid(const KernelId& kernel, const FactorPair& pair,
                              const std::vector<Energy>& probes, int per_panel, double tolerance,
                              int max_per_panel) {
  GridConvergence res;
  const auto b = pair.potential().breakpoints();
  if (b.empty()) return res;
  auto evaluate = [&](const QuadratureGrid& g) {
    std::vector<cplx> d;
    for (const Energy& z : probes) {
      if (kernel.dimension == 1) d.push_back(fredholm_det(assemble(kernel, pair, g, z)));
      else d.push_back(det2_radial(kernel, pair, g, z).value());
    }
    return d;
  };
  QuadratureGrid g = QuadratureGrid::composite(b, per_panel);
  std::vector<cplx> d = evaluate(g);
  double change = 0.0;
  for (int m = per_panel; m <= max_per_panel; m *= 2) {
    QuadratureGrid g2 = QuadratureGrid::composite(b, 2 * m);
    std::vector<cplx> d2 = evaluate(g2);
    change = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) change = std::max(change, std::abs(d2[i] - d[i]));
    if (change < tolerance) {
      res.grid = g;
      res.last_change = change;
      return res;
    }
    g = std::move(g2);
    d = std::move(d2);
  }
  std::ostringstream os;
  os << "determinant not converged under grid doubling up to " << max_per_panel
     << " nodes per panel (last change " << change << ")";
  throw ConvergenceError("converge_grid", os.str(), std::abs(d.empty() ? 0.0 : d[0]), change);
}

cplx log_relative_det(const KernelId& kernel, const PotentialSpec& total, int per_panel,
                      const Energy& z, const AssemblyOptions& options) {
  if (kernel.dimension != 1) throw std::invalid_argument("log_relative_det: 1D only");
  const FactorPair pair = factorize(total);
  const QuadratureGrid grid = default_grid(pair, per_panel);
  if (grid.empty()) return 0.0;
  const BSOperator k_all = assemble(kernel, pair, grid, z, options);
  const BSOperator k_pos = assemble(kernel, factorize(total.positive_part()), grid, z, options);

  std::vector<Eigen::Index> pos, rest;
  for (std::size_t i = 0; i < grid.size(); ++i)
    (total(grid.nodes()[i]) > 0.0 ? pos : rest).push_back(Eigen::Index(i));
  const Eigen::MatrixXcd& K = k_all.matrix();
  const Eigen::Index np = Eigen::Index(pos.size()), nr = Eigen::Index(rest.size());
  Eigen::MatrixXcd kpp(np, np), kpr(np, nr), krp(nr, np), krr(nr, nr);
  for (Eigen::Index a = 0; a < np; ++a) {
    for (Eigen::Index b = 0; b < np; ++b) kpp(a, b) = K(pos[a], pos[b]);
    for (Eigen::Index b = 0; b < nr; ++b) kpr(a, b) = K(pos[a], rest[b]);
  }
  for (Eigen::Index a = 0; a < nr; ++a) {
    for (Eigen::Index b = 0; b < np; ++b) krp(a, b) = K(rest[a], pos[b]);
    for (Eigen::Index b = 0; b < nr; ++b) krr(a, b) = K(rest[a], rest[b]);
  }
  // I + S = (I + K_rr) - K_rp (I + K_pp)^{-1} K_pr
  Eigen::MatrixXcd schur = krr;
  if (np > 0) {
    const Eigen::MatrixXcd ipp = Eigen::MatrixXcd::Identity(np, np) + kpp;
    schur -= krp * ipp.partialPivLu().solve(kpr);
  }
  auto correction = [](const BSOperator& op) {
    return (op.exact_trace() - op.matrix_trace()) -
           0.5 * (op.exact_trace_sq() - op.matrix_trace_sq());
  };
  return log_det_identity_plus(schur) + correction(k_all) - correction(k_pos);
}

}  // namespace ssflab
