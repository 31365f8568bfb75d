#include "ssflab/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace ssflab {
namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) {
        // one more evaluation of dp at the converged node
        p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(compute_gauss_legendre(n));
  return *slot;
}

QuadratureGrid QuadratureGrid::composite(const std::vector<double>& breakpoints, int per_panel,
                                         QuadratureRule rule) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("QuadratureGrid: need at least two breakpoints");
  if (per_panel < 2) throw std::invalid_argument("QuadratureGrid: per_panel must be >= 2");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("QuadratureGrid: breakpoints must be strictly increasing");

  QuadratureGrid g;
  g.rule_ = rule;
  g.per_panel_ = per_panel;
  g.breakpoints_ = breakpoints;
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double lo = breakpoints[p], hi = breakpoints[p + 1];
    Panel panel{lo, hi, g.nodes_.size(), 0};
    if (rule == QuadratureRule::gauss_legendre) {
      const GaussRule& gl = gauss_legendre(per_panel);
      const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
      for (int i = 0; i < per_panel; ++i) {
        g.nodes_.push_back(mid + half * gl.nodes[i]);
        g.weights_.push_back(half * gl.weights[i]);
      }
      panel.count = per_panel;
    } else {
      const double h = (hi - lo) / (per_panel - 1);
      const bool shared = p > 0;
      if (shared) {
        g.weights_.back() += 0.5 * h;
        panel.first -= 1;
      }
      for (int i = shared ? 1 : 0; i < per_panel; ++i) {
        g.nodes_.push_back(lo + h * i);
        g.weights_.push_back((i == 0 || i == per_panel - 1) ? 0.5 * h : h);
      }
      panel.count = per_panel;
    }
    g.panels_.push_back(panel);
  }
  return g;
}

QuadratureGrid QuadratureGrid::refined(int factor) const {
  return composite(breakpoints_, per_panel_ * factor, rule_);
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 1.0);
  // Scale by the interval length to keep the weights O(1) for large n.
  const double scale = n > 1 ? 4.0 / (nodes.back() - nodes.front()) : 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) w[j] *= scale * (nodes[j] - nodes[k]);
    w[j] = 1.0 / w[j];
  }
  return w;
}

void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bary, double x,
                    double* out) {
  const std::size_t n = nodes.size();
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = x - nodes[j];
    if (d == 0.0) {
      for (std::size_t k = 0; k < n; ++k) out[k] = k == j ? 1.0 : 0.0;
      return;
    }
    out[j] = bary[j] / d;
    denom += out[j];
  }
  for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
}

}  // namespace ssflab
