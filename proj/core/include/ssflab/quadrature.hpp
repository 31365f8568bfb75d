#pragma once

#include <cstddef>
#include <vector>

namespace ssflab {

/// Gauss-Legendre rule on [-1, 1]. Rules are computed once and cached.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

enum class QuadratureRule { gauss_legendre, trapezoid };

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t first = 0;
  std::size_t count = 0;
};

/// Composite rule over consecutive panels [b_0, b_1], [b_1, b_2], ...
class QuadratureGrid {
 public:
  QuadratureGrid() = default;

  /// per_panel nodes on each panel. Trapezoid grids include panel endpoints,
  /// shared endpoints are merged.
  static QuadratureGrid composite(const std::vector<double>& breakpoints, int per_panel,
                                  QuadratureRule rule = QuadratureRule::gauss_legendre);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Panel>& panels() const { return panels_; }
  QuadratureRule rule() const { return rule_; }
  std::size_t size() const { return nodes_.size(); }
  int per_panel() const { return per_panel_; }
  bool empty() const { return nodes_.empty(); }
  double lo() const { return panels_.empty() ? 0.0 : panels_.front().lo; }
  double hi() const { return panels_.empty() ? 0.0 : panels_.back().hi; }

  /// Same breakpoints, per_panel scaled by factor.
  QuadratureGrid refined(int factor) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Panel> panels_;
  std::vector<double> breakpoints_;
  QuadratureRule rule_ = QuadratureRule::gauss_legendre;
  int per_panel_ = 0;
};

/// Barycentric Lagrange weights for interpolation through the given nodes.
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

/// Values at x of the Lagrange basis polynomials through nodes.
void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bary, double x,
                    double* out);

}  // namespace ssflab
