#pragma once
// Internal assembly machinery shared by the 1D and partial-wave code paths.

#include <span>
#include <vector>

#include "ssflab/birman_schwinger.hpp"

namespace ssflab::detail {

/// Evaluates resolvent kernels for a fixed energy. A provider may return several
/// components (partial-wave channels) per call.
class KernelProvider {
 public:
  virtual ~KernelProvider() = default;
  virtual int components() const = 0;
  /// Inverse length scale over which the kernel varies next to the diagonal at x.
  virtual double rate(double x) const = 0;
  /// |k|: oscillation / decay wavenumber.
  virtual double wavenumber() const = 0;
  /// out[c * ys.size() + q] = G_c(x, ys[q]).
  virtual void row(double x, std::span<const double> ys, cplx* out) const = 0;
  /// out[c] = G_c(x, x).
  virtual void diagonal(double x, cplx* out) const = 0;
};

struct Assembled {
  std::vector<Eigen::MatrixXcd> matrices;
  std::vector<cplx> trace;
  std::vector<cplx> trace_sq;
  std::vector<double> hs_sq;
};

Assembled assemble_generic(const KernelProvider& provider, const FactorPair& pair,
                           const QuadratureGrid& grid, const AssemblyOptions& options);

}  // namespace ssflab::detail
