#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ssflab/kernels.hpp"
#include "ssflab/potential.hpp"
#include "ssflab/quadrature.hpp"

namespace ssflab {

struct Channel {
  int ell = 0;
  int multiplicity() const { return 2 * ell + 1; }
};

/// plain: K_jk = u_j G(x_j, x_k) v_k sqrt(w_j w_k).
/// product: the G-integral over each panel is done against the Lagrange basis of
/// the panel nodes with the diagonal kink split out. Entries away from the
/// diagonal panel agree with plain to quadrature accuracy.
enum class AssemblyMode { product, plain };

struct AssemblyOptions {
  AssemblyMode mode = AssemblyMode::product;
  int split_points = 32;       ///< Gauss points per sub-piece in product mode
  double phase_per_piece = 12; ///< max |k| * length of a sub-piece
};

/// Nystrom discretization of K(z) = u (H0 - z)^{-1} v. Besides the matrix it
/// carries tr K and tr K^2 of the continuous operator (from quadrature), which
/// the determinants use to remove the slowly converging part of the error.
class BSOperator {
 public:
  BSOperator(Eigen::MatrixXcd matrix, Energy z, KernelId kernel, QuadratureGrid grid,
             std::optional<Channel> channel, cplx exact_trace, cplx exact_trace_sq,
             double exact_hs_sq);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const Energy& energy() const { return z_; }
  const KernelId& kernel() const { return kernel_; }
  const QuadratureGrid& grid() const { return grid_; }
  const std::optional<Channel>& channel() const { return channel_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }

  cplx exact_trace() const { return exact_trace_; }
  cplx exact_trace_sq() const { return exact_trace_sq_; }
  cplx matrix_trace() const { return matrix_.trace(); }
  cplx matrix_trace_sq() const;
  /// Hilbert-Schmidt norm of the continuous operator.
  double hs_norm() const { return std::sqrt(exact_hs_sq_); }
  /// Frobenius norm of the matrix.
  double matrix_hs_norm() const { return matrix_.norm(); }

 private:
  Eigen::MatrixXcd matrix_;
  Energy z_;
  KernelId kernel_;
  QuadratureGrid grid_;
  std::optional<Channel> channel_;
  cplx exact_trace_;
  cplx exact_trace_sq_;
  double exact_hs_sq_;
};

/// Gauss-Legendre grid over the support panels of the (restricted) potential.
QuadratureGrid default_grid(const FactorPair& pair, int per_panel = 64,
                            QuadratureRule rule = QuadratureRule::gauss_legendre);

/// One-dimensional kernels (full line or interval).
BSOperator assemble(const KernelId& kernel, const FactorPair& pair, const QuadratureGrid& grid,
                    const Energy& z, const AssemblyOptions& options = {});

/// Partial-wave channels l = 0..l_max of a radial 3D potential on the reduced
/// radial space L^2((0, R_s), dr). kernel is 3D full space or a 3D ball.
std::vector<BSOperator> assemble_channels(const KernelId& kernel, const FactorPair& pair,
                                          const QuadratureGrid& grid, const Energy& z, int l_max,
                                          const AssemblyOptions& options = {});
/// Channels l_lo..l_hi only.
std::vector<BSOperator> assemble_channels(const KernelId& kernel, const FactorPair& pair,
                                          const QuadratureGrid& grid, const Energy& z, int l_lo,
                                          int l_hi, const AssemblyOptions& options);

/// log det(I + M) by pivoted LU (imaginary part is some branch of the arg).
cplx log_det_identity_plus(const Eigen::MatrixXcd& m);
/// Matrix-level determinants, no continuum corrections.
cplx matrix_det(const Eigen::MatrixXcd& m);
cplx matrix_det2(const Eigen::MatrixXcd& m);

/// det(I + K). One-dimensional operators only.
cplx fredholm_det(const BSOperator& op);
cplx log_fredholm_det(const BSOperator& op);
/// det_2(I + K) = det(I + K) exp(-tr K).
cplx det2(const BSOperator& op);
cplx log_det2(const BSOperator& op);

/// Product over an explicit channel family: prod_l det_2(I + K_l)^(2l+1).
struct ChannelProduct {
  cplx log_value;            ///< sum of (2l+1) log det_2, principal log per channel
  cplx value() const { return std::exp(log_value); }
  std::vector<cplx> channel_logs;  ///< principal log det_2 per channel (no multiplicity)
  int l_max = -1;
  cplx tail = 0.0;           ///< estimated contribution of channels above l_max
  double tail_error = 0.0;   ///< uncertainty of that estimate
};

ChannelProduct det2(std::span<const BSOperator> channels);

struct ChannelOptions {
  int l_min = 40;          ///< channels always computed
  int l_cap = 160;         ///< hard upper limit
  int fit_window = 16;     ///< channels used for the tail fit
  int fit_order = 4;       ///< powers nu^-2 .. nu^-(order+1), nu = l + 1/2
  double tolerance = 1e-6; ///< stop when the tail-corrected total moves less than this
  AssemblyOptions assembly{};
};

/// Adaptive channel product for a radial 3D potential, including a fitted
/// estimate of the channels above the truncation. Channel contributions decay
/// only like l^-2 for potentials with a sharp edge, so plain truncation would
/// need thousands of channels.
ChannelProduct det2_radial(const KernelId& kernel, const FactorPair& pair,
                           const QuadratureGrid& grid, const Energy& z,
                           const ChannelOptions& options = {});

/// Same with a fixed truncation l_max (tail still fitted). Use this when
/// several determinants must share one channel set.
ChannelProduct det2_radial_fixed(const KernelId& kernel, const FactorPair& pair,
                                 const QuadratureGrid& grid, const Energy& z, int l_max,
                                 const ChannelOptions& options = {});
/// Starting truncation used by det2_radial for wavenumber k on this grid.
int radial_channel_count(const QuadratureGrid& grid, cplx k, const ChannelOptions& options = {});

/// eta(z) and eta'(z) for the det_2 based formula.
struct EtaCorrection {
  int dimension = 3;
  double integral_V = 0.0;
  std::function<cplx(cplx)> value;
  std::function<cplx(cplx)> derivative;
};

/// n = 3: eta(z) = i z^{1/2} int V / (4 pi); n = 2: eta(z) = -(int V / 4 pi) log(-z).
EtaCorrection eta(int dimension, double integral_V);
/// n = 1: eta(z) = tr K(z) = int V(x) G(z, x, x) dx by quadrature.
EtaCorrection eta_1d(const FactorPair& pair, const KernelId& kernel);

/// Grid refinement: doubles per-panel nodes until |det| at every probe energy
/// moves by less than tolerance. Throws ConvergenceError with the last two
/// iterates otherwise.
struct GridConvergence {
  QuadratureGrid grid;
  double last_change = 0.0;
};
GridConvergence converge_grid(const KernelId& kernel, const FactorPair& pair,
                              const std::vector<Energy>& probes, int per_panel = 64,
                              double tolerance = 1e-8, int max_per_panel = 1024);

/// log of the relative perturbation determinant for the pair (H0 + V, H0 + V_+):
/// Schur complement of the joint Nystrom matrix over the V_+ block, plus the
/// continuum corrections of both operators. 1D only.
cplx log_relative_det(const KernelId& kernel, const PotentialSpec& total, int per_panel,
                      const Energy& z, const AssemblyOptions& options = {});

/// Hurwitz zeta sum_{n >= 0} (n + a)^-s for s > 1, a > 0.
double hurwitz_zeta(double s, double a);

}  // namespace ssflab
