#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ssflab/birman_schwinger.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/spectra.hpp"

using namespace ssflab;
using oracle::pi;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

const PotentialSpec& well() {
  static const PotentialSpec v = PotentialSpec::square_well(1, 2.0, 1.0);
  return v;
}

PotentialSpec mixed_sampled() {
  return PotentialSpec::sampled(1, {-2.0, -1.0, 0.0, 0.5, 1.5, 3.0}, {0.0, -1.5, 0.7, 2.0, -0.4, 0.0});
}

BSOperator well_op(cplx z, int per_panel = 64) {
  const auto pair = factorize(well());
  return assemble(KernelId::full_space(1), pair, default_grid(pair, per_panel), Energy::off_axis(z));
}

}  // namespace

TEST_SUITE("birman_schwinger") {

TEST_CASE("factorize and sign_split") {
  const auto zero = factorize(PotentialSpec::zero(1));
  CHECK(zero.u(0.3) == 0.0);
  CHECK(zero.v(0.3) == 0.0);

  const auto w = factorize(well());
  CHECK(w.v(0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(w.u(0.5) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-15));
  CHECK(w.v(1.5) == 0.0);
  CHECK(w.u(-1.5) == 0.0);

  const auto s = mixed_sampled();
  const auto ps = factorize(s);
  for (double x : {-2.0, -1.0, 0.0, 0.5, 1.5, 3.0}) {
    CHECK(ps.u(x) * ps.v(x) == doctest::Approx(s(x)).epsilon(1e-15));
    CHECK(ps.v(x) >= 0.0);
  }

  const auto split = sign_split(s);
  for (double x = -2.5; x <= 3.5; x += 0.01) {
    const double p = split.positive(x), n = split.negative(x);
    CHECK(p >= 0.0);
    CHECK(n >= 0.0);
    CHECK(p * n == 0.0);
    CHECK(p - n == doctest::Approx(s(x)).epsilon(1e-14));
  }
  const auto ws = sign_split(well());
  CHECK(ws.positive.is_zero());
  CHECK(ws.negative(0.2) == 2.0);
  const auto pos = PotentialSpec::gaussian(1, 1.0, 1.0, 4.0);
  CHECK(sign_split(pos).negative.is_zero());
  CHECK(sign_split(pos).positive(0.7) == pos(0.7));
}

TEST_CASE("assembled matrices") {
  const auto zero = factorize(PotentialSpec::zero(1));
  const auto grid = QuadratureGrid::composite({-1.0, 1.0}, 16);
  const auto op0 = assemble(KernelId::full_space(1), zero, grid, Energy::off_axis(-1.0));
  CHECK(op0.matrix().norm() == 0.0);
  CHECK(fredholm_det(op0) == cplx{1.0, 0.0});

  // Real and complex-symmetric at z = -E; the plain mode matches the kernel entrywise.
  const auto pair = factorize(well());
  const auto g = default_grid(pair, 16);
  const auto op = assemble(KernelId::full_space(1), pair, g, Energy::off_axis(-3.0),
                           AssemblyOptions{AssemblyMode::plain});
  const auto& m = op.matrix();
  CHECK(m.imag().norm() == 0.0);
  CHECK((m - m.transpose()).norm() <= 1e-15 * m.norm());
  const auto& xs = g.nodes();
  const auto& ws = g.weights();
  double worst = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j)
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const cplx e = pair.u(xs[j]) * free_green(1, Energy::off_axis(-3.0), {xs[j], 0, 0}, {xs[k], 0, 0}) *
                     pair.v(xs[k]) * std::sqrt(ws[j] * ws[k]);
      worst = std::max(worst, std::abs(m(j, k) - e));
    }
  CHECK(worst <= 1e-15);

  // Hilbert-Schmidt norm at z = -25 within |V|_1 / (2 sqrt 25).
  const auto op25 = well_op(-25.0);
  CHECK(op25.hs_norm() <= 0.4);
  CHECK(op25.matrix_hs_norm() <= 0.4);
}

TEST_CASE("Fredholm determinant of the well against the transfer-matrix oracle") {
  CHECK(rel(fredholm_det(well_op(-1.0)), oracle::well_det_1d(-1.0)) < 1e-9);
  CHECK(std::abs(fredholm_det(well_op(-1.0)).real() - -0.056319349992127881) < 1e-10);
  for (cplx z : {cplx{0.0, 1.0}, cplx{-1.0, 1.0}, cplx{5.0, 0.01}, cplx{-7.0, 0.0}, cplx{20.0, 3.0}})
    CHECK(rel(fredholm_det(well_op(z)), oracle::well_det_1d(z)) < 1e-9);

  // Rank one: det(I + c e1 e1^T) = 1 + c.
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(5, 5);
  r(0, 0) = cplx{0.3, -0.2};
  CHECK(matrix_det(r) == cplx{1.3, -0.2});
  CHECK(matrix_det(Eigen::MatrixXcd::Zero(4, 4)) == cplx{1.0, 0.0});
  CHECK(matrix_det2(Eigen::MatrixXcd::Zero(4, 4)) == cplx{1.0, 0.0});
}

TEST_CASE("det2 identity and high-energy limit") {
  for (cplx z : {cplx{0.0, 1.0}, cplx{-1.0, 0.0}, cplx{3.0, 0.5}, cplx{-100.0, 0.0}}) {
    const auto& m = well_op(z, 32).matrix();
    CHECK(rel(matrix_det2(m) * std::exp(m.trace()), matrix_det(m)) <= 1e-12);
  }
  double previous = 1.0;
  for (double E : {1e2, 1e3, 1e4}) {
    const double d = std::abs(det2(well_op(-E)) - 1.0);
    CHECK(d < previous);
    previous = d;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("eta corrections") {
  const auto e3 = eta(3, -8.0);
  CHECK(std::abs(e3.derivative(-4.0) - -1.0 / (2.0 * pi)) < 1e-15);
  const auto e2 = eta(2, 0.0);
  for (cplx z : {cplx{-1.0, 0.0}, cplx{2.0, 1.0}}) CHECK(std::abs(e2.derivative(z)) == 0.0);

  const auto e1 = eta_1d(factorize(well()), KernelId::full_space(1));
  const double h = 1e-4;
  const cplx fd = (e1.value(-4.0 + h) - e1.value(-4.0 - h)) / (2.0 * h);
  CHECK(std::abs(e1.derivative(-4.0) - fd) <= 1e-6);
  // tr K(-4) = int V / (2 * 2).
  CHECK(std::abs(e1.value(-4.0) - -1.0) < 1e-12);
}

TEST_CASE("Nystrom convergence for the shipped potential families") {
  const std::vector<Energy> probes{Energy::off_axis(cplx{0.0, 1.0}), Energy::off_axis(cplx{0.0, -1.0}),
                                   Energy::off_axis(-1.0)};
  for (const auto& v : {well(), PotentialSpec::gaussian(1, -3.0, 0.7, 4.0), mixed_sampled()}) {
    const auto r = converge_grid(KernelId::full_space(1), factorize(v), probes);
    CHECK(r.last_change < 1e-8);
  }
  const auto box = converge_grid(KernelId::interval(-3.0, 3.0), factorize(well()), probes);
  CHECK(box.last_change < 1e-8);
}

TEST_CASE("Hilbert-Schmidt decay exponent at high energy") {
  std::vector<double> lx, ly;
  for (double E : {10.0, 100.0, 1e3, 1e4}) {
    lx.push_back(std::log(E));
    ly.push_back(std::log(well_op(-E).hs_norm()));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 4.0;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / 4.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 4; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double alpha = -sxy / sxx;
  CHECK(alpha >= 0.45);
  // A bounded V gives |K(-E)|_HS^2 ~ int V^2 / (4 E^{3/2}) at large E.
  CHECK(alpha == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("radial channels") {
  const auto v = PotentialSpec::square_well(3, 5.0, 1.0);
  const auto pair = factorize(v);
  const auto grid = default_grid(pair, 64);

  // s-wave determinant is the Jost function.
  for (cplx z : {cplx{-1.0, 0.0}, cplx{2.0, 0.01}, cplx{0.0, 1.0}}) {
    const auto ch = assemble_channels(KernelId::full_space(3), pair, grid, Energy::off_axis(z), 0);
    REQUIRE(ch.size() == 1);
    CHECK(rel(std::exp(log_det2(ch[0]) + ch[0].exact_trace()), oracle::well_swave_3d(z)) < 1e-9);
  }
  CHECK(std::abs(oracle::well_swave_3d(-1.0).real() - 0.014164048945404833) < 1e-15);

  // Raising the truncation by two moves log det2 by less than the attached tail error.
  for (cplx z : {cplx{-1.0, 0.0}, cplx{0.0, 1.0}}) {
    const Energy e = Energy::off_axis(z);
    const auto a = det2_radial_fixed(KernelId::full_space(3), pair, grid, e, 40);
    const auto b = det2_radial_fixed(KernelId::full_space(3), pair, grid, e, 42);
    CHECK(std::abs(a.log_value - b.log_value) <= std::max(a.tail_error, 1e-8));
    const auto adaptive = det2_radial(KernelId::full_space(3), pair, grid, e);
    CHECK(std::abs(adaptive.log_value - b.log_value) < 1e-6);
  }

  CHECK_THROWS_AS(fredholm_det(assemble_channels(KernelId::full_space(3), pair, grid,
                                                 Energy::off_axis(-1.0), 0)[0]),
                  std::invalid_argument);
}

TEST_CASE("determinant does not vanish off the real axis") {
  const double a = -5.0, b = 5.0;
  const auto pair = factorize(well());
  const auto grid = default_grid(pair, 64);
  for (double e : interval_eigenvalues(well(), a, b, 30.0)) {
    for (double eps : {1e-1, 1e-3}) {
      const auto op = assemble(KernelId::interval(a, b), pair, grid, Energy::off_axis(cplx{e, eps}));
      CHECK(std::abs(fredholm_det(op)) > 0.0);
    }
    // Near the real eigenvalue the determinant is small compared with a nearby point.
    const auto at = assemble(KernelId::interval(a, b), pair, grid, Energy::off_axis(cplx{e, 1e-6}));
    const auto off = assemble(KernelId::interval(a, b), pair, grid, Energy::off_axis(cplx{e, 0.3}));
    CHECK(std::abs(fredholm_det(at)) < std::abs(fredholm_det(off)));
  }
}

TEST_CASE("invalid input") {
  const auto pair = factorize(well());
  CHECK_THROWS_AS(assemble(KernelId::interval(-0.5, 0.5), pair, default_grid(pair), Energy::off_axis(-1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(hurwitz_zeta(1.0, 1.0), std::invalid_argument);
  CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(pi * pi / 6.0).epsilon(1e-12));
}

}  // TEST_SUITE
