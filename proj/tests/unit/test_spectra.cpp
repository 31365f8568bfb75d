#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssflab/errors.hpp"
#include "ssflab/spectra.hpp"

using namespace ssflab;
using oracle::pi;

namespace {

const PotentialSpec& well() {
  static const PotentialSpec v = PotentialSpec::square_well(1, 2.0, 1.0);
  return v;
}

std::function<double(double)> as_function(const PotentialSpec& v) {
  return [v](double x) { return v(x); };
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("interval counts") {
  const auto zero = PotentialSpec::zero(1);
  CHECK(count_interval(zero, 0.0, pi, 10.5).count == 3);
  CHECK(count_interval(zero, 0.0, pi, -0.5).count == 0);
  CHECK(count_interval(zero, 0.0, pi, 0.0).count == 0);
  CHECK(free_interval_count(0.0, pi, 10.5) == 3);
  CHECK(free_interval_eigenvalues(0.0, pi, 10.5) == std::vector<double>{1.0, 4.0, 9.0});

  const auto fd = oracle::fd_eigenvalues(as_function(well()), -20.0, 20.0, 4000);
  REQUIRE(fd[0] < -0.05);
  CHECK(count_interval(well(), -20.0, 20.0, -0.05).count == 1);
  CHECK(oracle::count_below(fd, -0.05) == 1);
}

TEST_CASE("ambiguity at an eigenvalue") {
  const auto r = count_interval(PotentialSpec::zero(1), 0.0, pi, 4.0);
  CHECK(r.ambiguous);
  CHECK(r.count == 1);
  CHECK(r.alternative == 2);
  const auto clear = count_interval(PotentialSpec::zero(1), 0.0, pi, 4.01);
  CHECK_FALSE(clear.ambiguous);
  CHECK(clear.count == 2);
}

TEST_CASE("ground state energies") {
  CHECK(std::abs(ground_state_energy(PotentialSpec::zero(1), 0.0, pi) - 1.0) <= 1e-8);

  const double e0 = ground_state_energy(well(), -40.0, 40.0);
  CHECK(std::abs(e0 - oracle::kWellGround) <= 1e-8);
  // Finite differences on 8000 points reach the continuum value to about 1e-6.
  const auto fd = oracle::fd_eigenvalues(as_function(well()), -40.0, 40.0, 8000);
  CHECK(std::abs(e0 - fd[0]) <= 1e-4);

  const auto deep = PotentialSpec::square_well(1, 100.0, 1.0);
  const double estimate = -100.0 + pi * pi / 4.0;
  const double d0 = ground_state_energy(deep, -10.0, 10.0);
  CHECK(std::abs(d0 - estimate) <= 0.01 * std::abs(estimate));
  CHECK(d0 == doctest::Approx(-97.962095918946).epsilon(1e-9));

  CHECK_THROWS_AS(ground_state_energy(PotentialSpec::gaussian(1, 1.0, 1.0, 4.0), -5.0, 5.0, true),
                  NoBoundStateError);

  const auto bound = bound_states_1d(well());
  REQUIRE(bound.size() == 1);
  CHECK(bound[0] == doctest::Approx(oracle::kWellGround).epsilon(1e-7));
}

TEST_CASE("eigenvalues on the interval") {
  const auto ev = interval_eigenvalues(well(), -5.0, 5.0, 20.0);
  REQUIRE(!ev.empty());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    CHECK(count_interval(well(), -5.0, 5.0, ev[i] - 1e-7).count == static_cast<long>(i));
    CHECK(count_interval(well(), -5.0, 5.0, ev[i] + 1e-7).count == static_cast<long>(i + 1));
  }
}

TEST_CASE("ball counts") {
  const auto zero = PotentialSpec::zero(3);
  CHECK(count_ball_radial(zero, 1.0, 0.0).count == 0);
  CHECK(count_ball_radial(zero, 1.0, -3.0).count == 0);
  CHECK(count_ball_radial(zero, 1.0, 10.0).count == 1);
  CHECK(oracle::free_ball_count(1.0, 10.0) == 1);

  for (double R : {1.0, 2.5, 4.0})
    for (double lambda : {5.0, 21.0, 40.0, 77.0}) {
      const auto r = count_ball_radial(zero, R, lambda);
      CHECK(r.count == oracle::free_ball_count(R, lambda));
      long total = 0;
      for (const auto& c : r.per_channel) total += (2 * c.ell + 1) * c.count;
      CHECK(total == r.count);
    }

  // l = 1 channel: first zero of j_1 is 4.4934, so lambda = 25 on R = 1 gives one
  // p-state contributing three.
  const auto p = count_ball_radial(zero, 1.0, 25.0);
  long p_count = -1;
  for (const auto& c : p.per_channel)
    if (c.ell == 1) p_count = c.count;
  CHECK(p_count == 1);
  CHECK(p.count == 1 + 3);

  const auto v = PotentialSpec::square_well(3, 5.0, 1.0);
  const auto states = bound_states_radial(v);
  REQUIRE(states.size() == 1);
  CHECK(states[0].second == 1);
  CHECK(states[0].first == doctest::Approx(-0.93142611941767).epsilon(1e-7));
}

TEST_CASE("monotone in lambda and in the domain") {
  const auto v = PotentialSpec::gaussian(1, -4.0, 0.8, 4.0);
  long previous = 0;
  for (double lambda = -5.0; lambda <= 60.0; lambda += 0.37) {
    const long n = count_interval(v, -6.0, 6.0, lambda).count;
    CHECK(n >= previous);
    previous = n;
  }
  const auto zero = PotentialSpec::zero(1);
  for (double lambda : {0.5, 3.0, 17.0, 90.0}) {
    long prev = 0;
    for (double L : {1.0, 2.0, 3.5, 7.0}) {
      const long n = count_interval(zero, -L, L, lambda).count;
      CHECK(n >= prev);
      prev = n;
    }
  }
  // Adding a positive bump cannot raise the count.
  const auto raised = PotentialSpec::sampled(1, {-6.0, -1.0, 0.0, 1.0, 6.0}, {0.0, 0.0, 3.0, 0.0, 0.0});
  for (double lambda : {-1.0, 2.0, 15.0}) {
    const long base = count_interval(well(), -6.0, 6.0, lambda).count;
    const auto sum = PotentialSpec::sampled(1, {-6.0, -1.0, -1.0 + 1e-12, 0.0, 1.0 - 1e-12, 1.0, 6.0},
                                            {0.0, 0.0, -2.0, 1.0, -2.0, 0.0, 0.0});
    CHECK(count_interval(sum, -6.0, 6.0, lambda).count <= base);
    CHECK(count_interval(raised, -6.0, 6.0, lambda).count <= free_interval_count(-6.0, 6.0, lambda));
  }
}

TEST_CASE("agreement with finite differences away from eigenvalues") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 4000;
  for (int trial = 0; trial < 10; ++trial) {
    const double depth = 0.5 + 5.0 * u(rng), half = 0.3 + 1.5 * u(rng);
    const auto v = trial % 2 ? PotentialSpec::square_well(1, depth, half)
                             : PotentialSpec::gaussian(1, -depth, half, 4.0 * half);
    const double a = -4.0 - 4.0 * u(rng), b = 4.0 + 4.0 * u(rng);
    const auto fd = oracle::fd_eigenvalues(as_function(v), a, b, n);
    // Redraw lambda until it sits away from every finite-difference eigenvalue,
    // whose discretization error is far below the margin.
    double lambda = 0.0;
    for (;;) {
      lambda = -depth + (depth + 15.0) * u(rng);
      double gap = 1e300;
      for (Eigen::Index i = 0; i < fd.size(); ++i) gap = std::min(gap, std::abs(fd[i] - lambda));
      if (gap > 0.05) break;
    }
    CHECK(count_interval(v, a, b, lambda).count == oracle::count_below(fd, lambda));
  }
}

TEST_CASE("Pruefer count agrees with naive sign changes") {
  const auto v = PotentialSpec::gaussian(1, -3.0, 0.6, 3.0);
  const double a = -3.0, b = 3.0;
  const double top = std::pow(50.0 * pi / (b - a), 2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, top);
  for (int i = 0; i < 12; ++i) {
    const double lambda = u(rng);
    const auto r = count_interval(v, a, b, lambda);
    if (r.ambiguous) continue;
    CHECK(r.count == oracle::naive_sign_count(as_function(v), a, b, lambda, 200000));
  }
}

TEST_CASE("domain specs") {
  CHECK_THROWS_AS(DomainSpec::interval(1.0, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DomainSpec::ball(0.0).validate(), std::invalid_argument);
  CHECK(DomainSpec::interval(-2.0, 2.0).contains(DomainSpec::interval(-1.0, 1.0)));
  CHECK_FALSE(DomainSpec::interval(-1.0, 1.0).contains(DomainSpec::interval(-2.0, 2.0)));
  CHECK(count(well(), DomainSpec::interval(-20.0, 20.0), -0.05).count == 1);
}

}  // TEST_SUITE
