#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "specrule/measures.hpp"
#include "specrule/oprl.hpp"
#include "specrule/rng.hpp"

using namespace specrule;

TEST_CASE("tridiagonal parameter validation", "[oprl]") {
  JacobiParams good;
  good.b = {0.1, -0.2};
  good.a = {0.9};
  good.validate();
  JacobiParams bad_size;
  bad_size.b = {0.1};
  bad_size.a = {0.9};
  REQUIRE_THROWS_AS(bad_size.validate(), std::invalid_argument);
  JacobiParams bad_a;
  bad_a.b = {0.0, 0.0};
  bad_a.a = {0.0};
  REQUIRE_THROWS_AS(bad_a.validate(), std::invalid_argument);
}

TEST_CASE("free recursion produces the second-kind polynomials", "[oprl]") {
  JacobiParams jp;
  jp.b = {0.0, 0.0, 0.0, 0.0};
  jp.a = {1.0, 1.0, 1.0};
  const double th = 0.7;
  const auto p = p_eval(jp, 2.0 * std::cos(th), 3);
  for (int k = 0; k <= 3; ++k)
    REQUIRE(std::abs(p[k] - std::sin((k + 1) * th) / std::sin(th)) < 1e-12);
}

TEST_CASE("small spectral decompositions are explicit", "[oprl]") {
  JacobiParams one;
  one.b = {0.37};
  const SpectralMeasure m1 = jacobi_to_measure(one);
  REQUIRE(m1.atoms.size() == 1);
  REQUIRE(std::abs(m1.atoms[0].pos - 0.37) < 1e-14);
  REQUIRE(std::abs(m1.atoms[0].weight - 1.0) < 1e-14);

  JacobiParams two;
  two.b = {0.0, 0.0};
  two.a = {1.0};
  const SpectralMeasure m2 = jacobi_to_measure(two);
  REQUIRE(m2.atoms.size() == 2);
  REQUIRE(std::abs(m2.atoms[0].pos + 1.0) < 1e-14);
  REQUIRE(std::abs(m2.atoms[1].pos - 1.0) < 1e-14);
  REQUIRE(std::abs(m2.atoms[0].weight - 0.5) < 1e-14);
  REQUIRE(std::abs(m2.atoms[1].weight - 0.5) < 1e-14);
}

TEST_CASE("coefficients round trip through the spectral measure", "[oprl]") {
  RngStream rng(41, 0);
  JacobiParams jp;
  for (int i = 0; i < 6; ++i) jp.b.push_back(1.6 * rng.uniform01() - 0.8);
  for (int i = 0; i < 5; ++i) jp.a.push_back(0.6 + 0.8 * rng.uniform01());
  const JacobiParams back = measure_to_jacobi(jacobi_to_measure(jp), 6);
  for (int i = 0; i < 6; ++i) REQUIRE(std::abs(back.b[i] - jp.b[i]) < 1e-9);
  for (int i = 0; i < 5; ++i) REQUIRE(std::abs(back.a[i] - jp.a[i]) < 1e-9);
}

TEST_CASE("too few spectral points cannot support the recursion", "[oprl]") {
  const SpectralMeasure mu =
      atomic_measure(Domain::Line, {{-0.5, 0.5}, {0.5, 0.5}});
  REQUIRE_THROWS_AS(measure_to_jacobi(mu, 3), std::invalid_argument);
}

TEST_CASE("the free transform satisfies its quadratic equation", "[oprl]") {
  for (const cplx z : {cplx(0.4, 0.9), cplx(-2.7, 0.3), cplx(1.1, 2.2)}) {
    const cplx m = free_m(z);
    REQUIRE(std::abs(m * m + z * m + cplx(1, 0)) < 1e-13);
    REQUIRE(m.imag() > 0.0);
  }
  // outside the band the transform is real with the decaying branch
  REQUIRE(std::abs(free_m(cplx(3.0, 0.0)) -
                   cplx((-3.0 + std::sqrt(5.0)) / 2.0, 0.0)) < 1e-13);
  // on the band it reproduces the semicircle
  for (double x : {-1.5, 0.0, 0.8})
    REQUIRE(std::abs(free_m(cplx(x, 0.0)).imag() / 3.141592653589793 -
                     semicircle_density(x)) < 1e-12);
}

TEST_CASE("the perturbed transform stays Herglotz", "[oprl]") {
  FiniteRankPerturbation pert;
  pert.prefix.b = {0.7, -0.3};
  pert.prefix.a = {1.2};
  for (double x : {-3.0, -1.0, 0.5, 2.5})
    REQUIRE(perturbed_m(pert, cplx(x, 1e-3)).imag() > 0.0);
}

TEST_CASE("a single strong site binds one eigenvalue", "[oprl]") {
  JacobiParams p;
  p.b = {1.5};
  const SpectralMeasure mu = perturbed_spectral_data(p);
  REQUIRE(mu.atoms.size() == 1);
  REQUIRE(std::abs(mu.atoms[0].pos - 13.0 / 6.0) < 1e-9);
  REQUIRE(std::abs(mu.atoms[0].weight - 5.0 / 9.0) < 1e-7);
  REQUIRE(std::abs(mu.ac_mass() - 4.0 / 9.0) < 1e-7);
  mu.validate();
  // the mirrored site binds the mirrored eigenvalue
  JacobiParams q;
  q.b = {-1.5};
  const SpectralMeasure nu = perturbed_spectral_data(q);
  REQUIRE(nu.atoms.size() == 1);
  REQUIRE(std::abs(nu.atoms[0].pos + 13.0 / 6.0) < 1e-9);
}

TEST_CASE("weak sites bind nothing", "[oprl]") {
  JacobiParams p;
  p.b = {0.5};
  const SpectralMeasure mu = perturbed_spectral_data(p);
  REQUIRE(mu.atoms.empty());
  REQUIRE(std::abs(mu.ac_mass() - 1.0) < 1e-8);
  for (double x : {-1.2, 0.0, 1.2}) REQUIRE(mu.density(x) > 0.0);
}

TEST_CASE("the identity perturbation reproduces the semicircle", "[oprl]") {
  JacobiParams p;
  p.b = {0.0};
  const SpectralMeasure mu = perturbed_spectral_data(p);
  REQUIRE(mu.atoms.empty());
  for (double x : {-1.9, -0.7, 0.0, 1.3})
    REQUIRE(std::abs(mu.density(x) - semicircle_density(x)) < 1e-9);
}
