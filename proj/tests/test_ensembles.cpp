#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "specrule/ensembles.hpp"
#include "specrule/linalg.hpp"
#include "specrule/rng.hpp"

using namespace specrule;

TEST_CASE("disc draws respect the radial law", "[ensembles]") {
  RngStream rng(61, 0);
  const int m = 5000;
  std::vector<double> r2;
  double mean = 0.0;
  for (int i = 0; i < m; ++i) {
    const double v = std::norm(sample_kappa(rng, 0.0));
    REQUIRE(v < 1.0);
    r2.push_back(v);
    mean += v;
  }
  // at l = 0 the squared modulus is uniform on (0,1)
  REQUIRE(ks_statistic(r2, [](double x) { return x; }) < ks_critical_one(m));
  REQUIRE(std::abs(mean / m - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / m));
  REQUIRE(std::abs(std::abs(sample_kappa(rng, -1.0)) - 1.0) < 1e-15);
}

TEST_CASE("circular ensemble sequences terminate", "[ensembles]") {
  RngStream rng(62, 0);
  const VerblunskySeq seq = sample_cue_verblunsky(rng, 6);
  REQUIRE(seq.size() == 6);
  REQUIRE(seq.kind == VerblunskySeq::Kind::Terminated);
  seq.validate();
  REQUIRE_THROWS_AS(sample_cue_verblunsky(rng, 0), std::invalid_argument);
}

TEST_CASE("simplex draws are exact probability vectors", "[ensembles]") {
  const int m = 3000;
  std::vector<double> first;
  for (int i = 0; i < m; ++i) {
    RngStream rng(63, i);
    const auto w = sample_simplex_weights(rng, 4);
    double sum = 0.0;
    for (double x : w) sum += x;
    REQUIRE(std::abs(sum - 1.0) < 1e-12);
    first.push_back(w[0]);
  }
  REQUIRE(ks_statistic(first, [](double x) { return beta1_cdf(x, 3.0); }) <
          ks_critical_one(m));
}

TEST_CASE("uniform unitaries have flat first-column mass", "[ensembles]") {
  const int m = 3000, n = 4;
  std::vector<double> mass;
  for (int i = 0; i < m; ++i) {
    RngStream rng(64, i);
    const CMatrix u = sample_haar_unitary(rng, n);
    if (i < 50) REQUIRE(unitarity_defect(u) < 1e-12);
    mass.push_back(std::norm(u(0, 0)));
  }
  REQUIRE(ks_statistic(mass, [&](double x) { return beta1_cdf(x, n - 1.0); }) <
          ks_critical_one(m));
}

TEST_CASE("gamma draws follow the density", "[ensembles]") {
  RngStream rng(65, 0);
  const int m = 5000;
  std::vector<double> unit;
  double mean = 0.0;
  for (int i = 0; i < m; ++i) {
    unit.push_back(sample_gamma(rng, 1.0));
    mean += sample_gamma(rng, 2.5);
  }
  REQUIRE(ks_statistic(unit, [](double x) {
            return x <= 0 ? 0.0 : 1.0 - std::exp(-x);
          }) < ks_critical_one(m));
  REQUIRE(std::abs(mean / m - 2.5) < 4.0 * std::sqrt(2.5 / m));
  REQUIRE_THROWS_AS(sample_gamma(rng, 0.0), std::invalid_argument);
}

TEST_CASE("tridiagonal ensemble shapes and scales", "[ensembles]") {
  RngStream rng(66, 0);
  const int n = 50, m = 400;
  double bvar = 0.0;
  for (int i = 0; i < m; ++i) {
    const JacobiParams jp = sample_gue_jacobi(rng, n);
    REQUIRE(jp.b.size() == size_t(n));
    REQUIRE(jp.a.size() == size_t(n - 1));
    for (double a : jp.a) REQUIRE(a > 0.0);
    bvar += jp.b[0] * jp.b[0];
  }
  // diagonal entries have variance 1/n
  REQUIRE(std::abs(bvar / m - 1.0 / n) < 4.0 * std::sqrt(2.0 / m) / n);
}

TEST_CASE("dense ensemble matrices are Hermitian", "[ensembles]") {
  RngStream rng(67, 0);
  const CMatrix h = sample_gue_dense(rng, 8);
  REQUIRE((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 8; ++i) REQUIRE(h(i, i).imag() == 0.0);
}

TEST_CASE("spectra come back sorted", "[ensembles]") {
  RngStream rng(68, 0);
  const auto e = gue_eigenvalues(rng, 30);
  REQUIRE(e.size() == 30);
  for (size_t i = 1; i < e.size(); ++i) REQUIRE(e[i] >= e[i - 1]);
}

TEST_CASE("the limiting distribution function is a true CDF", "[ensembles]") {
  REQUIRE(semicircle_cdf(-2.0) == 0.0);
  REQUIRE(semicircle_cdf(-2.5) == 0.0);
  REQUIRE(semicircle_cdf(2.0) == 1.0);
  REQUIRE(semicircle_cdf(2.5) == 1.0);
  REQUIRE(std::abs(semicircle_cdf(0.0) - 0.5) < 1e-15);
  for (double x : {-1.3, -0.4, 0.9, 1.7}) {
    const double h = 1e-6;
    const double deriv =
        (semicircle_cdf(x + h) - semicircle_cdf(x - h)) / (2.0 * h);
    REQUIRE(std::abs(deriv - std::sqrt(4.0 - x * x) / (2.0 * 3.141592653589793)) <
            1e-6);
  }
}

TEST_CASE("distribution distances behave canonically", "[ensembles]") {
  std::vector<double> xs = {0.1, 0.2, 0.3, 0.4, 0.5};
  // empirical CDF of its own sample sits within 1/n of the uniform CDF
  REQUIRE(ks_statistic(xs, [](double x) { return x; }) <= 0.5 + 1e-15);
  std::vector<double> ys = xs;
  REQUIRE(ks_statistic_two(xs, ys) == 0.0);
  std::vector<double> zs = {1.1, 1.2, 1.3};
  REQUIRE(ks_statistic_two(xs, zs) == 1.0);
  REQUIRE(std::abs(ks_critical_one(100) - 0.1628) < 1e-12);
  REQUIRE(std::abs(ks_critical_two(100, 100) -
                   1.628 * std::sqrt(200.0 / 10000.0)) < 1e-12);
}
