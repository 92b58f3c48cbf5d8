#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "specrule/ldp.hpp"
#include "specrule/measures.hpp"
#include "specrule/rng.hpp"
#include "specrule/sumrules.hpp"

using namespace specrule;

TEST_CASE("cumulant generating functions", "[ldp]") {
  REQUIRE(cgf_exponential(0.0) == 0.0);
  REQUIRE(std::abs(cgf_exponential(0.5) - std::log(2.0)) < 1e-15);
  REQUIRE(std::isinf(cgf_exponential(1.0)));
  REQUIRE(std::isinf(cgf_exponential(2.0)));
  REQUIRE(cgf_gaussian(3.0) == 4.5);
}

TEST_CASE("the transform reproduces closed-form rates", "[ldp]") {
  for (double x : {0.2, 0.7, 1.0, 1.9, 4.0})
    REQUIRE(std::abs(legendre_transform(cgf_exponential, x).value -
                     rate_phi(x)) < 1e-9);
  for (double x : {-2.0, -0.5, 0.0, 0.5, 3.0})
    REQUIRE(std::abs(legendre_transform(cgf_gaussian, x).value - x * x / 2.0) <
            1e-9);
  REQUIRE(std::abs(legendre_transform(cgf_exponential, 2.0).arg - 0.5) < 1e-6);
  REQUIRE(std::isinf(legendre_transform(cgf_exponential, -0.5).value));
}

TEST_CASE("transforms are midpoint convex", "[ldp]") {
  RngStream rng(71, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const double x = 0.1 + 4.0 * rng.uniform01();
    const double y = 0.1 + 4.0 * rng.uniform01();
    const double mid = legendre_transform(cgf_exponential, 0.5 * (x + y)).value;
    const double avg = 0.5 * (legendre_transform(cgf_exponential, x).value +
                              legendre_transform(cgf_exponential, y).value);
    REQUIRE(mid <= avg + 1e-9);
  }
}

TEST_CASE("scaled rates", "[ldp]") {
  REQUIRE(rate_phi(1.0) == 0.0);
  REQUIRE(std::abs(rate_phi(2.0) - (1.0 - std::log(2.0))) < 1e-15);
  REQUIRE(std::isinf(rate_phi(0.0)));
  REQUIRE(std::isinf(rate_phi(-1.0)));
  REQUIRE(rate_phi_alpha(0.7, 0.7) == 0.0);
  REQUIRE(std::abs(rate_phi_alpha(1.0, 2.0) - (2.0 * std::log(2.0) - 1.0)) <
          1e-15);
  REQUIRE_THROWS_AS(rate_phi_alpha(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("tail estimation rejects bad setups", "[ldp]") {
  REQUIRE_THROWS_AS(mc_tail_estimate(1.0, {10}, 2000, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(mc_tail_estimate(2.0, {10}, 10, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(mc_tail_estimate(2.0, {}, 2000, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(mc_tail_estimate(2.0, {0}, 2000, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(mc_tail_estimate(2.0, {10}, 2000, 1, 0, 1.5),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mc_tail_estimate(2.0, {10}, 2000, 1, 0, -0.5),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mc_tail_estimate(0.5, {10}, 2000, 1, 0, 0.3),
                    std::invalid_argument);
}

TEST_CASE("tail estimates are reproducible and thread-independent", "[ldp]") {
  setenv("SPECRULE_THREADS", "1", 1);
  const TailStudy a = mc_tail_estimate(2.0, {16, 32}, 4096 * 3, 99, 0);
  setenv("SPECRULE_THREADS", "3", 1);
  const TailStudy b = mc_tail_estimate(2.0, {16, 32}, 4096 * 3, 99, 0);
  unsetenv("SPECRULE_THREADS");
  for (size_t i = 0; i < a.points.size(); ++i) {
    REQUIRE(a.points[i].log_p == b.points[i].log_p);
    REQUIRE(a.points[i].ess == b.points[i].ess);
  }
  REQUIRE(a.extrapolated_rate == b.extrapolated_rate);
}

TEST_CASE("the lower tail is reachable with a negative tilt", "[ldp]") {
  const TailStudy st = mc_tail_estimate(0.3, {40, 80}, 20000, 72, 0);
  REQUIRE(st.lambda < 0.0);
  for (const auto& p : st.points) REQUIRE_FALSE(p.flagged);
  REQUIRE(std::abs(st.extrapolated_rate - rate_phi(0.3)) < 0.1);
}

TEST_CASE("the naive estimator dies on rare events", "[ldp]") {
  const TailStudy st = mc_tail_estimate(2.0, {200}, 20000, 73, 0, 0.0);
  REQUIRE(st.points[0].flagged);
  REQUIRE(std::isinf(st.points[0].a_n));
}

TEST_CASE("binned rates decompose exactly", "[ldp]") {
  REQUIRE_THROWS_AS(binned_rate({0.5, 0.5, 0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(binned_rate({0.5, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(binned_rate({}), std::invalid_argument);
  const BinnedRate r = binned_rate({0.25, 0.75});
  REQUIRE(std::abs(r.total - (r.mass_part + r.entropy_part)) < 1e-16);
  REQUIRE(std::abs(r.mass_part) < 1e-16);  // total mass already one
  REQUIRE(std::abs(r.entropy_part - 0.14384103622589045) < 1e-15);
}

TEST_CASE("pairwise energies of point configurations", "[ldp]") {
  std::vector<Atom> roots;
  for (int k = 0; k < 8; ++k)
    roots.push_back({kTwoPi * k / 8.0, 0.125});
  REQUIRE(std::abs(coulomb_energy(atomic_measure(Domain::Circle, roots)) -
                   (-std::log(8.0) / 8.0)) < 1e-13);
  const SpectralMeasure pair =
      atomic_measure(Domain::Line, {{0.0, 0.5}, {2.0, 0.5}});
  REQUIRE(std::abs(coulomb_energy(pair) + 0.5 * std::log(2.0)) < 1e-13);
  const SpectralMeasure touching =
      atomic_measure(Domain::Line, {{0.5, 0.5}, {0.5, 0.5}});
  REQUIRE(std::isinf(coulomb_energy(touching)));
  const SpectralMeasure cpair = atomic_measure(
      Domain::Circle, {{0.0, 0.5}, {3.141592653589793, 0.5}});
  REQUIRE(std::abs(coulomb_energy(cpair) + 0.5 * std::log(2.0)) < 1e-13);
}

TEST_CASE("energies of the two equilibrium densities", "[ldp]") {
  REQUIRE(std::abs(coulomb_energy(lebesgue_circle_measure())) < 1e-7);
  REQUIRE(std::abs(coulomb_energy(semicircle_measure()) - 0.25) < 1e-6);
}

TEST_CASE("only the semicircle equilibrates the quadratic field", "[ldp]") {
  REQUIRE(equilibrium_check(semicircle_measure()) <= 1e-3);
  auto tilted = [](double x) {
    return semicircle_density(x) * (1.0 + 0.1 * x);
  };
  std::vector<double> grid;
  for (int k = 1025; k >= 0; --k)
    grid.push_back(2.0 * std::cos(3.141592653589793 * k / 1025.0));
  REQUIRE(equilibrium_check(measure_from_density(Domain::Line, tilted, grid)) >
          1e-2);
  std::vector<double> coarse = {-2.0, 0.0, 2.0};
  REQUIRE_THROWS_AS(
      equilibrium_check(measure_from_density(
          Domain::Line, [](double) { return 1.0; }, coarse)),
      std::invalid_argument);
}

TEST_CASE("the external field matches the eigenvalue cost outside the band",
          "[ldp]") {
  REQUIRE_THROWS_AS(field_potential_F(1.5), std::domain_error);
  REQUIRE_THROWS_AS(field_potential_F(-2.0), std::domain_error);
  for (double e : {2.2, 3.0, -3.0, 5.5})
    REQUIRE(std::abs(field_potential_F(e) - ks_F(e)) < 1e-6);
  // equivalently: the effective potential exceeds its on-band constant by F
  const SpectralMeasure sc = semicircle_measure();
  REQUIRE(std::abs(effective_potential(sc, 3.0) - 0.5 - ks_F(3.0)) < 1e-6);
}
