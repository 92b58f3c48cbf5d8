#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "specrule/measures.hpp"
#include "specrule/opuc.hpp"

using namespace specrule;

namespace {

double binned_total(const BinnedMeasure& bm) {
  double t = bm.overflow;
  for (double m : bm.masses) t += m;
  return t;
}

SpectralMeasure sample_bs() {
  VerblunskySeq seq;
  seq.coeffs = {cplx(0.3, 0.1), cplx(-0.2, 0.25), cplx(0.0, -0.4)};
  return bernstein_szego_measure(seq);
}

}  // namespace

TEST_CASE("reference measures are normalized", "[measures]") {
  const SpectralMeasure leb = lebesgue_circle_measure();
  REQUIRE(std::abs(leb.density(1.234) - 1.0) < 1e-12);
  REQUIRE(std::abs(leb.ac_mass() - 1.0) < 1e-10);
  leb.validate();

  const SpectralMeasure sc = semicircle_measure();
  REQUIRE(std::abs(sc.density(0.0) - 1.0 / 3.141592653589793) < 1e-12);
  REQUIRE(sc.density(2.0) == 0.0);
  REQUIRE(std::abs(sc.ac_mass() - 1.0) < 1e-10);
  sc.validate();
}

TEST_CASE("atomic measures normalize circle angles and sort", "[measures]") {
  const SpectralMeasure mu = atomic_measure(
      Domain::Circle, {{-1.5707963267948966, 0.5}, {0.25, 0.5}});
  REQUIRE(mu.atoms.size() == 2);
  REQUIRE(mu.atoms[0].pos == 0.25);
  REQUIRE(std::abs(mu.atoms[1].pos - 4.71238898038469) < 1e-12);
  REQUIRE(mu.density(1.0) == 0.0);
  mu.validate();
}

TEST_CASE("validation rejects mass defects", "[measures]") {
  const SpectralMeasure bad =
      atomic_measure(Domain::Line, {{0.0, 0.4}, {1.0, 0.4}});
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.validate(0.25);  // loose tolerance accepts the same measure
}

TEST_CASE("atoms land in their dyadic bins", "[measures]") {
  const SpectralMeasure mu = atomic_measure(
      Domain::Circle, {{0.0, 0.25}, {6.283185307179586 * 0.999, 0.75}});
  const BinnedMeasure bm = bin_project(mu, 3);
  REQUIRE(bm.masses.size() == 8);
  REQUIRE(bm.masses[0] == 0.25);
  REQUIRE(bm.masses[7] == 0.75);
  REQUIRE(bm.overflow == 0.0);
}

TEST_CASE("the line window sends outside mass to overflow", "[measures]") {
  const SpectralMeasure mu = atomic_measure(
      Domain::Line, {{-4.0, 0.25}, {3.999, 0.25}, {4.0, 0.25}, {-9.0, 0.25}});
  const BinnedMeasure bm = bin_project(mu, 2);
  REQUIRE(bm.masses[0] == 0.25);   // left edge belongs to the first bin
  REQUIRE(bm.masses[3] == 0.25);
  REQUIRE(bm.overflow == 0.5);     // right edge and far atom fall outside
  REQUIRE(binned_total(bm) == 1.0);
}

TEST_CASE("coarsening merges adjacent bins exactly", "[measures]") {
  const SpectralMeasure mu = sample_bs();
  const BinnedMeasure fine = bin_project(mu, 9);
  const BinnedMeasure half = coarsen(fine);
  REQUIRE(half.level == 8);
  for (size_t k = 0; k < half.masses.size(); ++k)
    REQUIRE(half.masses[k] == fine.masses[2 * k] + fine.masses[2 * k + 1]);
  // and agrees bitwise with projecting at the coarse level directly
  const BinnedMeasure direct = bin_project(mu, 8);
  for (size_t k = 0; k < half.masses.size(); ++k)
    REQUIRE(half.masses[k] == direct.masses[k]);
}

TEST_CASE("binned mass is preserved across levels", "[measures]") {
  const SpectralMeasure mu = sample_bs();
  for (int j : {0, 3, 7, 12})
    REQUIRE(std::abs(binned_total(bin_project(mu, j)) - 1.0) < 1e-12);
}

TEST_CASE("relative entropy of binned vectors has the textbook values",
          "[measures]") {
  BinnedMeasure nu, mu;
  nu.domain = mu.domain = Domain::Circle;
  nu.level = mu.level = 1;
  nu.lo = mu.lo = 0.0;
  nu.hi = mu.hi = kTwoPi;
  nu.masses = {0.5, 0.5};
  mu.masses = {0.25, 0.75};
  REQUIRE(std::abs(reversed_kl(nu, mu) - 0.5 * std::log(4.0 / 3.0)) < 1e-15);
  REQUIRE(reversed_kl(mu, mu) == 0.0);
  BinnedMeasure zero = mu;
  zero.masses = {0.0, 1.0};
  REQUIRE(std::isinf(reversed_kl(nu, zero)));
}

TEST_CASE("continuum entropy matches the coefficient functional", "[measures]") {
  VerblunskySeq seq;
  seq.coeffs = {cplx(0.5, 0.0)};
  const SpectralMeasure mu = bernstein_szego_measure(seq);
  const double h = entropy_ac(lebesgue_circle_reference(), mu);
  REQUIRE(std::abs(h - (-std::log(0.75))) < 1e-9);
  // a purely atomic measure has no absolutely continuous part
  const SpectralMeasure pp = atomic_measure(Domain::Circle, {{1.0, 1.0}});
  REQUIRE(std::isinf(entropy_ac(lebesgue_circle_reference(), pp)));
}

TEST_CASE("binned entropies increase with resolution", "[measures]") {
  const auto h =
      monotone_binned_entropy(lebesgue_circle_measure(), sample_bs(), 11);
  REQUIRE(h.size() == 12);
  REQUIRE(std::abs(h[0]) < 1e-12);  // one bin sees only total mass
  for (size_t j = 1; j < h.size(); ++j) REQUIRE(h[j] >= h[j - 1] - 1e-15);
  const double limit =
      entropy_ac(lebesgue_circle_reference(), sample_bs());
  REQUIRE(h.back() <= limit + 1e-9);
  REQUIRE(limit - h.back() < 1e-3);
}

TEST_CASE("moment sequences distinguish the basic measures", "[measures]") {
  const auto leb = circle_moments(lebesgue_circle_measure(), 6);
  REQUIRE(std::abs(leb[0] - 1.0) < 1e-12);
  for (int k = 1; k <= 6; ++k) REQUIRE(std::abs(leb[k]) < 1e-10);
  const double th = 0.8;
  const auto pp = circle_moments(atomic_measure(Domain::Circle, {{th, 1.0}}), 4);
  for (int k = 0; k <= 4; ++k)
    REQUIRE(std::abs(pp[k] - std::polar(1.0, k * th)) < 1e-12);
}

TEST_CASE("weak distance separates and vanishes on equality", "[measures]") {
  const SpectralMeasure a = atomic_measure(Domain::Circle, {{0.0, 1.0}});
  const SpectralMeasure b =
      atomic_measure(Domain::Circle, {{3.141592653589793, 1.0}});
  REQUIRE(std::abs(weak_distance(a, b) - 2.0) < 1e-12);
  REQUIRE(weak_distance(a, a) == 0.0);
  REQUIRE(weak_distance(a, b) == weak_distance(b, a));

  const SpectralMeasure c = atomic_measure(Domain::Line, {{0.0, 1.0}});
  const SpectralMeasure d = atomic_measure(Domain::Line, {{0.05, 1.0}});
  const double w = weak_distance(c, d);
  REQUIRE(w > 0.0);
  REQUIRE(w < 0.2);
}

TEST_CASE("domain mismatch is rejected", "[measures]") {
  const SpectralMeasure a = atomic_measure(Domain::Circle, {{0.0, 1.0}});
  const SpectralMeasure b = atomic_measure(Domain::Line, {{0.0, 1.0}});
  REQUIRE_THROWS_AS(weak_distance(a, b), std::invalid_argument);
}

TEST_CASE("bin levels outside the supported range are rejected", "[measures]") {
  const SpectralMeasure mu = sample_bs();
  REQUIRE_THROWS_AS(bin_project(mu, -1), std::invalid_argument);
  REQUIRE_THROWS_AS(bin_project(mu, 17), std::invalid_argument);
  const SpectralMeasure pp = atomic_measure(Domain::Circle, {{1.0, 1.0}});
  REQUIRE(bin_project(pp, 19).masses.size() == size_t(1) << 19);
  REQUIRE_THROWS_AS(bin_project(pp, 21), std::invalid_argument);
}
