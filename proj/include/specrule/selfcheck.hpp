#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrule/ensembles.hpp"
#include "specrule/io_json.hpp"
#include "specrule/ldp.hpp"
#include "specrule/measures.hpp"
#include "specrule/oprl.hpp"
#include "specrule/opuc.hpp"
#include "specrule/quadrature.hpp"
#include "specrule/rng.hpp"
#include "specrule/sumrules.hpp"

namespace specrule {

struct SelfCheck {
  std::string name;
  std::function<void(double)> run;  // tol_scale; throws on failure
};

struct CheckOutcome {
  std::string name;
  bool ok = true;
  std::string message;
};

namespace detail {

inline void expect(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

inline void expect_close(double actual, double expected, double tol,
                         const std::string& what) {
  if (!(std::abs(actual - expected) <= tol))
    throw std::runtime_error(what + ": got " + format_double(actual) +
                             ", want " + format_double(expected) +
                             " within " + format_double(tol));
}

inline VerblunskySeq random_interior(RngStream& rng, int n, double rmax) {
  VerblunskySeq seq;
  for (int j = 0; j < n; ++j)
    seq.coeffs.push_back(
        std::polar(rmax * rng.uniform01(), kTwoPi * rng.uniform01()));
  return seq;
}

inline VerblunskySeq random_terminated(RngStream& rng, int n, double rmax) {
  VerblunskySeq seq = random_interior(rng, n - 1, rmax);
  seq.kind = VerblunskySeq::Kind::Terminated;
  seq.coeffs.push_back(std::polar(1.0, kTwoPi * rng.uniform01()));
  return seq;
}

inline SpectralMeasure mixed_line_measure() {
  SpectralMeasure mu = semicircle_measure(1024);
  for (auto& v : mu.ac->values) v *= 0.75;
  mu.ac->analytic = [](double x) { return 0.75 * semicircle_density(x); };
  mu.atoms = {{-1.0, 0.125}, {1.0, 0.125}};
  return mu;
}

inline double seq_distance(const VerblunskySeq& a, const VerblunskySeq& b) {
  if (a.size() != b.size()) return kInf;
  double d = 0.0;
  for (int i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a.coeffs[i] - b.coeffs[i]));
  return d;
}

}  // namespace detail

inline const std::vector<SelfCheck>& selfchecks() {
  using detail::expect;
  using detail::expect_close;
  static const std::vector<SelfCheck> checks = {

      {"rng-stream-determinism",
       [](double) {
         RngStream a(42, 7), b(42, 7), c(42, 8);
         for (int i = 0; i < 64; ++i) {
           expect(a.next_u64() == b.next_u64(),
                  "equal seed/stream must reproduce");
         }
         bool differs = false;
         RngStream a2(42, 7);
         for (int i = 0; i < 64; ++i)
           if (a2.next_u64() != c.next_u64()) differs = true;
         expect(differs, "distinct streams must decorrelate");
       }},

      {"rng-uniform-moments",
       [](double s) {
         RngStream rng(1001, 0);
         double mean = 0.0;
         const int m = 20000;
         for (int i = 0; i < m; ++i) {
           const double u = rng.uniform01();
           expect(u >= 0.0 && u < 1.0, "uniform01 must stay in [0,1)");
           mean += u;
         }
         expect_close(mean / m, 0.5, 0.012 * s, "uniform mean");
       }},

      {"quadrature-exactness",
       [](double s) {
         // an 8-point rule integrates degree-15 polynomials exactly
         const double got = integrate_panels(
             [](double x) { return std::pow(x, 15.0); }, 0.0, 1.0, 1, 8);
         expect_close(got, 1.0 / 16.0, 1e-14 * s, "GL degree-15 moment");
         AdaptiveOptions opt;
         opt.tol = 1e-10;
         const AdaptiveResult r = integrate_adaptive(
             [](double x) { return -std::log(x); }, 0.0, 1.0, opt);
         expect(r.converged && !r.divergent, "adaptive log endpoint");
         expect_close(r.value, 1.0, 1e-8 * s, "adaptive log integral");
       }},

      {"measure-mass-normalization",
       [](double) {
         lebesgue_circle_measure().validate();
         semicircle_measure().validate();
         RngStream rng(2002, 0);
         bernstein_szego_measure(detail::random_interior(rng, 5, 0.8))
             .validate();
         detail::mixed_line_measure().validate();
       }},

      {"bin-refinement-nesting",
       [](double) {
         RngStream rng(2003, 0);
         const SpectralMeasure bs =
             bernstein_szego_measure(detail::random_interior(rng, 4, 0.7));
         const SpectralMeasure mixed = detail::mixed_line_measure();
         std::vector<Atom> pts;
         for (int i = 0; i < 9; ++i)
           pts.push_back({kTwoPi * rng.uniform01(), i == 8 ? 1.0 - 8 * 0.1 : 0.1});
         const SpectralMeasure atomsonly = atomic_measure(Domain::Circle, pts);
         auto nest = [&](const SpectralMeasure& mu, int j) {
           const BinnedMeasure fine = bin_project(mu, j + 1);
           const BinnedMeasure a = coarsen(fine);
           const BinnedMeasure b = bin_project(mu, j);
           double d = std::abs(a.overflow - b.overflow);
           for (size_t k = 0; k < b.masses.size(); ++k)
             d = std::max(d, std::abs(a.masses[k] - b.masses[k]));
           return d;
         };
         expect_close(nest(bs, 10), 0.0, 0.0, "circle a.c. nesting");
         expect_close(nest(mixed, 8), 0.0, 0.0, "line mixed nesting");
         expect_close(nest(atomsonly, 18), 0.0, 0.0, "atomic deep nesting");
       }},

      {"bin-mass-preservation",
       [](double s) {
         auto total = [](const BinnedMeasure& bm) {
           double t = bm.overflow;
           for (double m : bm.masses) t += m;
           return t;
         };
         RngStream rng(2004, 0);
         const SpectralMeasure bs =
             bernstein_szego_measure(detail::random_interior(rng, 3, 0.6));
         expect_close(total(bin_project(bs, 9)), 1.0, 1e-12 * s,
                      "circle binned mass");
         expect_close(total(bin_project(detail::mixed_line_measure(), 9)), 1.0,
                      1e-12 * s, "line binned mass");
         SpectralMeasure far =
             atomic_measure(Domain::Line, {{-7.0, 0.5}, {1.0, 0.5}});
         const BinnedMeasure bf = bin_project(far, 5);
         expect_close(bf.overflow, 0.5, 0.0, "window overflow mass");
         expect_close(total(bf), 1.0, 0.0, "overflow included in total");
       }},

      {"binned-entropy-monotone",
       [](double s) {
         RngStream rng(2005, 0);
         const SpectralMeasure mu =
             bernstein_szego_measure(detail::random_interior(rng, 4, 0.6));
         const SpectralMeasure nu = lebesgue_circle_measure();
         const auto h = monotone_binned_entropy(nu, mu, 10);
         for (size_t j = 1; j < h.size(); ++j)
           expect(h[j] >= h[j - 1] - 1e-15,
                  "binned entropy must be nondecreasing in resolution");
         const double full = entropy_ac(lebesgue_circle_reference(), mu);
         expect(h.back() <= full + 1e-9 * s,
                "binned entropy must stay below the continuum value");
       }},

      {"weak-distance-antipodal",
       [](double s) {
         const SpectralMeasure d0 =
             atomic_measure(Domain::Circle, {{0.0, 1.0}});
         const SpectralMeasure dpi =
             atomic_measure(Domain::Circle, {{kPi, 1.0}});
         expect_close(weak_distance(d0, dpi), 2.0, 1e-12 * s,
                      "antipodal atom distance");
         expect_close(weak_distance(d0, d0), 0.0, 1e-15 * s, "self distance");
       }},

      {"szego-polynomial-structure",
       [](double s) {
         RngStream rng(3001, 0);
         const VerblunskySeq seq = detail::random_interior(rng, 6, 0.85);
         const auto co = szego_coeffs(seq, 6);
         expect_close(std::abs(co.phi.back() - cplx(1, 0)), 0.0, 1e-14 * s,
                      "monic leading coefficient");
         const cplx z = std::polar(1.3, 1.1);
         const cplx phi = poly_eval(co.phi, z);
         // reversed polynomial: z^n conj(phi(1/conj(z)))
         const cplx rev =
             std::pow(z, 6) * std::conj(poly_eval(co.phi, 1.0 / std::conj(z)));
         expect_close(std::abs(poly_eval(co.phistar, z) - rev), 0.0, 1e-10 * s,
                      "reversal identity");
         const cplx w = std::polar(1.0, 0.37);
         expect_close(std::abs(poly_eval(co.phi, w)),
                      std::abs(poly_eval(co.phistar, w)), 1e-12 * s,
                      "equal moduli on the circle");
       }},

      {"orthonormal-integrals",
       [](double s) {
         RngStream rng(3002, 0);
         const VerblunskySeq seq = detail::random_interior(rng, 4, 0.7);
         const SpectralMeasure mu = bernstein_szego_measure(seq);
         for (int j = 0; j <= 3; ++j)
           for (int k = j; k <= 3; ++k) {
             const cplx g = integrate_panels(
                 [&](double t) -> cplx {
                   const double th = kTwoPi * t;
                   const auto ph = orthonormal_eval(seq, std::polar(1.0, th),
                                                    std::max(j, k));
                   return std::conj(ph[j]) * ph[k] * mu.density(th);
                 },
                 0.0, 1.0, 2048, 8);
             expect_close(std::abs(g - (j == k ? cplx(1, 0) : cplx(0, 0))), 0.0,
                          1e-7 * s, "orthonormality entry");
           }
       }},

      {"structured-unitarity",
       [](double s) {
         RngStream rng(3003, 0);
         const VerblunskySeq seq = detail::random_terminated(rng, 9, 0.9);
         expect(unitarity_defect(build_cmv_L(seq)) <= 1e-12 * s, "L unitary");
         expect(unitarity_defect(build_cmv_M(seq)) <= 1e-12 * s, "M unitary");
         expect(unitarity_defect(build_cmv(seq)) <= 1e-12 * s, "LM unitary");
         expect(unitarity_defect(build_alt_cmv(seq)) <= 1e-12 * s, "ML unitary");
         expect(unitarity_defect(build_ggt(seq)) <= 1e-12 * s,
                "ordered product unitary");
       }},

      {"structured-factorization",
       [](double s) {
         RngStream rng(3004, 0);
         for (int trial = 0; trial < 20; ++trial) {
           const int n = 2 + static_cast<int>(rng.uniform01() * 9);
           const VerblunskySeq seq = detail::random_terminated(rng, n, 0.95);
           expect(cmv_factorization_defect(seq) <= 1e-12 * s,
                  "LM head-block peeling");
           expect(ggt_factorization_defect(seq) <= 1e-12 * s,
                  "ordered-product peeling");
         }
       }},

      {"finite-spectrum-weights",
       [](double) {
         RngStream rng(3005, 0);
         const VerblunskySeq seq = detail::random_terminated(rng, 7, 0.8);
         const SpectralMeasure mu = verblunsky_to_measure(seq);
         mu.validate();
         expect(mu.atoms.size() == 7, "atom count equals sequence length");
         for (const auto& a : mu.atoms)
           expect(a.weight > 0, "weights must be positive");
       }},

      {"circle-roundtrip",
       [](double s) {
         RngStream rng(3006, 0);
         const VerblunskySeq in = detail::random_interior(rng, 5, 0.75);
         const VerblunskySeq back =
             measure_to_verblunsky(bernstein_szego_measure(in), 5);
         expect(back.kind == VerblunskySeq::Kind::Interior,
                "smooth measure gives interior coefficients");
         expect(detail::seq_distance(in, back) <= 1e-9 * s,
                "interior coefficients round trip");
         const VerblunskySeq tin = detail::random_terminated(rng, 6, 0.7);
         const VerblunskySeq tback =
             measure_to_verblunsky(verblunsky_to_measure(tin), 10);
         expect(tback.kind == VerblunskySeq::Kind::Terminated,
                "finite support must terminate the recursion");
         expect(detail::seq_distance(tin, tback) <= 1e-8 * s,
                "terminated coefficients round trip");
       }},

      {"reflection-extension",
       [](double s) {
         RngStream rng(3007, 0);
         CVector f(7);
         for (int i = 0; i < 7; ++i) f(i) = sample_complex_gaussian(rng);
         f /= f.norm();
         const CMatrix sig = haar_sigma(f);
         expect(unitarity_defect(sig) <= 1e-12 * s, "extension unitary");
         CVector e1 = CVector::Zero(7);
         e1(0) = cplx(1, 0);
         expect((sig * e1 - f).norm() <= 1e-12 * s, "extension maps e1 to f");
         // with a real first component the block is an involution
         CVector g = f;
         g(0) = cplx(std::abs(f(0)), 0);
         g /= g.norm();
         const CMatrix sg = haar_sigma(g);
         expect((sg * sg - CMatrix::Identity(7, 7)).cwiseAbs().maxCoeff() <=
                    1e-12 * s,
                "real-corner extension squares to identity");
         CVector le1 = CVector::Zero(3);
         le1(0) = std::polar(1.0, 0.9);
         expect((haar_sigma(le1) - le1(0) * CMatrix::Identity(3, 3))
                        .cwiseAbs()
                        .maxCoeff() <= 1e-14 * s,
                "parallel input gives a global phase");
       }},

      {"compose-decompose-roundtrip",
       [](double s) {
         RngStream rng(3008, 0);
         const CMatrix u = sample_haar_unitary(rng, 6);
         expect(unitarity_defect(u) <= 1e-12 * s, "sampled unitary");
         const auto [f, inner] = haar_decompose(u);
         const CMatrix back = haar_compose(f, inner);
         expect((back - u).cwiseAbs().maxCoeff() <= 1e-12 * s,
                "decompose/compose round trip");
       }},

      {"strip-shift-consistency",
       [](double s) {
         RngStream rng(3009, 0);
         const VerblunskySeq seq = detail::random_terminated(rng, 7, 0.8);
         const CMatrix u = build_cmv(seq);
         const auto [alpha, reduced] = strip_coefficient(u);
         expect_close(std::abs(alpha - seq.coeffs[0]), 0.0, 1e-10 * s,
                      "first stripped coefficient");
         CVector e1 = CVector::Zero(6);
         e1(0) = cplx(1, 0);
         const VerblunskySeq rest = verblunsky_from_unitary(reduced, e1);
         expect(detail::seq_distance(rest, shift(seq)) <= 1e-9 * s,
                "reduced matrix carries the shifted coefficients");
         CVector e1full = CVector::Zero(7);
         e1full(0) = cplx(1, 0);
         const VerblunskySeq whole = verblunsky_from_unitary(u, e1full);
         expect(detail::seq_distance(whole, seq) <= 1e-9 * s,
                "full extraction recovers the sequence");
       }},

      {"jacobi-roundtrip",
       [](double s) {
         RngStream rng(4001, 0);
         JacobiParams jp;
         for (int i = 0; i < 8; ++i) jp.b.push_back(1.6 * rng.uniform01() - 0.8);
         for (int i = 0; i < 7; ++i) jp.a.push_back(0.6 + 0.8 * rng.uniform01());
         const JacobiParams back = measure_to_jacobi(jacobi_to_measure(jp), 8);
         double d = 0.0;
         for (int i = 0; i < 8; ++i) d = std::max(d, std::abs(jp.b[i] - back.b[i]));
         for (int i = 0; i < 7; ++i) d = std::max(d, std::abs(jp.a[i] - back.a[i]));
         expect(d <= 1e-9 * s, "tridiagonal coefficients round trip");
       }},

      {"free-resolvent-branch",
       [](double s) {
         const cplx zs[] = {cplx(0.3, 0.7), cplx(-1.2, 0.4), cplx(2.5, 0.1),
                            cplx(0.0, 2.0)};
         for (const cplx z : zs) {
           const cplx m = free_m(z);
           expect(std::abs(m * m + z * m + cplx(1, 0)) <= 1e-12 * s,
                  "quadratic relation for the free transform");
           expect(m.imag() > 0, "Herglotz property in the upper half plane");
         }
         for (double x : {-1.5, -0.3, 0.9, 1.9})
           expect_close(free_m(cplx(x, 0.0)).imag() / kPi,
                        semicircle_density(x), 1e-12 * s,
                        "boundary density is the semicircle");
       }},

      {"perturbed-free-case",
       [](double s) {
         JacobiParams p;
         p.b = {0.0};
         const SpectralMeasure mu = perturbed_spectral_data(p);
         expect(mu.atoms.empty(), "free prefix has no bound states");
         for (double x : {-1.7, -0.4, 0.2, 1.5})
           expect_close(mu.density(x), semicircle_density(x), 1e-9 * s,
                        "free prefix density");
       }},

      {"bound-state-closed-form",
       [](double s) {
         JacobiParams p;
         p.b = {1.5};
         const SpectralMeasure mu = perturbed_spectral_data(p);
         expect(mu.atoms.size() == 1, "single bound state expected");
         expect_close(mu.atoms[0].pos, 13.0 / 6.0, 1e-9 * s,
                      "bound state location");
         expect_close(mu.atoms[0].weight, 5.0 / 9.0, 1e-7 * s,
                      "bound state weight");
       }},

      {"szego-identity",
       [](double s) {
         RngStream rng(5001, 0);
         for (int trial = 0; trial < 5; ++trial) {
           const int n = 2 + static_cast<int>(rng.uniform01() * 5);
           const VerblunskySeq seq = detail::random_interior(rng, n, 0.8);
           const SumRuleReport rep = szego_report(seq);
           expect(rep.defect <= 1e-7 * s,
                  "circle rule defect " + format_double(rep.defect));
         }
       }},

      {"ks-closed-forms",
       [](double s) {
         expect_close(ks_F(3.0), 0.7146273330056354, 1e-9 * s, "F(3)");
         expect_close(ks_F(-3.0), ks_F(3.0), 0.0, "F even");
         expect(ks_F(2.0) == 0.0 && ks_F(2.0 + 1e-12) <= 1e-9,
                "F vanishes continuously at the band edge");
         for (double a : {0.5, 0.8, 1.0, 1.3, 2.0})
           expect_close(ks_G(a), rate_phi(a * a), 1e-12 * s,
                        "coupling cost equals the exponential rate at a^2");
       }},

      {"ks-identity",
       [](double s) {
         JacobiParams p;
         p.b = {0.4};
         const SumRuleReport rep = ks_report(FiniteRankPerturbation{p});
         expect(rep.defect <= 1e-5 * s,
                "line rule defect " + format_double(rep.defect));
       }},

      {"entropy-dual-route",
       [](double s) {
         auto f = [](double x) {
           return semicircle_density(x) * (1.0 + 0.3 * std::sin(2.0 * x));
         };
         std::vector<double> grid;
         for (int k = 2049; k >= 0; --k)
           grid.push_back(2.0 * std::cos(kPi * k / 2049.0));
         const SpectralMeasure mu =
             measure_from_density(Domain::Line, f, grid);
         const double q = ks_Q(mu);
         const double h = entropy_ac(semicircle_reference(), mu);
         expect_close(q, 0.5 * h, 1e-6 * s, "angle route vs entropy route");
       }},

      {"kappa-moments",
       [](double s) {
         RngStream rng(6001, 0);
         double mean = 0.0;
         const int m = 20000;
         for (int i = 0; i < m; ++i) mean += std::norm(sample_kappa(rng, 3.0));
         expect_close(mean / m, 0.2, 5e-3 * s, "mean squared modulus at l=3");
         expect_close(std::abs(sample_kappa(rng, -1.0)), 1.0, 1e-15,
                      "boundary case is unimodular");
       }},

      {"cue-vs-recursion-law",
       [](double s) {
         const int draws = 2000, n = 4;
         std::vector<double> from_haar, direct;
         CVector e1 = CVector::Zero(n);
         e1(0) = cplx(1, 0);
         for (int i = 0; i < draws; ++i) {
           RngStream rng(6002, i);
           from_haar.push_back(std::norm(
               verblunsky_from_unitary(sample_haar_unitary(rng, n), e1)
                   .coeffs[0]));
           RngStream rng2(6003, i);
           direct.push_back(std::norm(sample_cue_verblunsky(rng2, n).coeffs[0]));
         }
         const double crit = ks_critical_one(draws) * s;
         expect(ks_statistic(from_haar,
                             [&](double x) { return beta1_cdf(x, n - 1); }) <=
                    crit,
                "spectral coefficients of uniform unitaries follow the stated law");
         expect(ks_statistic_two(from_haar, direct) <=
                    ks_critical_two(draws, draws) * s,
                "both sampling routes agree in distribution");
       }},

      {"gue-two-routes",
       [](double s) {
         const int draws = 4000;
         std::vector<double> tri, dense;
         for (int i = 0; i < draws; ++i) {
           RngStream r1(6004, i), r2(6005, i);
           const JacobiParams jp = sample_gue_jacobi(r1, 2);
           tri.push_back(jp.a[0] * jp.a[0]);
           dense.push_back(std::norm(sample_gue_dense(r2, 2)(0, 1)));
         }
         expect(ks_statistic(tri,
                             [](double x) {
                               return x <= 0 ? 0.0 : 1.0 - std::exp(-2.0 * x);
                             }) <= ks_critical_one(draws) * s,
                "coupling law at n=2");
         expect(ks_statistic_two(tri, dense) <= ks_critical_two(draws, draws) * s,
                "tridiagonal vs dense coupling distribution");
       }},

      {"gue-semicircle",
       [](double s) {
         std::vector<double> eigs;
         for (int i = 0; i < 10; ++i) {
           RngStream rng(6006, i);
           const auto e = gue_eigenvalues(rng, 100);
           eigs.insert(eigs.end(), e.begin(), e.end());
         }
         const double d =
             ks_statistic(eigs, [](double x) { return semicircle_cdf(x); });
         expect(d <= 0.05 * s,
                "pooled spectra track the semicircle, KS " + format_double(d));
       }},

      {"simplex-uniformity",
       [](double s) {
         const int draws = 4000, n = 5;
         std::vector<double> first;
         for (int i = 0; i < draws; ++i) {
           RngStream rng(6007, i);
           const auto w = sample_simplex_weights(rng, n);
           double sum = 0.0;
           for (double x : w) {
             expect(x >= 0, "weights nonnegative");
             sum += x;
           }
           expect_close(sum, 1.0, 1e-12, "weights sum to one");
           first.push_back(w[0]);
         }
         expect(ks_statistic(first,
                             [&](double x) { return beta1_cdf(x, n - 1); }) <=
                    ks_critical_one(draws) * s,
                "simplex marginal law");
       }},

      {"legendre-closed-forms",
       [](double s) {
         const LegendreResult r2 = legendre_transform(cgf_exponential, 2.0);
         expect_close(r2.value, 1.0 - std::log(2.0), 1e-9 * s,
                      "exponential transform at 2");
         expect_close(r2.arg, 0.5, 1e-6 * s, "maximizer at 1 - 1/x");
         expect_close(legendre_transform(cgf_exponential, 1.0).value, 0.0,
                      1e-9 * s, "vanishes at the mean");
         for (double x : {-2.0, -0.5, 0.0, 1.0, 3.0})
           expect_close(legendre_transform(cgf_gaussian, x).value, x * x / 2.0,
                        1e-9 * s, "Gaussian transform");
       }},

      {"rate-scaling",
       [](double s) {
         expect_close(rate_phi(1.0), 0.0, 0.0, "zero at the mean");
         expect_close(rate_phi_alpha(0.7, 0.7), 0.0, 1e-15, "scaled zero");
         expect_close(rate_phi_alpha(1.0, 2.0), 2.0 * std::log(2.0) - 1.0,
                      1e-12 * s, "scaled rate at 1");
         expect(std::isinf(rate_phi(-1.0)) && std::isinf(rate_phi(0.0)),
                "infinite off the support");
       }},

      {"binned-rate-identity",
       [](double s) {
         RngStream rng(7001, 0);
         for (int trial = 0; trial < 1000; ++trial) {
           const int j = static_cast<int>(rng.uniform01() * 7.0);
           std::vector<double> beta(static_cast<size_t>(1) << j);
           for (auto& b : beta) b = 0.05 + 3.0 * rng.uniform01();
           const BinnedRate r = binned_rate(beta);
           expect(std::abs(r.total - (r.mass_part + r.entropy_part)) <=
                      1e-12 * s,
                  "direct sum equals mass/shape decomposition");
         }
         const BinnedRate flat = binned_rate({0.25, 0.25, 0.25, 0.25});
         expect_close(flat.total, 0.0, 1e-15, "zero at the uniform point");
         const BinnedRate base = binned_rate({0.25, 0.75});
         expect_close(base.entropy_part, 0.5 * std::log(4.0 / 3.0), 1e-12 * s,
                      "two-bin shape entropy");
         const BinnedRate scaled = binned_rate({0.25 * 1.7, 0.75 * 1.7});
         expect_close(scaled.entropy_part, base.entropy_part, 1e-12 * s,
                      "scaling leaves the shape part alone");
         expect_close(scaled.mass_part - base.mass_part,
                      0.7 - std::log(1.7), 1e-12 * s,
                      "scaling shifts the mass part by c-1-log c");
       }},

      {"coulomb-known-values",
       [](double s) {
         std::vector<Atom> roots;
         const int n = 16;
         for (int k = 0; k < n; ++k)
           roots.push_back({kTwoPi * k / n, 1.0 / n});
         const SpectralMeasure mu = atomic_measure(Domain::Circle, roots);
         expect_close(coulomb_energy(mu), -std::log(double(n)) / n, 1e-12 * s,
                      "equally spaced circle points");
         const SpectralMeasure dup =
             atomic_measure(Domain::Line, {{0.5, 0.5}, {0.5, 0.5}});
         expect(std::isinf(coulomb_energy(dup)), "coincident atoms diverge");
         expect_close(coulomb_energy(lebesgue_circle_measure()), 0.0, 1e-7 * s,
                      "uniform circle energy");
         expect_close(coulomb_energy(semicircle_measure()), 0.25, 1e-6 * s,
                      "semicircle energy");
       }},

      {"equilibrium-field",
       [](double s) {
         expect(equilibrium_check(semicircle_measure()) <= 1e-3 * s,
                "semicircle potential constancy");
         auto f = [](double x) {
           return semicircle_density(x) * (1.0 + 0.1 * x);
         };
         std::vector<double> grid;
         for (int k = 1025; k >= 0; --k)
           grid.push_back(2.0 * std::cos(kPi * k / 1025.0));
         const SpectralMeasure tilted =
             measure_from_density(Domain::Line, f, grid);
         expect(equilibrium_check(tilted) > 1e-2 / s,
                "tilted density fails the constancy test");
       }},

      {"field-potential-identity",
       [](double s) {
         for (double e : {2.05, 2.5, 3.0, 4.5, 6.0})
           expect_close(field_potential_F(e), ks_F(e), 1e-6 * s,
                        "field potential matches the closed form");
       }},

      {"tail-estimate",
       [](double s) {
         const TailStudy st = mc_tail_estimate(2.0, {32, 64}, 4000, 8001, 0);
         for (const auto& p : st.points)
           expect(!p.flagged, "tilted estimate keeps its effective samples");
         expect_close(st.extrapolated_rate, rate_phi(2.0), 0.05 * s,
                      "extrapolated tail rate");
         // modest deviation: naive and tilted estimates must agree
         const TailStudy tilted = mc_tail_estimate(1.2, {50}, 20000, 8002, 0);
         const TailStudy naive =
             mc_tail_estimate(1.2, {50}, 20000, 8003, 0, 0.0);
         const double se = 3.0 * (tilted.points[0].rel_stderr +
                                  naive.points[0].rel_stderr);
         expect(std::abs(tilted.points[0].log_p - naive.points[0].log_p) <=
                    se * s,
                "tilted vs naive agreement at modest deviation");
       }},

      {"json-roundtrips",
       [](double) {
         RngStream rng(9001, 0);
         const VerblunskySeq seq = detail::random_terminated(rng, 5, 0.8);
         expect(detail::seq_distance(
                    seq, verblunsky_from_json(to_json(seq))) == 0.0,
                "coefficient file round trip");
         JacobiParams jp;
         jp.b = {0.25, -0.5};
         jp.a = {1.125};
         const JacobiParams jb = jacobi_from_json(to_json(jp));
         expect(jb.a == jp.a && jb.b == jp.b, "tridiagonal file round trip");
         const SpectralMeasure mu = detail::mixed_line_measure();
         const SpectralMeasure mb = measure_from_json(to_json(mu));
         expect(mb.atoms.size() == mu.atoms.size() &&
                    mb.ac->grid == mu.ac->grid && mb.ac->values == mu.ac->values,
                "measure file round trip");
         const CMatrix u = sample_haar_unitary(rng, 4);
         expect((matrix_from_json(to_json(u)) - u).cwiseAbs().maxCoeff() == 0.0,
                "matrix file round trip");
         expect(decode_real(encode_real(kInf), "t") == kInf &&
                    decode_real(encode_real(-kInf), "t") == -kInf,
                "non-finite encoding");
         bool threw = false;
         try {
           verblunsky_from_json(json{{"v", 1}, {"kind", "interior"}});
         } catch (const std::invalid_argument&) {
           threw = true;
         }
         expect(threw, "missing fields must be rejected");
       }},
  };
  return checks;
}

inline std::vector<CheckOutcome> run_selfchecks(double tol_scale) {
  std::vector<CheckOutcome> out;
  for (const auto& c : selfchecks()) {
    CheckOutcome o;
    o.name = c.name;
    try {
      c.run(tol_scale);
    } catch (const std::exception& e) {
      o.ok = false;
      o.message = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace specrule
