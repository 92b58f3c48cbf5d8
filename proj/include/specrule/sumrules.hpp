#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specrule/measures.hpp"
#include "specrule/oprl.hpp"
#include "specrule/opuc.hpp"

namespace specrule {

struct SumRuleReport {
  std::string rule;
  double coefficient_side = 0.0;
  double measure_side = 0.0;
  double defect = 0.0;  // |difference|; 0 when both sides are +inf
  std::vector<std::pair<std::string, double>> terms;
  std::string note;
};

inline double report_defect(double lhs, double rhs) {
  if (std::isinf(lhs) && std::isinf(rhs) && lhs == rhs) return 0.0;
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Circle rule: -sum log(1-|a_j|^2) = -int log w d(theta)/2pi
// ---------------------------------------------------------------------------

inline double szego_coefficient_side(const VerblunskySeq& seq) {
  // a terminated sequence diverges by construction; deciding this from the
  // kind avoids a huge finite value when the final coefficient is unimodular
  // only up to rounding (as sampled ones are)
  if (seq.kind == VerblunskySeq::Kind::Terminated) return kInf;
  double s = 0.0;
  for (const auto& a : seq.coeffs) {
    const double r2 = 1.0 - std::norm(a);
    if (r2 <= 0) return kInf;
    s -= std::log(r2);
  }
  return s;
}

/// Entropy of normalized Lebesgue relative to mu; the density-1 reference
/// makes this exactly -int log w d(theta)/2pi.
inline double szego_measure_side(const SpectralMeasure& mu) {
  if (mu.domain != Domain::Circle)
    throw std::invalid_argument("szego_measure_side: circle measures only");
  return entropy_ac(lebesgue_circle_reference(), mu);
}

inline SumRuleReport szego_report(const VerblunskySeq& seq,
                                  const SpectralMeasure& mu) {
  SumRuleReport rep;
  rep.rule = "szego";
  rep.coefficient_side = szego_coefficient_side(seq);
  rep.measure_side = szego_measure_side(mu);
  rep.defect = report_defect(rep.coefficient_side, rep.measure_side);
  double l2 = 0.0;
  for (const auto& a : seq.coeffs) l2 += std::norm(a);
  rep.terms.emplace_back("coeff_l2", l2);
  rep.terms.emplace_back("coeff_count", static_cast<double>(seq.size()));
  if (std::isinf(rep.coefficient_side))
    rep.note = "terminated sequence: both sides diverge";
  return rep;
}

inline SumRuleReport szego_report(const VerblunskySeq& seq) {
  return szego_report(seq, verblunsky_to_measure(seq));
}

// ---------------------------------------------------------------------------
// Line rule pieces
// ---------------------------------------------------------------------------

/// Coupling cost a^2 - 1 - log(a^2): nonnegative, zero only at a = 1.
inline double ks_G(double a) {
  if (!(a > 0)) throw std::domain_error("ks_G: coupling must be positive");
  const double a2 = a * a;
  return a2 - 1.0 - std::log(a2);
}

/// Eigenvalue cost for |E| >= 2, zero on the band:
/// (|E|/4) sqrt(E^2-4) - log((|E| + sqrt(E^2-4))/2).
inline double ks_F(double e) {
  const double ae = std::abs(e);
  if (ae <= 2.0) return 0.0;
  const double s = std::sqrt(e * e - 4.0);
  return ae * s / 4.0 - std::log((ae + s) / 2.0);
}

/// Entropy-type integral (1/pi) int_0^pi sin^2(t) log(sin t / (pi w(2cos t))) dt.
/// Clean substitution form: smooth integrand whenever w vanishes like the
/// band-edge square root.
inline double ks_Q(const std::function<double(double)>& w) {
  auto integrand = [&](double th) {
    const double s = std::sin(th);
    const double wv = std::max(w(2.0 * std::cos(th)), 5e-324);
    return s * s * std::log(s / (kPi * wv));
  };
  AdaptiveOptions opt;
  opt.tol = 1e-11;
  opt.divergence_threshold = 1e6;
  opt.side = [&](double th) {
    const double s = std::sin(th);
    return (s > 0 && w(2.0 * std::cos(th)) < 1e-100) ? s * s : 0.0;
  };
  const AdaptiveResult r = integrate_adaptive(integrand, 0.0, kPi, opt);
  if (r.divergent || r.side_value > 1e-10) return kInf;
  if (!r.converged)
    throw std::runtime_error("ks_Q: quadrature did not converge");
  return r.value / kPi;
}

/// Returns false when the density vanishes on an interior window wider than
/// 1e-3 (the rule's entropy side is +inf there).
inline bool ks_support_covers_band(const SpectralMeasure& mu) {
  const int n = 4096;
  const double lo = -2.0 + 1e-6, hi = 2.0 - 1e-6;
  const double step = (hi - lo) / (n - 1);
  int run = 0, worst = 0;
  for (int i = 0; i < n; ++i) {
    if (mu.density(lo + i * step) <= 0) {
      ++run;
      worst = std::max(worst, run);
    } else {
      run = 0;
    }
  }
  return worst * step <= 1e-3;
}

inline double ks_Q(const SpectralMeasure& mu) {
  if (mu.domain != Domain::Line)
    throw std::invalid_argument("ks_Q: line measures only");
  if (!mu.has_ac() || !ks_support_covers_band(mu)) return kInf;
  return ks_Q([&](double x) { return mu.density(x); });
}

inline double ks_eigenvalue_term(const SpectralMeasure& mu) {
  double s = 0.0;
  for (const auto& a : mu.atoms)
    if (std::abs(a.pos) > 2.0 && a.weight > 0) s += ks_F(a.pos);
  return s;
}

inline double ks_measure_side(const SpectralMeasure& mu) {
  const double q = ks_Q(mu);
  if (std::isinf(q)) return kInf;
  return q + ks_eigenvalue_term(mu);
}

inline double ks_coefficient_side(const JacobiParams& prefix) {
  prefix.validate();
  double s = 0.0;
  for (double b : prefix.b) s += b * b / 4.0;
  for (double a : prefix.a) s += ks_G(a) / 2.0;
  return s;
}

inline SumRuleReport ks_report(const FiniteRankPerturbation& pert,
                               const SpectralMeasure& mu) {
  SumRuleReport rep;
  rep.rule = "ks";
  rep.coefficient_side = ks_coefficient_side(pert.prefix);
  const double q = ks_Q(mu);
  const double f = ks_eigenvalue_term(mu);
  rep.measure_side = std::isinf(q) ? kInf : q + f;
  rep.defect = report_defect(rep.coefficient_side, rep.measure_side);
  rep.terms.emplace_back("entropy_term", q);
  rep.terms.emplace_back("eigenvalue_term", f);
  rep.terms.emplace_back("bound_states", static_cast<double>(mu.atoms.size()));
  return rep;
}

inline SumRuleReport ks_report(const FiniteRankPerturbation& pert) {
  return ks_report(pert, perturbed_spectral_data(pert));
}

// ---------------------------------------------------------------------------
// Gem summaries: finiteness of the coefficient cost vs measure-side terms
// ---------------------------------------------------------------------------

struct GemCircle {
  double coeff_l2 = 0.0;        // sum |a_j|^2
  double neg_log_integral = 0.0;  // -int log w
};

inline GemCircle gem_circle(const VerblunskySeq& seq, const SpectralMeasure& mu) {
  GemCircle g;
  for (const auto& a : seq.coeffs) g.coeff_l2 += std::norm(a);
  g.neg_log_integral = szego_measure_side(mu);
  return g;
}

struct GemLine {
  double coeff_quad = 0.0;        // sum (a-1)^2 + b^2
  double entropy_term = 0.0;      // Q
  double eigenvalue_power = 0.0;  // sum (|E|-2)^{3/2}
  bool band_covered = true;
};

inline GemLine gem_line(const FiniteRankPerturbation& pert,
                        const SpectralMeasure& mu) {
  GemLine g;
  for (double b : pert.prefix.b) g.coeff_quad += b * b;
  for (double a : pert.prefix.a) g.coeff_quad += (a - 1.0) * (a - 1.0);
  g.band_covered = mu.has_ac() && ks_support_covers_band(mu);
  g.entropy_term = ks_Q(mu);
  for (const auto& at : mu.atoms)
    if (std::abs(at.pos) > 2.0)
      g.eigenvalue_power += std::pow(std::abs(at.pos) - 2.0, 1.5);
  return g;
}

}  // namespace specrule
