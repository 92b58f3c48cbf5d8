#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrule/quadrature.hpp"

namespace specrule {

inline constexpr double kPi = 3.1415926535897932384626433832795;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Domain { Circle, Line };

struct Atom {
  double pos = 0.0;  // circle: angle in [0, 2pi); line: coordinate
  double weight = 0.0;
};

/// Absolutely continuous part, sampled on a sorted grid. Circle densities are
/// taken with respect to normalized Lebesgue d(theta)/2pi, line densities with
/// respect to dx. An optional in-process evaluator gives exact values when the
/// density has a closed form; files only ever carry the sampled grid.
struct AcPart {
  std::vector<double> grid;
  std::vector<double> values;
  std::function<double(double)> analytic;
};

namespace detail {

/// Local cubic (Hermite with three-point slopes) interpolation, clamped to be
/// nonnegative. Periodic indexing on the circle, zero extension on the line.
inline double interp_cubic(const std::vector<double>& xs,
                           const std::vector<double>& ys, double x,
                           bool periodic, double period) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(xs.size());
  if (n == 0) return 0.0;
  if (n == 1) return std::max(0.0, ys[0]);
  if (periodic) {
    x = std::fmod(x, period);
    if (x < 0) x += period;
  } else {
    if (x < xs.front() || x > xs.back()) return 0.0;
  }
  auto node = [&](std::ptrdiff_t i, double& xi, double& yi) {
    if (periodic) {
      std::ptrdiff_t w = ((i % n) + n) % n;
      xi = xs[w] + period * static_cast<double>((i - w) / n);
      yi = ys[w];
    } else {
      std::ptrdiff_t c = std::clamp<std::ptrdiff_t>(i, 0, n - 1);
      xi = xs[c];
      yi = ys[c];
    }
  };
  std::ptrdiff_t seg =
      std::upper_bound(xs.begin(), xs.end(), x) - xs.begin() - 1;
  if (periodic) {
    if (x < xs.front()) seg = -1;  // wrap segment [last - period, first]
    seg = std::clamp<std::ptrdiff_t>(seg, -1, n - 1);
  } else {
    seg = std::clamp<std::ptrdiff_t>(seg, 0, n - 2);
  }
  double x0, y0, x1, y1, xm, ym, xp, yp;
  node(seg, x0, y0);
  node(seg + 1, x1, y1);
  node(seg - 1, xm, ym);
  node(seg + 2, xp, yp);
  const double h = x1 - x0;
  if (h <= 0) return std::max(0.0, y0);
  auto slope = [](double xa, double ya, double xb, double yb, double xc,
                  double yc) {
    const double hl = xb - xa, hr = xc - xb;
    if (hl <= 0) return (yc - yb) / hr;
    if (hr <= 0) return (yb - ya) / hl;
    return ((yc - yb) / hr * hl + (yb - ya) / hl * hr) / (hl + hr);
  };
  const double m0 = slope(xm, ym, x0, y0, x1, y1);
  const double m1 = slope(x0, y0, x1, y1, xp, yp);
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double v = y0 * (2 * t3 - 3 * t2 + 1) + h * m0 * (t3 - 2 * t2 + t) +
                   y1 * (-2 * t3 + 3 * t2) + h * m1 * (t3 - t2);
  return std::max(0.0, v);
}

}  // namespace detail

struct SpectralMeasure {
  Domain domain = Domain::Circle;
  std::vector<Atom> atoms;
  std::optional<AcPart> ac;

  bool has_ac() const { return ac.has_value() && !ac->grid.empty(); }

  /// Density value at a point (0 where there is no a.c. part).
  double density(double x) const {
    if (!has_ac()) return 0.0;
    if (ac->analytic) return std::max(0.0, ac->analytic(x));
    return detail::interp_cubic(ac->grid, ac->values, x,
                                domain == Domain::Circle, kTwoPi);
  }

  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }

  /// Quadrature mass of the a.c. part.
  double ac_mass() const {
    if (!has_ac()) return 0.0;
    if (domain == Domain::Circle)
      return integrate_doubling([&](double t) { return density(kTwoPi * t); },
                                0.0, 1.0, 1e-11, 512);
    return integrate_doubling([&](double x) { return density(x); },
                              ac->grid.front(), ac->grid.back(), 1e-11, 512);
  }

  double total_mass() const { return atom_mass() + ac_mass(); }

  void validate(double mass_tol = 1e-8) const {
    for (const auto& a : atoms) {
      if (!(a.weight >= 0) || !std::isfinite(a.weight) || !std::isfinite(a.pos))
        throw std::invalid_argument("SpectralMeasure: bad atom");
      if (domain == Domain::Circle && (a.pos < 0 || a.pos >= kTwoPi))
        throw std::invalid_argument("SpectralMeasure: circle atom outside [0,2pi)");
    }
    if (has_ac()) {
      const auto& g = ac->grid;
      if (g.size() != ac->values.size() || g.size() < 2)
        throw std::invalid_argument("SpectralMeasure: malformed a.c. grid");
      for (size_t i = 0; i + 1 < g.size(); ++i)
        if (!(g[i] < g[i + 1]))
          throw std::invalid_argument("SpectralMeasure: a.c. grid not sorted");
      for (double v : ac->values)
        if (!(v >= 0) || !std::isfinite(v))
          throw std::invalid_argument("SpectralMeasure: negative a.c. value");
    }
    const double m = total_mass();
    if (std::abs(m - 1.0) > mass_tol)
      throw std::invalid_argument("SpectralMeasure: total mass " +
                                  std::to_string(m) + " not 1");
  }
};

/// Density of a reference probability measure used on the left slot of
/// relative entropies; support is [lo, hi] in native coordinates.
struct ReferenceDensity {
  Domain domain = Domain::Circle;
  double lo = 0.0;
  double hi = kTwoPi;
  std::function<double(double)> density;
};

inline double semicircle_density(double x) {
  const double s = 4.0 - x * x;
  return s > 0 ? std::sqrt(s) / kTwoPi : 0.0;
}

inline ReferenceDensity lebesgue_circle_reference() {
  return {Domain::Circle, 0.0, kTwoPi, [](double) { return 1.0; }};
}

inline ReferenceDensity semicircle_reference() {
  return {Domain::Line, -2.0, 2.0, [](double x) { return semicircle_density(x); }};
}

inline SpectralMeasure lebesgue_circle_measure(int gridpoints = 512) {
  SpectralMeasure mu;
  mu.domain = Domain::Circle;
  AcPart ac;
  for (int k = 0; k < gridpoints; ++k) {
    ac.grid.push_back(kTwoPi * k / gridpoints);
    ac.values.push_back(1.0);
  }
  ac.analytic = [](double) { return 1.0; };
  mu.ac = std::move(ac);
  return mu;
}

inline SpectralMeasure semicircle_measure(int gridpoints = 2048) {
  SpectralMeasure mu;
  mu.domain = Domain::Line;
  AcPart ac;
  // edge-clustered nodes resolve the square-root vanishing at +-2
  for (int k = gridpoints + 1; k >= 0; --k) {
    const double x = 2.0 * std::cos(3.141592653589793238463 * k / (gridpoints + 1));
    ac.grid.push_back(x);
    ac.values.push_back(semicircle_density(x));
  }
  ac.analytic = [](double x) { return semicircle_density(x); };
  mu.ac = std::move(ac);
  return mu;
}

inline SpectralMeasure atomic_measure(Domain d, std::vector<Atom> atoms) {
  SpectralMeasure mu;
  mu.domain = d;
  if (d == Domain::Circle)
    for (auto& a : atoms) {
      a.pos = std::fmod(a.pos, kTwoPi);
      if (a.pos < 0) a.pos += kTwoPi;
    }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& x, const Atom& y) { return x.pos < y.pos; });
  mu.atoms = std::move(atoms);
  return mu;
}

/// Sample a density callable onto a grid and normalize total mass to `mass`.
inline SpectralMeasure measure_from_density(Domain d,
                                            std::function<double(double)> f,
                                            std::vector<double> grid,
                                            double mass = 1.0,
                                            std::vector<Atom> atoms = {}) {
  SpectralMeasure mu;
  mu.domain = d;
  mu.atoms = std::move(atoms);
  AcPart ac;
  ac.grid = std::move(grid);
  double raw;
  if (d == Domain::Circle)
    raw = integrate_doubling([&](double t) { return f(kTwoPi * t); }, 0.0, 1.0,
                             1e-12, 1024);
  else
    raw = integrate_doubling(f, ac.grid.front(), ac.grid.back(), 1e-12, 1024);
  if (!(raw > 0))
    throw std::invalid_argument("measure_from_density: density has no mass");
  const double s = mass / raw;
  ac.values.reserve(ac.grid.size());
  for (double x : ac.grid) ac.values.push_back(std::max(0.0, f(x) * s));
  ac.analytic = [f, s](double x) { return std::max(0.0, f(x) * s); };
  mu.ac = std::move(ac);
  return mu;
}

// ---------------------------------------------------------------------------
// Dyadic binning
// ---------------------------------------------------------------------------

struct BinnedMeasure {
  Domain domain = Domain::Circle;
  int level = 0;
  std::vector<double> masses;  // 2^level, half-open left-closed bins
  double overflow = 0.0;       // line: mass outside the window
  double lo = 0.0, hi = kTwoPi;
};

namespace detail {

inline constexpr int kPanelLevel = 16;   // fixed a.c. quadrature base
inline constexpr int kAtomLevel = 20;    // fixed atom assignment base

/// Sparse pairwise halving preserves bitwise sums: a lone child passes
/// through unchanged, two children add left-then-right, exactly as the dense
/// coarsening does.
inline std::map<std::uint32_t, double> sparse_coarsen(
    std::map<std::uint32_t, double> m, int from_level, int to_level) {
  for (int L = from_level; L > to_level; --L) {
    std::map<std::uint32_t, double> up;
    for (const auto& [k, v] : m) {
      auto [it, fresh] = up.emplace(k >> 1, v);
      if (!fresh) it->second += v;
    }
    m = std::move(up);
  }
  return m;
}

}  // namespace detail

/// Project a measure onto 2^j dyadic bins of its window (circle: [0,2pi);
/// line: [-4,4] with an explicit overflow bin). Bins are left-closed. Masses
/// at level j coarsen bit-exactly from level j+1 for all j <= 16 (any j for
/// purely atomic measures); the a.c. part is integrated on a fixed dyadic
/// panel base so parents are literal sums of their children.
inline BinnedMeasure bin_project(const SpectralMeasure& mu, int j) {
  if (j < 0 || j > 20)
    throw std::invalid_argument("bin_project: level must be in [0,20]");
  const bool has_ac = mu.has_ac();
  if (has_ac && j > detail::kPanelLevel)
    throw std::invalid_argument(
        "bin_project: levels above 16 are limited to purely atomic measures");
  BinnedMeasure bm;
  bm.domain = mu.domain;
  bm.level = j;
  const bool circle = mu.domain == Domain::Circle;
  bm.lo = circle ? 0.0 : -4.0;
  bm.hi = circle ? kTwoPi : 4.0;
  const double width = bm.hi - bm.lo;

  // Atom contributions, assigned on the fixed fine base.
  std::map<std::uint32_t, double> atom_bins;
  std::vector<Atom> sorted = mu.atoms;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
  double overflow_atoms = 0.0;
  const double fine = static_cast<double>(1u << detail::kAtomLevel);
  for (const auto& a : sorted) {
    double pos = a.pos;
    if (circle) {
      pos = std::fmod(pos, kTwoPi);
      if (pos < 0) pos += kTwoPi;
    }
    const double u = (pos - bm.lo) / width;
    if (u < 0 || u >= 1) {
      if (circle) continue;  // cannot happen after normalization
      overflow_atoms += a.weight;
      continue;
    }
    const auto idx = static_cast<std::uint32_t>(
        std::min(std::floor(u * fine), fine - 1.0));
    auto [it, fresh] = atom_bins.emplace(idx, a.weight);
    if (!fresh) it->second += a.weight;
  }

  const int base = has_ac ? detail::kPanelLevel : j;
  atom_bins = detail::sparse_coarsen(std::move(atom_bins),
                                     detail::kAtomLevel, base);

  std::vector<double> masses(static_cast<size_t>(1) << base, 0.0);
  double overflow_ac = 0.0;
  if (has_ac) {
    const size_t panels = masses.size();
    const double h = width / static_cast<double>(panels);
    const GaussRule& rule = gauss_legendre(2);
    std::vector<double> raw(panels);
    double raw_sum = 0.0;
    for (size_t p = 0; p < panels; ++p) {
      const double c = bm.lo + (p + 0.5) * h;
      double acc = 0.0;
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = c + 0.5 * h * rule.nodes[i];
        const double w = mu.density(x);
        acc += rule.weights[i] * (circle ? w / kTwoPi : w);
      }
      raw[p] = acc * 0.5 * h;
      raw_sum += raw[p];
    }
    double outside_raw = 0.0;
    if (!circle) {
      const double glo = mu.ac->grid.front(), ghi = mu.ac->grid.back();
      if (glo < bm.lo)
        outside_raw += integrate_panels([&](double x) { return mu.density(x); },
                                        glo, bm.lo, 512);
      if (ghi > bm.hi)
        outside_raw += integrate_panels([&](double x) { return mu.density(x); },
                                        bm.hi, ghi, 512);
    }
    const double nominal = std::max(0.0, 1.0 - mu.atom_mass());
    const double total_raw = raw_sum + outside_raw;
    double s = 0.0;
    if (total_raw > 0) {
      if (std::abs(total_raw - nominal) > 1e-3 * std::max(nominal, 1e-3))
        throw std::runtime_error(
            "bin_project: a.c. quadrature mass inconsistent with measure "
            "normalization");
      s = nominal / total_raw;
    }
    for (size_t p = 0; p < panels; ++p) masses[p] = raw[p] * s;
    overflow_ac = outside_raw * s;
  }
  for (const auto& [k, v] : atom_bins) masses[k] += v;

  for (int L = base; L > j; --L) {
    std::vector<double> up(masses.size() / 2);
    for (size_t k = 0; k < up.size(); ++k)
      up[k] = masses[2 * k] + masses[2 * k + 1];
    masses = std::move(up);
  }
  bm.masses = std::move(masses);
  bm.overflow = circle ? 0.0 : overflow_atoms + overflow_ac;
  return bm;
}

/// Merge sibling bins: parent mass = left child + right child.
inline BinnedMeasure coarsen(const BinnedMeasure& bm) {
  if (bm.level < 1) throw std::invalid_argument("coarsen: already at level 0");
  BinnedMeasure out = bm;
  out.level = bm.level - 1;
  out.masses.assign(bm.masses.size() / 2, 0.0);
  for (size_t k = 0; k < out.masses.size(); ++k)
    out.masses[k] = bm.masses[2 * k] + bm.masses[2 * k + 1];
  return out;
}

/// Relative entropy sum(nu_k log(nu_k / mu_k)) with 0 log 0 = 0; +inf when nu
/// charges a bin mu does not. The overflow bin participates like any other.
inline double reversed_kl(const BinnedMeasure& nu, const BinnedMeasure& mu) {
  if (nu.domain != mu.domain || nu.level != mu.level ||
      nu.masses.size() != mu.masses.size())
    throw std::invalid_argument("reversed_kl: incompatible binnings");
  double h = 0.0;
  auto term = [&](double n, double m) {
    if (n <= 0) return 0.0;
    if (m <= 0) return kInf;
    return n * std::log(n / m);
  };
  for (size_t k = 0; k < nu.masses.size(); ++k) {
    h += term(nu.masses[k], mu.masses[k]);
    if (!std::isfinite(h)) return kInf;
  }
  h += term(nu.overflow, mu.overflow);
  return std::isfinite(h) ? h : kInf;
}

// ---------------------------------------------------------------------------
// Entropy against the a.c. part
// ---------------------------------------------------------------------------

/// H(nu | mu) = int log(nu' / w) dnu, reading only the a.c. part w of mu.
/// Returns +inf when nu charges a region where w vanishes (detected by the
/// accumulated-nu mass on {w < 1e-100} or by value divergence past 1e6).
inline double entropy_ac(const ReferenceDensity& nu, const SpectralMeasure& mu) {
  if (nu.domain != mu.domain)
    throw std::invalid_argument("entropy_ac: domain mismatch");
  if (!mu.has_ac()) return kInf;
  const bool circle = nu.domain == Domain::Circle;
  auto nu_at = [&](double x) { return std::max(0.0, nu.density(x)); };
  auto integrand = [&](double x) {
    const double nv = nu_at(x);
    if (nv < 1e-300) return 0.0;
    const double w = std::max(mu.density(x), 5e-324);
    return nv * (std::log(nv) - std::log(w));
  };
  AdaptiveOptions opt;
  opt.tol = 1e-10;
  opt.divergence_threshold = 1e6;
  opt.side = [&](double x) {
    return (mu.density(x) < 1e-100 && nu_at(x) > 0) ? nu_at(x) : 0.0;
  };
  AdaptiveResult r;
  if (circle) {
    r = integrate_adaptive([&](double t) { return integrand(kTwoPi * t); },
                           nu.lo / kTwoPi, nu.hi / kTwoPi, opt);
  } else {
    r = integrate_adaptive(integrand, nu.lo, nu.hi, opt);
  }
  if (r.divergent || r.side_value > 1e-10) return kInf;
  if (!r.converged)
    throw std::runtime_error(
        "entropy_ac: quadrature did not converge; last refinements " +
        std::to_string(r.last_two[0]) + ", " + std::to_string(r.last_two[1]));
  return r.value;
}

/// Entropies of dyadic projections, j = 0..jmax. Nondecreasing in j and
/// bounded by entropy_ac of the same pair.
inline std::vector<double> monotone_binned_entropy(const SpectralMeasure& nu,
                                                   const SpectralMeasure& mu,
                                                   int jmax) {
  if (jmax < 0 || jmax > 16)
    throw std::invalid_argument("monotone_binned_entropy: jmax must be in [0,16]");
  BinnedMeasure bn = bin_project(nu, jmax);
  BinnedMeasure bm = bin_project(mu, jmax);
  std::vector<double> out(jmax + 1);
  out[jmax] = reversed_kl(bn, bm);
  for (int j = jmax; j > 0; --j) {
    bn = coarsen(bn);
    bm = coarsen(bm);
    out[j - 1] = reversed_kl(bn, bm);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weak distance
// ---------------------------------------------------------------------------

/// Moments int z^k dmu, k = 0..kmax, for circle measures; panel count doubles
/// until the worst moment moves by less than 1e-12.
inline std::vector<std::complex<double>> circle_moments(
    const SpectralMeasure& mu, int kmax) {
  if (mu.domain != Domain::Circle)
    throw std::invalid_argument("circle_moments: circle measures only");
  using C = std::complex<double>;
  std::vector<C> mom(kmax + 1, C(0, 0));
  for (const auto& a : mu.atoms)
    for (int k = 0; k <= kmax; ++k)
      mom[k] += a.weight * std::polar(1.0, k * a.pos);
  if (mu.has_ac()) {
    auto pass = [&](int panels) {
      std::vector<C> acc(kmax + 1, C(0, 0));
      const GaussRule& rule = gauss_legendre(8);
      const double h = 1.0 / panels;
      for (int p = 0; p < panels; ++p) {
        const double c = (p + 0.5) * h;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
          const double t = c + 0.5 * h * rule.nodes[i];
          const double w = rule.weights[i] * 0.5 * h * mu.density(kTwoPi * t);
          const C z = std::polar(1.0, kTwoPi * t);
          C zk(1, 0);
          for (int k = 0; k <= kmax; ++k) {
            acc[k] += w * zk;
            zk *= z;
          }
        }
      }
      return acc;
    };
    std::vector<C> prev = pass(2048);
    for (int panels = 4096; panels <= (1 << 16); panels *= 2) {
      std::vector<C> next = pass(panels);
      double diff = 0.0;
      for (int k = 0; k <= kmax; ++k)
        diff = std::max(diff, std::abs(next[k] - prev[k]));
      prev = std::move(next);
      if (diff < 1e-12) break;
    }
    for (int k = 0; k <= kmax; ++k) mom[k] += prev[k];
  }
  return mom;
}

inline double chebyshev_t(int k, double u) {
  u = std::clamp(u, -1.0, 1.0);
  return std::cos(k * std::acos(u));
}

/// Distance generated by low-degree test functions with unit coefficient
/// budget: trigonometric monomials up to degree 16 on the circle, Chebyshev
/// polynomials scaled to the [-4,4] window on the line.
inline double weak_distance(const SpectralMeasure& mu1,
                            const SpectralMeasure& mu2) {
  if (mu1.domain != mu2.domain)
    throw std::invalid_argument("weak_distance: domain mismatch");
  const int kmax = 16;
  if (mu1.domain == Domain::Circle) {
    auto m1 = circle_moments(mu1, kmax);
    auto m2 = circle_moments(mu2, kmax);
    double d = 0.0;
    for (int k = 0; k <= kmax; ++k) d = std::max(d, std::abs(m1[k] - m2[k]));
    return d;
  }
  auto moments = [&](const SpectralMeasure& mu) {
    std::vector<double> mom(kmax + 1, 0.0);
    for (const auto& a : mu.atoms)
      for (int k = 0; k <= kmax; ++k)
        mom[k] += a.weight * chebyshev_t(k, a.pos / 4.0);
    if (mu.has_ac()) {
      for (int k = 0; k <= kmax; ++k)
        mom[k] += integrate_doubling(
            [&](double x) { return mu.density(x) * chebyshev_t(k, x / 4.0); },
            mu.ac->grid.front(), mu.ac->grid.back(), 1e-12, 1024);
    }
    return mom;
  };
  auto m1 = moments(mu1), m2 = moments(mu2);
  double d = 0.0;
  for (int k = 0; k <= kmax; ++k) d = std::max(d, std::abs(m1[k] - m2[k]));
  return d;
}

}  // namespace specrule
