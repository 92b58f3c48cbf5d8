#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrule/measures.hpp"
#include "specrule/parallel.hpp"
#include "specrule/rng.hpp"
#include "specrule/sumrules.hpp"

namespace specrule {

// ---------------------------------------------------------------------------
// Cumulant generating functions and their transform
// ---------------------------------------------------------------------------

/// log E[e^{lambda X}] for a mean-one exponential variable: -log(1-lambda)
/// below 1, +inf beyond.
inline double cgf_exponential(double lambda) {
  if (lambda >= 1.0) return kInf;
  return -std::log(1.0 - lambda);
}

inline double cgf_gaussian(double lambda) { return lambda * lambda / 2.0; }

struct LegendreResult {
  double value = 0.0;
  double arg = 0.0;  // maximizing lambda
};

/// sup_lambda (lambda x - cgf(lambda)) by bracketed golden-section search on
/// the concave objective. Values past 1e12, or maxima escaping to |lambda|
/// beyond 1e10, report +inf.
inline LegendreResult legendre_transform(
    const std::function<double(double)>& cgf, double x) {
  auto g = [&](double lam) {
    const double c = cgf(lam);
    if (!std::isfinite(c)) return -kInf;
    return lam * x - c;
  };
  const double kValueCap = 1e12, kArgCap = 1e10;
  double lo = 0.0, hi = 0.0;
  {
    // expand in the uphill direction until the objective turns over
    const double g0 = g(0.0);
    double step = 1.0;
    const double gp = g(step), gm = g(-step);
    if (gp <= g0 && gm <= g0) {
      lo = -step;
      hi = step;
    } else {
      const double dir = (gp > gm) ? 1.0 : -1.0;
      double prev = 0.0, cur = dir * step, gcur = (dir > 0 ? gp : gm);
      for (;;) {
        if (gcur > kValueCap) return {kInf, cur};
        const double nxt = cur * 2.0;
        if (std::abs(nxt) > kArgCap) return {kInf, cur};
        const double gnxt = g(nxt);
        if (gnxt <= gcur) {
          lo = std::min(prev, nxt);
          hi = std::max(prev, nxt);
          break;
        }
        prev = cur;
        cur = nxt;
        gcur = gnxt;
      }
    }
  }
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
  double f1 = g(c1), f2 = g(c2);
  while (b - a > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + phi * (b - a);
      f2 = g(c2);
    } else {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - phi * (b - a);
      f1 = g(c1);
    }
  }
  const double arg = 0.5 * (a + b);
  const double val = g(arg);
  if (val > kValueCap) return {kInf, arg};
  return {std::max(0.0, val), arg};
}

/// Closed-form rate for means of exponentials: x - 1 - log x on x > 0.
inline double rate_phi(double x) {
  if (!(x > 0)) return kInf;
  return x - 1.0 - std::log(x);
}

/// Scaled version alpha * phi(x / alpha), the rate at mean alpha.
inline double rate_phi_alpha(double x, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("rate_phi_alpha: alpha must be > 0");
  return alpha * rate_phi(x / alpha);
}

// ---------------------------------------------------------------------------
// Tilted Monte-Carlo tail estimation
// ---------------------------------------------------------------------------

struct TailPoint {
  int n = 0;
  double a_n = 0.0;        // -(1/n) log p_hat
  double log_p = 0.0;
  double rel_stderr = 0.0;
  double ess = 0.0;        // effective sample size of the weights
  bool flagged = false;    // ess below 30
};

struct TailStudy {
  double t = 0.0;
  double lambda = 0.0;
  std::vector<TailPoint> points;
  double extrapolated_rate = 0.0;  // 1/n -> 0 intercept of a_n
};

/// Estimate P(S_n / n >= t) (or <= for t < 1) for sums of mean-one
/// exponentials, sampling from the exponentially tilted law and averaging
/// the bounded weights exp(-lambda (S - n t)) on the event. lambda = NaN
/// picks the optimal tilt 1 - 1/t; lambda = 0 is the naive estimator.
/// Work is split into 4096-sample chunks, each with its own derived stream,
/// so results do not depend on the thread count.
inline TailStudy mc_tail_estimate(double t, const std::vector<int>& ns,
                                  int samples, std::uint64_t seed,
                                  std::uint64_t stream = 0,
                                  double lambda = std::nan("")) {
  if (t == 1.0)
    throw std::invalid_argument("mc_tail_estimate: t must differ from the mean 1");
  if (samples < 1000)
    throw std::invalid_argument("mc_tail_estimate: need at least 1000 samples");
  if (ns.empty()) throw std::invalid_argument("mc_tail_estimate: no sizes given");
  for (int n : ns)
    if (n < 1) throw std::invalid_argument("mc_tail_estimate: sizes must be >= 1");
  if (std::isnan(lambda)) lambda = 1.0 - 1.0 / t;
  if (lambda >= 1.0)
    throw std::invalid_argument("mc_tail_estimate: tilt must satisfy lambda < 1");
  const bool upper = t > 1.0;
  if (lambda != 0.0 && ((upper && lambda < 0) || (!upper && lambda > 0)))
    throw std::invalid_argument(
        "mc_tail_estimate: tilt direction opposes the requested tail");

  TailStudy study;
  study.t = t;
  study.lambda = lambda;
  const double rate = 1.0 - lambda;           // tilted exponential rate
  const double shift = lambda * t - cgf_exponential(lambda);  // per-draw exponent

  constexpr int kChunk = 4096;
  for (size_t ni = 0; ni < ns.size(); ++ni) {
    const int n = ns[ni];
    const int chunks = (samples + kChunk - 1) / kChunk;
    std::vector<double> part_u(chunks, 0.0), part_u2(chunks, 0.0);
    parallel_for(chunks, [&](int c) {
      RngStream rng(seed, stream + (static_cast<std::uint64_t>(ni) << 32) +
                              static_cast<std::uint64_t>(c));
      const int from = c * kChunk;
      const int to = std::min(samples, from + kChunk);
      double su = 0.0, su2 = 0.0;
      for (int i = from; i < to; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += -std::log(rng.uniform_pos()) / rate;
        const bool hit = upper ? (s >= n * t) : (s <= n * t);
        if (!hit) continue;
        const double u = std::exp(-lambda * (s - n * t));
        su += u;
        su2 += u * u;
      }
      part_u[c] = su;
      part_u2[c] = su2;
    });
    double sum_u = 0.0, sum_u2 = 0.0;
    for (int c = 0; c < chunks; ++c) {
      sum_u += part_u[c];
      sum_u2 += part_u2[c];
    }
    TailPoint pt;
    pt.n = n;
    if (sum_u <= 0.0) {
      pt.log_p = -kInf;
      pt.a_n = kInf;
      pt.ess = 0.0;
      pt.rel_stderr = kInf;
      pt.flagged = true;
    } else {
      const double mean_u = sum_u / samples;
      pt.log_p = std::log(mean_u) - n * shift;
      pt.a_n = -pt.log_p / n;
      const double var_u = std::max(0.0, sum_u2 / samples - mean_u * mean_u);
      pt.rel_stderr = std::sqrt(var_u / samples) / mean_u;
      pt.ess = sum_u * sum_u / std::max(sum_u2, 5e-324);
      pt.flagged = pt.ess < 30.0;
    }
    study.points.push_back(pt);
  }

  // least-squares intercept of a_n against 1/n
  std::vector<double> xs, ys;
  for (const auto& pt : study.points)
    if (std::isfinite(pt.a_n)) {
      xs.push_back(1.0 / pt.n);
      ys.push_back(pt.a_n);
    }
  if (xs.empty()) {
    study.extrapolated_rate = kInf;
  } else if (xs.size() == 1) {
    study.extrapolated_rate = ys[0];
  } else {
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    study.extrapolated_rate = my - slope * mx;
  }
  return study;
}

// ---------------------------------------------------------------------------
// Logarithmic energy
// ---------------------------------------------------------------------------

namespace detail {

// antiderivatives of log|u| and u log|u|, continuous through u = 0
inline double log_anti1(double u) {
  return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u;
}
inline double log_anti2(double u) {
  return u == 0.0 ? 0.0 : 0.5 * u * u * std::log(std::abs(u)) - 0.25 * u * u;
}

/// int log|x-y| over one cell [y0,y1] against the linear density through
/// (y0,r0), (y1,r1): exact, valid when x lies inside the cell.
inline double cell_log_integral(double x, double y0, double y1, double r0,
                                double r1) {
  const double h = y1 - y0;
  const double d = (r1 - r0) / h;
  const double u0 = y0 - x, u1 = y1 - x;
  return (r0 - d * u0) * (log_anti1(u1) - log_anti1(u0)) +
         d * (log_anti2(u1) - log_anti2(u0));
}

// log(2 sin(|u|/2) / |u|): the smooth part of the circle's log-distance
inline double circle_kernel_smooth(double u) {
  const double au = std::abs(u);
  if (au < 1e-8) return -au * au / 24.0;
  return std::log(2.0 * std::sin(au / 2.0) / au);
}

}  // namespace detail

/// int log|x-y| rho(y) dy with rho read piecewise-linearly off the stored
/// grid; every cell is integrated in closed form, so the singularity at
/// y = x costs nothing.
inline double line_log_potential(const SpectralMeasure& mu, double x) {
  if (mu.domain != Domain::Line || !mu.has_ac())
    throw std::invalid_argument("line_log_potential: a.c. line measure required");
  const auto& g = mu.ac->grid;
  const auto& v = mu.ac->values;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < g.size(); ++i)
    acc += detail::cell_log_integral(x, g[i], g[i + 1], v[i], v[i + 1]);
  return acc;
}

/// Circle analogue against the wrapped distance 2 sin(|dtheta|/2); the log
/// part is handled in closed form per cell, the smooth remainder by local
/// quadrature. Density is taken against d(theta)/2pi.
inline double circle_log_potential(const SpectralMeasure& mu, double theta) {
  if (mu.domain != Domain::Circle || !mu.has_ac())
    throw std::invalid_argument("circle_log_potential: a.c. circle measure required");
  const auto& g = mu.ac->grid;
  const auto& v = mu.ac->values;
  const GaussRule& rule = gauss_legendre(4);
  double acc = 0.0;
  const size_t n = g.size();
  for (size_t i = 0; i < n; ++i) {
    double y0 = g[i];
    double y1 = (i + 1 < n) ? g[i + 1] : g[0] + kTwoPi;
    const double r0 = v[i];
    const double r1 = (i + 1 < n) ? v[i + 1] : v[0];
    // re-center the cell so its midpoint is within pi of theta
    const double mid = 0.5 * (y0 + y1);
    const double s = std::round((theta - mid) / kTwoPi) * kTwoPi;
    y0 += s;
    y1 += s;
    acc += detail::cell_log_integral(theta, y0, y1, r0, r1);
    const double h = y1 - y0, c = 0.5 * (y0 + y1), d = (r1 - r0) / h;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      const double y = c + 0.5 * h * rule.nodes[q];
      acc += rule.weights[q] * 0.5 * h * (r0 + d * (y - y0)) *
             detail::circle_kernel_smooth(theta - y);
    }
  }
  return acc / kTwoPi;
}

/// Pair energy -int int log|z-w| dmu dmu. Atomic measures use the exact
/// pairwise sum (+inf on coincidence); a.c. measures integrate the potential
/// of the gridded density. Mixed measures are not supported.
inline double coulomb_energy(const SpectralMeasure& mu) {
  const bool circle = mu.domain == Domain::Circle;
  if (!mu.atoms.empty() && mu.has_ac())
    throw std::invalid_argument(
        "coulomb_energy: purely atomic or purely a.c. measures only");
  if (!mu.atoms.empty()) {
    double acc = 0.0;
    for (size_t i = 0; i < mu.atoms.size(); ++i)
      for (size_t j = i + 1; j < mu.atoms.size(); ++j) {
        const double dpos = mu.atoms[i].pos - mu.atoms[j].pos;
        const double dist =
            circle ? 2.0 * std::abs(std::sin(dpos / 2.0)) : std::abs(dpos);
        if (dist == 0.0) return kInf;
        acc += mu.atoms[i].weight * mu.atoms[j].weight * std::log(dist);
      }
    return -2.0 * acc;
  }
  if (!mu.has_ac())
    throw std::invalid_argument("coulomb_energy: empty measure");
  // Outer integral cell by cell against the same piecewise-linear density:
  // the potential is smooth, so low-order panels on the (edge-clustered)
  // grid are exact to rounding and no global refinement loop is needed.
  const auto& g = mu.ac->grid;
  const auto& v = mu.ac->values;
  const GaussRule& rule = gauss_legendre(4);
  const size_t cells = circle ? g.size() : g.size() - 1;
  double acc = 0.0;
  for (size_t i = 0; i < cells; ++i) {
    const double y0 = g[i];
    const double y1 = (i + 1 < g.size()) ? g[i + 1] : g[0] + kTwoPi;
    const double r0 = v[i];
    const double r1 = (i + 1 < g.size()) ? v[i + 1] : v[0];
    const double h = y1 - y0, c = 0.5 * (y0 + y1), d = (r1 - r0) / h;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = c + 0.5 * h * rule.nodes[q];
      const double rho = r0 + d * (x - y0);
      const double pot = circle ? circle_log_potential(mu, x)
                                : line_log_potential(mu, x);
      acc += rule.weights[q] * 0.5 * h * rho * pot;
    }
  }
  if (circle) acc /= kTwoPi;  // outer density is against d(theta)/2pi
  return -acc;
}

// ---------------------------------------------------------------------------
// External field
// ---------------------------------------------------------------------------

/// E^2/4 - 1/2 - int log|E-y| d(semicircle)(y), evaluated by quadrature in
/// the angle variable. Defined off the band only.
inline double field_potential_F(double e) {
  if (std::abs(e) <= 2.0)
    throw std::domain_error("field_potential_F: |E| must exceed 2");
  const double integral = integrate_doubling(
      [&](double th) {
        return std::log(std::abs(e - 2.0 * std::cos(th))) * (2.0 / kPi) *
               std::sin(th) * std::sin(th);
      },
      0.0, kPi, 1e-11, 256);
  return e * e / 4.0 - 0.5 - integral;
}

/// Quadratic-field potential x^2/4 - int log|x-y| rho(y) dy of a gridded
/// density.
inline double effective_potential(const SpectralMeasure& mu, double x) {
  return x * x / 4.0 - line_log_potential(mu, x);
}

/// Constancy test of the effective potential on the interior of [-2,2]:
/// returns the max deviation from the mean over the grid nodes. Equilibrium
/// inputs stay within 1e-3.
inline double equilibrium_check(const SpectralMeasure& mu) {
  if (mu.domain != Domain::Line || !mu.has_ac())
    throw std::invalid_argument("equilibrium_check: a.c. line measure required");
  if (mu.ac->grid.size() < 512)
    throw std::invalid_argument("equilibrium_check: need grid resolution >= 512");
  std::vector<double> u;
  for (double x : mu.ac->grid)
    if (std::abs(x) < 2.0 - 1e-9) u.push_back(effective_potential(mu, x));
  if (u.empty())
    throw std::invalid_argument("equilibrium_check: no interior nodes");
  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= static_cast<double>(u.size());
  double dev = 0.0;
  for (double v : u) dev = std::max(dev, std::abs(v - mean));
  return dev;
}

// ---------------------------------------------------------------------------
// Binned empirical rate
// ---------------------------------------------------------------------------

struct BinnedRate {
  double total = 0.0;         // direct per-bin sum
  double mass_part = 0.0;     // beta - 1 - log beta
  double entropy_part = 0.0;  // uniform-reference entropy of the shape
};

/// Rate of an unnormalized dyadic bin vector. The direct form sums
/// (beta_l - 2^-j) - 2^-j log(2^j beta_l); the decomposition splits the same
/// quantity into a total-mass cost plus the entropy of the normalized shape.
/// The two agree identically; both are returned.
inline BinnedRate binned_rate(const std::vector<double>& beta) {
  const size_t m = beta.size();
  if (m == 0 || (m & (m - 1)) != 0)
    throw std::invalid_argument("binned_rate: length must be a power of two");
  for (double b : beta)
    if (!(b > 0) || !std::isfinite(b))
      throw std::invalid_argument("binned_rate: entries must be positive");
  const double unif = 1.0 / static_cast<double>(m);
  BinnedRate out;
  double total_mass = 0.0;
  for (double b : beta) {
    out.total += (b - unif) - unif * std::log(b / unif);
    total_mass += b;
  }
  out.mass_part = total_mass - 1.0 - std::log(total_mass);
  for (double b : beta) {
    const double s = b / total_mass;
    out.entropy_part += unif * std::log(unif / s);
  }
  return out;
}

}  // namespace specrule
