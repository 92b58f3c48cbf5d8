#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "specrule/linalg.hpp"
#include "specrule/opuc.hpp"
#include "specrule/oprl.hpp"
#include "specrule/rng.hpp"

namespace specrule {

/// Rotation-invariant coefficient with |value|^2 ~ Beta(1, l+1), i.e.
/// P(|v| > r) = (1-r^2)^{l+1}. The boundary case l = -1 is a pure phase.
inline cplx sample_kappa(RngStream& rng, double ell) {
  if (ell < -1.0) throw std::invalid_argument("sample_kappa: need l >= -1");
  double r;
  if (ell == -1.0) {
    r = 1.0;
  } else {
    const double u = rng.uniform_pos();
    const double s = 1.0 - std::pow(u, 1.0 / (ell + 1.0));
    r = s > 0 ? std::sqrt(s) : 0.0;
  }
  const double phase = kTwoPi * rng.uniform01();
  return std::polar(r, phase);
}

/// Coefficient sequence matching the n-point circular unitary spectrum:
/// independent entries with decreasing exponents n-2-j, unimodular last.
inline VerblunskySeq sample_cue_verblunsky(RngStream& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_cue_verblunsky: need n >= 1");
  VerblunskySeq seq;
  seq.kind = VerblunskySeq::Kind::Terminated;
  seq.coeffs.reserve(n);
  for (int j = 0; j < n; ++j)
    seq.coeffs.push_back(sample_kappa(rng, static_cast<double>(n - 2 - j)));
  return seq;
}

/// Uniform point on the probability simplex; the last weight closes the sum
/// to 1 exactly. Each marginal is Beta(1, n-1).
inline std::vector<double> sample_simplex_weights(RngStream& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_simplex_weights: need n >= 1");
  std::vector<double> e(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    e[i] = -std::log(rng.uniform_pos());
    total += e[i];
  }
  std::vector<double> w(n);
  double acc = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    w[i] = e[i] / total;
    acc += w[i];
  }
  w[n - 1] = 1.0 - acc;
  return w;
}

inline cplx sample_complex_gaussian(RngStream& rng) {
  return cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
}

/// Uniformly distributed unitary, built recursively: a random unit first
/// column via the reflection extension, composed with a smaller copy.
inline CMatrix sample_haar_unitary(RngStream& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_haar_unitary: need n >= 1");
  CMatrix u(1, 1);
  u(0, 0) = std::polar(1.0, kTwoPi * rng.uniform01());
  for (int k = 2; k <= n; ++k) {
    CVector f(k);
    for (int i = 0; i < k; ++i) f(i) = sample_complex_gaussian(rng);
    const double nrm = f.norm();
    if (nrm < 1e-12) {
      f.setZero();
      f(0) = cplx(1, 0);
    } else {
      f /= nrm;
    }
    u = haar_compose(f, u);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Gaussian Hermitian models, scaled so the spectrum fills [-2,2]
// ---------------------------------------------------------------------------

/// Gamma(shape, 1) via the squeeze-accept method; shapes below 1 use the
/// power boost of a shape+1 draw.
inline double sample_gamma(RngStream& rng, double shape) {
  if (!(shape > 0)) throw std::invalid_argument("sample_gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = rng.uniform_pos();
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0);
    v = v * v * v;
    const double u = rng.uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Tridiagonal model with the unitary-invariant Gaussian spectrum:
/// b_k ~ N(0, 1/n), a_k^2 ~ Gamma(n-k, rate n).
inline JacobiParams sample_gue_jacobi(RngStream& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_gue_jacobi: need n >= 1");
  JacobiParams jp;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 1; k <= n; ++k) jp.b.push_back(rng.normal() * inv_sqrt_n);
  for (int k = 1; k <= n - 1; ++k)
    jp.a.push_back(std::sqrt(sample_gamma(rng, static_cast<double>(n - k)) / n));
  return jp;
}

/// Dense Hermitian counterpart: diagonal N(0, 1/n), off-diagonal real and
/// imaginary parts N(0, 1/(2n)) each.
inline CMatrix sample_gue_dense(RngStream& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_gue_dense: need n >= 1");
  CMatrix m(n, n);
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  const double so = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    m(i, i) = cplx(rng.normal() * sd, 0.0);
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = cplx(rng.normal() * so, rng.normal() * so);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

inline std::vector<double> gue_eigenvalues(RngStream& rng, int n) {
  const JacobiParams jp = sample_gue_jacobi(rng, n);
  Eigen::VectorXd diag(n), sub(std::max(0, n - 1));
  for (int i = 0; i < n; ++i) diag(i) = jp.b[i];
  for (int i = 0; i + 1 < n; ++i) sub(i) = jp.a[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gue_eigenvalues: eigensolver failed");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
  return out;
}

// ---------------------------------------------------------------------------
// Distribution checks
// ---------------------------------------------------------------------------

inline double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * kPi) +
         std::asin(x / 2.0) / kPi;
}

inline double beta1_cdf(double s, double m) {
  if (s <= 0) return 0.0;
  if (s >= 1) return 1.0;
  return 1.0 - std::pow(1.0 - s, m);
}

/// sup-distance between the empirical law of the samples and a target CDF.
inline double ks_statistic(std::vector<double> xs,
                           const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(i / n - f)});
  }
  return d;
}

inline double ks_statistic_two(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("ks_statistic_two: no samples");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    // consume every copy of the smaller value from both sides before
    // comparing, so tied samples do not register a spurious 1/n gap
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  return d;
}

/// 1% critical values for the sup-distance statistics.
inline double ks_critical_one(std::size_t m) {
  return 1.628 / std::sqrt(static_cast<double>(m));
}

inline double ks_critical_two(std::size_t m, std::size_t n) {
  return 1.628 * std::sqrt(static_cast<double>(m + n) /
                           (static_cast<double>(m) * static_cast<double>(n)));
}

}  // namespace specrule
