#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrule/linalg.hpp"
#include "specrule/measures.hpp"

namespace specrule {

/// Tridiagonal recursion data: diagonal b_1..b_n, couplings a_1..a_{n-1},
/// all couplings positive.
struct JacobiParams {
  std::vector<double> a;
  std::vector<double> b;

  int size() const { return static_cast<int>(b.size()); }

  void validate() const {
    if (b.empty()) throw std::invalid_argument("JacobiParams: empty diagonal");
    if (a.size() + 1 != b.size())
      throw std::invalid_argument(
          "JacobiParams: need exactly one fewer coupling than diagonal entries");
    for (double v : b)
      if (!std::isfinite(v))
        throw std::invalid_argument("JacobiParams: non-finite diagonal entry");
    for (double v : a)
      if (!(v > 0) || !std::isfinite(v))
        throw std::invalid_argument("JacobiParams: couplings must be positive");
  }
};

/// Rank-r modification of the half-line operator with b = 0, a = 1: the
/// prefix replaces the first r diagonal entries and the r-1 couplings among
/// them; the coupling out of the prefix and everything beyond stay free.
struct FiniteRankPerturbation {
  JacobiParams prefix;

  int rank() const { return prefix.size(); }
  void validate() const { prefix.validate(); }
};

/// Orthonormal polynomial values p_0..p_m via the three-term recursion
/// a_{k+1} p_{k+1} = (x - b_{k+1}) p_k - a_k p_{k-1}.
inline std::vector<double> p_eval(const JacobiParams& jp, double x, int m) {
  if (m < 0 || m > static_cast<int>(jp.a.size()))
    throw std::invalid_argument("p_eval: degree out of range");
  std::vector<double> out(m + 1);
  double prev = 0.0, cur = 1.0;
  out[0] = cur;
  for (int k = 0; k < m; ++k) {
    const double next =
        ((x - jp.b[k]) * cur - (k > 0 ? jp.a[k - 1] : 0.0) * prev) / jp.a[k];
    prev = cur;
    cur = next;
    out[k + 1] = cur;
  }
  return out;
}

/// Eigen decomposition of the tridiagonal matrix; atoms at the eigenvalues
/// with weights given by the squared first components.
inline SpectralMeasure jacobi_to_measure(const JacobiParams& jp) {
  jp.validate();
  const int n = jp.size();
  Eigen::VectorXd diag(n), sub(std::max(0, n - 1));
  for (int i = 0; i < n; ++i) diag(i) = jp.b[i];
  for (int i = 0; i + 1 < n; ++i) sub(i) = jp.a[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("jacobi_to_measure: eigensolver failed");
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double w = es.eigenvectors()(0, i);
    atoms.push_back({es.eigenvalues()(i), w * w});
  }
  return atomic_measure(Domain::Line, std::move(atoms));
}

namespace detail {

struct QuadNodes {
  std::vector<double> x, w;
};

inline QuadNodes measure_nodes(const SpectralMeasure& mu, int panels) {
  QuadNodes q;
  for (const auto& a : mu.atoms) {
    q.x.push_back(a.pos);
    q.w.push_back(a.weight);
  }
  if (mu.has_ac()) {
    const double lo = mu.ac->grid.front(), hi = mu.ac->grid.back();
    const GaussRule& rule = gauss_legendre(16);
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * h;
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = c + 0.5 * h * rule.nodes[i];
        q.x.push_back(x);
        q.w.push_back(rule.weights[i] * 0.5 * h * mu.density(x));
      }
    }
  }
  return q;
}

inline JacobiParams stieltjes_pass(const QuadNodes& q, int m) {
  const size_t n = q.x.size();
  std::vector<double> pk(n, 1.0), pk1(n, 0.0);  // monic values at the nodes
  JacobiParams jp;
  double nu_prev = 0.0, nu0 = 0.0;
  for (double w : q.w) nu0 += w;
  double nu = nu0;
  for (int k = 0; k < m; ++k) {
    double num = 0.0;
    nu = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double s = q.w[i] * pk[i] * pk[i];
      nu += s;
      num += s * q.x[i];
    }
    if (!(nu > 1e-26 * nu0))
      throw std::runtime_error(
          "measure_to_jacobi: moment data degenerates at step " +
          std::to_string(k) + " (support too small?)");
    const double bk = num / nu;
    jp.b.push_back(bk);
    double a2 = 0.0;
    if (k > 0) {
      a2 = nu / nu_prev;
      if (!(a2 > 0))
        throw std::runtime_error(
            "measure_to_jacobi: nonpositive squared coupling at step " +
            std::to_string(k));
      jp.a.push_back(std::sqrt(a2));
    }
    nu_prev = nu;
    for (size_t i = 0; i < n; ++i) {
      const double next = (q.x[i] - bk) * pk[i] - a2 * pk1[i];
      pk1[i] = pk[i];
      pk[i] = next;
    }
  }
  return jp;
}

}  // namespace detail

/// Recursion coefficients b_1..b_m, a_1..a_{m-1} of a line probability
/// measure, by orthogonalization against the measure itself (atoms entered
/// exactly, the a.c. part through panel quadrature refined until the
/// coefficients stop moving).
inline JacobiParams measure_to_jacobi(const SpectralMeasure& mu, int m) {
  if (mu.domain != Domain::Line)
    throw std::invalid_argument("measure_to_jacobi: line measures only");
  if (m < 1) throw std::invalid_argument("measure_to_jacobi: need m >= 1");
  if (!mu.has_ac()) {
    if (static_cast<int>(mu.atoms.size()) < m)
      throw std::invalid_argument(
          "measure_to_jacobi: fewer atoms than requested coefficients");
    return detail::stieltjes_pass(detail::measure_nodes(mu, 0), m);
  }
  JacobiParams prev = detail::stieltjes_pass(detail::measure_nodes(mu, 256), m);
  for (int panels = 512; panels <= (1 << 14); panels *= 2) {
    JacobiParams next = detail::stieltjes_pass(detail::measure_nodes(mu, panels), m);
    double diff = 0.0;
    for (int i = 0; i < m; ++i) diff = std::max(diff, std::abs(next.b[i] - prev.b[i]));
    for (int i = 0; i + 1 < m; ++i)
      diff = std::max(diff, std::abs(next.a[i] - prev.a[i]));
    prev = std::move(next);
    if (diff < 1e-11) return prev;
  }
  throw std::runtime_error("measure_to_jacobi: quadrature did not stabilize");
}

// ---------------------------------------------------------------------------
// Resolvent transforms
// ---------------------------------------------------------------------------

/// Stieltjes transform int d(nu_0)/(t - z) of the free measure: the branch
/// of (-z + sqrt(z-2) sqrt(z+2))/2 that behaves like -1/z at infinity.
/// Real arguments are read as x + i0 (pass +0.0 imaginary parts).
inline cplx free_m(cplx z) {
  return 0.5 * (-z + std::sqrt(z - 2.0) * std::sqrt(z + 2.0));
}

/// Borel transform of the perturbed operator's spectral measure, evaluated
/// by the finite continued fraction over the prefix with the free tail.
inline cplx perturbed_m(const FiniteRankPerturbation& pert, cplx z) {
  cplx m = free_m(z);
  const int r = pert.rank();
  for (int k = r; k >= 1; --k) {
    const double a = (k <= r - 1) ? pert.prefix.a[k - 1] : 1.0;
    m = 1.0 / (pert.prefix.b[k - 1] - z - a * a * m);
  }
  return m;
}

/// Spectral measure of a finite-rank perturbation: a.c. density
/// Im m(x+i0)/pi on (-2,2) plus the eigenvalues outside, located as zeros of
/// 1/m with weights -1/(d(1/m)/dx). Verifies total mass 1 within 1e-8.
inline SpectralMeasure perturbed_spectral_data(const FiniteRankPerturbation& pert) {
  pert.validate();
  auto dens = [pert](double x) {
    if (x <= -2.0 || x >= 2.0) return 0.0;
    const cplx m = perturbed_m(pert, cplx(x, 0.0));
    return std::max(0.0, m.imag() / 3.141592653589793238463);
  };
  auto h = [&](double x) {
    const cplx m = perturbed_m(pert, cplx(x, 0.0));
    return (1.0 / m).real();
  };
  double bmax = 0.0, amax = 1.0;
  for (double v : pert.prefix.b) bmax = std::max(bmax, std::abs(v));
  for (double v : pert.prefix.a) amax = std::max(amax, v);
  const double B = std::max(3.0, bmax + 2.0 * amax + 1.0);

  std::vector<Atom> atoms;
  auto scan_side = [&](double lo, double hi) {
    const int steps = 4096;
    double xprev = lo, hprev = h(lo);
    for (int i = 1; i <= steps; ++i) {
      const double x = lo + (hi - lo) * i / steps;
      const double hx = h(x);
      if (std::isfinite(hprev) && std::isfinite(hx) && hprev * hx < 0) {
        double a = xprev, fa = hprev, b2 = x;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (a + b2);
          const double fm = h(mid);
          if (fa * fm <= 0)
            b2 = mid;
          else {
            a = mid;
            fa = fm;
          }
          if (b2 - a < 1e-12 * std::max(1.0, std::abs(mid))) break;
        }
        const double root = 0.5 * (a + b2);
        if (std::abs(h(root)) < 1e-4) {  // rejects poles of 1/m
          const double step = 1e-6 * std::max(1.0, std::abs(root));
          const double hp = (h(root + step) - h(root - step)) / (2 * step);
          if (hp < 0) {
            const double w = -1.0 / hp;
            if (w > 0 && std::isfinite(w)) atoms.push_back({root, w});
          }
        }
      }
      xprev = x;
      hprev = hx;
    }
  };
  scan_side(2.0 + 1e-9, B);
  scan_side(-B, -2.0 - 1e-9);

  SpectralMeasure mu;
  mu.domain = Domain::Line;
  mu.atoms = std::move(atoms);
  std::stable_sort(mu.atoms.begin(), mu.atoms.end(),
                   [](const Atom& p, const Atom& q) { return p.pos < q.pos; });
  AcPart ac;
  const int K = 4096;
  for (int k = K + 1; k >= 0; --k) {
    const double x = 2.0 * std::cos(3.141592653589793238463 * k / (K + 1));
    ac.grid.push_back(x);
    ac.values.push_back(dens(x));
  }
  ac.analytic = dens;
  mu.ac = std::move(ac);

  const double mass = mu.total_mass();
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::runtime_error(
        "perturbed_spectral_data: spectral mass came out as " +
        std::to_string(mass));
  return mu;
}

inline SpectralMeasure perturbed_spectral_data(const JacobiParams& prefix) {
  return perturbed_spectral_data(FiniteRankPerturbation{prefix});
}

}  // namespace specrule
