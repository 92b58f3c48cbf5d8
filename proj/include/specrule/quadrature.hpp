#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace specrule {

struct GaussRule {
  std::vector<double> nodes;    // on [-1,1]
  std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre rule by Golub-Welsch: eigenvalues of the Legendre Jacobi
/// matrix are the nodes, weights are 2 * (first eigenvector component)^2.
inline const GaussRule& gauss_legendre(int p) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  if (p < 1 || p > 128) throw std::invalid_argument("gauss_legendre: order out of range");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sub(p > 1 ? p - 1 : 0);
  for (int k = 1; k < p; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub);
  GaussRule rule;
  rule.nodes.resize(p);
  rule.weights.resize(p);
  for (int i = 0; i < p; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double q = es.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * q * q;
  }
  return cache.emplace(p, std::move(rule)).first->second;
}

/// Composite Gauss-Legendre over equal panels.
template <typename F>
auto integrate_panels(F&& f, double a, double b, int panels, int order = 8)
    -> decltype(f(a)) {
  const GaussRule& rule = gauss_legendre(order);
  using R = decltype(f(a));
  R total{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double c = lo + 0.5 * h;
    R acc{};
    for (size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * f(c + 0.5 * h * rule.nodes[i]);
    total += acc * (0.5 * h);
  }
  return total;
}

/// Composite rule doubled until successive values agree to `tol`.
template <typename F>
auto integrate_doubling(F&& f, double a, double b, double tol = 1e-12,
                        int start_panels = 2048, int max_panels = 1 << 18)
    -> decltype(f(a)) {
  auto prev = integrate_panels(f, a, b, start_panels);
  for (int p = start_panels * 2; p <= max_panels; p *= 2) {
    auto next = integrate_panels(f, a, b, p);
    if (std::abs(next - prev) < tol) return next;
    prev = next;
  }
  return prev;
}

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  bool divergent = false;   // accumulated past the divergence threshold
  double side_value = 0.0;  // integral of the optional side integrand
  double last_two[2] = {0.0, 0.0};
};

struct AdaptiveOptions {
  double tol = 1e-10;
  int max_depth = 48;
  double divergence_threshold = 1e6;
  // optional side integrand accumulated with the same nodes (used for
  // support-violation mass estimates); may be null
  std::function<double(double)> side;
};

namespace detail {

struct PanelEval {
  double integral;
  double side;
};

template <typename F>
PanelEval panel_gauss(F& f, const std::function<double(double)>& side, double a,
                      double b, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const double c = 0.5 * (a + b), h2 = 0.5 * (b - a);
  PanelEval out{0.0, 0.0};
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = c + h2 * rule.nodes[i];
    out.integral += rule.weights[i] * f(x);
    if (side) out.side += rule.weights[i] * side(x);
  }
  out.integral *= h2;
  out.side *= h2;
  return out;
}

template <typename F>
void adapt_rec(F& f, const AdaptiveOptions& opt, double a, double b,
               PanelEval whole, double tol, int depth, AdaptiveResult& res) {
  if (res.divergent) return;
  const double m = 0.5 * (a + b);
  PanelEval left = panel_gauss(f, opt.side, a, m, 8);
  PanelEval right = panel_gauss(f, opt.side, m, b, 8);
  const double refined = left.integral + right.integral;
  const double disc = refined - whole.integral;
  if (!std::isfinite(refined)) {
    res.divergent = true;
    return;
  }
  if (std::abs(disc) <= tol || depth >= opt.max_depth) {
    res.value += refined;
    res.side_value += left.side + right.side;
    res.error += std::abs(disc);
    if (depth >= opt.max_depth && std::abs(disc) > tol) res.converged = false;
    res.last_two[0] = whole.integral;
    res.last_two[1] = refined;
    if (std::abs(res.value) > opt.divergence_threshold) res.divergent = true;
    return;
  }
  // children keep the parent tolerance: halving it would chase an endpoint
  // singularity forever, since the local discrepancy also shrinks like the
  // panel width; the accepted-panel errors form a geometric tail, so the
  // accumulated error stays within a small multiple of tol
  adapt_rec(f, opt, a, m, left, tol, depth + 1, res);
  adapt_rec(f, opt, m, b, right, tol, depth + 1, res);
}

}  // namespace detail

/// Adaptive Gauss quadrature with local refinement; handles integrable
/// endpoint and interior log/sqrt singularities. Divergence is declared when
/// the accumulated value passes opt.divergence_threshold.
template <typename F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b,
                                  AdaptiveOptions opt = {}) {
  AdaptiveResult res;
  if (a == b) return res;
  // seed with a few panels so narrow features are not missed by one estimate
  const int seed_panels = 16;
  const double h = (b - a) / seed_panels;
  for (int p = 0; p < seed_panels && !res.divergent; ++p) {
    const double lo = a + p * h, hi = lo + h;
    auto whole = detail::panel_gauss(f, opt.side, lo, hi, 8);
    detail::adapt_rec(f, opt, lo, hi, whole, opt.tol / seed_panels, 0, res);
  }
  return res;
}

}  // namespace specrule
