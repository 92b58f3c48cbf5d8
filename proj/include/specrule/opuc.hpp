#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specrule/linalg.hpp"
#include "specrule/measures.hpp"

namespace specrule {

/// Recursion coefficients on the unit circle. Interior sequences have all
/// moduli strictly below 1; terminated sequences end with a unimodular
/// coefficient and correspond to measures with finitely many atoms.
struct VerblunskySeq {
  enum class Kind { Interior, Terminated };
  Kind kind = Kind::Interior;
  std::vector<cplx> coeffs;

  int size() const { return static_cast<int>(coeffs.size()); }

  void validate() const {
    if (coeffs.empty()) throw std::invalid_argument("VerblunskySeq: empty");
    const int n = size();
    for (int j = 0; j < n; ++j) {
      const double m = std::abs(coeffs[j]);
      if (!std::isfinite(m))
        throw std::invalid_argument("VerblunskySeq: non-finite coefficient");
      const bool last = (j == n - 1);
      if (kind == Kind::Terminated && last) {
        if (std::abs(m - 1.0) > 1e-10)
          throw std::invalid_argument(
              "VerblunskySeq: terminated sequence needs |last| = 1");
      } else if (m >= 1.0) {
        throw std::invalid_argument(
            "VerblunskySeq: coefficient modulus must be < 1 at index " +
            std::to_string(j));
      }
    }
  }
};

inline double rho_of(cplx a) {
  const double s = 1.0 - std::norm(a);
  return s > 0 ? std::sqrt(s) : 0.0;
}

inline VerblunskySeq shift(const VerblunskySeq& seq) {
  if (seq.size() < 2)
    throw std::invalid_argument("shift: need at least two coefficients");
  VerblunskySeq out;
  out.kind = seq.kind;
  out.coeffs.assign(seq.coeffs.begin() + 1, seq.coeffs.end());
  return out;
}

// ---------------------------------------------------------------------------
// Monic recursion
// ---------------------------------------------------------------------------

struct SzegoEval {
  std::vector<cplx> phi;      // monic values, degree 0..m
  std::vector<cplx> phistar;  // reversed polynomials at the same point
};

/// Evaluate the coupled recursion P_{k+1} = z P_k - conj(a_k) P*_k,
/// P*_{k+1} = P*_k - a_k z P_k up to degree m <= size.
inline SzegoEval szego_eval(const VerblunskySeq& seq, cplx z, int m) {
  if (m < 0 || m > seq.size())
    throw std::invalid_argument("szego_eval: degree out of range");
  SzegoEval out;
  out.phi.resize(m + 1);
  out.phistar.resize(m + 1);
  cplx p(1, 0), q(1, 0);
  out.phi[0] = p;
  out.phistar[0] = q;
  for (int k = 0; k < m; ++k) {
    const cplx a = seq.coeffs[k];
    const cplx pn = z * p - std::conj(a) * q;
    const cplx qn = q - a * z * p;
    p = pn;
    q = qn;
    out.phi[k + 1] = p;
    out.phistar[k + 1] = q;
  }
  return out;
}

struct SzegoCoeffs {
  std::vector<cplx> phi;      // ascending powers, monic
  std::vector<cplx> phistar;
};

inline SzegoCoeffs szego_coeffs(const VerblunskySeq& seq, int m) {
  if (m < 0 || m > seq.size())
    throw std::invalid_argument("szego_coeffs: degree out of range");
  std::vector<cplx> p{cplx(1, 0)}, q{cplx(1, 0)};
  for (int k = 0; k < m; ++k) {
    const cplx a = seq.coeffs[k];
    std::vector<cplx> pn(k + 2, cplx(0, 0)), qn(k + 2, cplx(0, 0));
    for (int j = 0; j <= k; ++j) {
      pn[j + 1] += p[j];
      pn[j] -= std::conj(a) * q[j];
      qn[j] += q[j];
      qn[j + 1] -= a * p[j];
    }
    p = std::move(pn);
    q = std::move(qn);
  }
  return {std::move(p), std::move(q)};
}

inline cplx poly_eval(const std::vector<cplx>& ascending, cplx z) {
  cplx acc(0, 0);
  for (auto it = ascending.rbegin(); it != ascending.rend(); ++it)
    acc = acc * z + *it;
  return acc;
}

/// Orthonormal values phi_k / prod_{j<k} rho_j for k = 0..m. The terminated
/// length-N case has rho_{N-1} = 0, so degree N is undefined there.
inline std::vector<cplx> orthonormal_eval(const VerblunskySeq& seq, cplx z,
                                          int m) {
  if (seq.kind == VerblunskySeq::Kind::Terminated && m >= seq.size())
    throw std::domain_error(
        "orthonormal_eval: degree " + std::to_string(m) +
        " undefined for a terminated sequence of length " +
        std::to_string(seq.size()));
  SzegoEval ev = szego_eval(seq, z, m);
  std::vector<cplx> out(m + 1);
  double invprod = 1.0;
  for (int k = 0; k <= m; ++k) {
    out[k] = ev.phi[k] * invprod;
    if (k < m) {
      const double r = rho_of(seq.coeffs[k]);
      if (r <= 0)
        throw std::domain_error("orthonormal_eval: vanishing rho inside range");
      invprod /= r;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structured unitary matrices
// ---------------------------------------------------------------------------

/// 2x2 rotation-reflection block [[conj(b), rho], [rho, -b]]; collapses to
/// the 1x1 scalar (conj(b)) at the unimodular boundary.
inline CMatrix theta_block(cplx b) {
  const double r = rho_of(b);
  if (std::abs(std::abs(b) - 1.0) < 1e-12) {
    CMatrix t(1, 1);
    t(0, 0) = std::conj(b);
    return t;
  }
  CMatrix t(2, 2);
  t(0, 0) = std::conj(b);
  t(0, 1) = r;
  t(1, 0) = r;
  t(1, 1) = -b;
  return t;
}

namespace detail {

inline void require_terminated(const VerblunskySeq& seq, const char* who) {
  seq.validate();
  if (seq.kind != VerblunskySeq::Kind::Terminated)
    throw std::invalid_argument(std::string(who) +
                                ": finite matrices need a terminated sequence");
}

/// Place the block of coefficient j at rows (j, j+1); the final coefficient
/// contributes the boundary scalar at (N-1, N-1).
inline void place_theta(CMatrix& m, int j, cplx a, int n) {
  if (j == n - 1) {
    m(j, j) = std::conj(a);
    return;
  }
  const double r = rho_of(a);
  m(j, j) = std::conj(a);
  m(j, j + 1) = r;
  m(j + 1, j) = r;
  m(j + 1, j + 1) = -a;
}

}  // namespace detail

/// Even-index factor: direct sum of blocks at rows 0, 2, 4, ...
inline CMatrix build_cmv_L(const VerblunskySeq& seq) {
  detail::require_terminated(seq, "build_cmv_L");
  const int n = seq.size();
  CMatrix L = CMatrix::Identity(n, n);
  for (int j = 0; j < n; j += 2) detail::place_theta(L, j, seq.coeffs[j], n);
  return L;
}

/// Odd-index factor: 1 at the corner, then blocks at rows 1, 3, 5, ...
inline CMatrix build_cmv_M(const VerblunskySeq& seq) {
  detail::require_terminated(seq, "build_cmv_M");
  const int n = seq.size();
  CMatrix M = CMatrix::Identity(n, n);
  for (int j = 1; j < n; j += 2) detail::place_theta(M, j, seq.coeffs[j], n);
  return M;
}

inline CMatrix build_cmv(const VerblunskySeq& seq) {
  return build_cmv_L(seq) * build_cmv_M(seq);
}

inline CMatrix build_alt_cmv(const VerblunskySeq& seq) {
  return build_cmv_M(seq) * build_cmv_L(seq);
}

/// Ordered product of elementary factors E_0 E_1 ... E_{N-1}, where E_j is
/// the identity-padded block of coefficient j.
inline CMatrix build_ggt(const VerblunskySeq& seq) {
  detail::require_terminated(seq, "build_ggt");
  const int n = seq.size();
  CMatrix g = CMatrix::Identity(n, n);
  for (int j = 0; j < n; ++j) {
    CMatrix e = CMatrix::Identity(n, n);
    detail::place_theta(e, j, seq.coeffs[j], n);
    g = g * e;
  }
  return g;
}

/// Head-block peeling identity for the CMV form: the matrix equals
/// [block(a_0) (+) I] * [1 (+) alternate form of the shifted sequence].
inline double cmv_factorization_defect(const VerblunskySeq& seq) {
  detail::require_terminated(seq, "cmv_factorization_defect");
  const int n = seq.size();
  if (n < 2)
    throw std::invalid_argument("cmv_factorization_defect: need length >= 2");
  CMatrix head = CMatrix::Identity(n, n);
  detail::place_theta(head, 0, seq.coeffs[0], n);
  CMatrix tail = CMatrix::Identity(n, n);
  tail.block(1, 1, n - 1, n - 1) = build_alt_cmv(shift(seq));
  return (build_cmv(seq) - head * tail).cwiseAbs().maxCoeff();
}

/// Same peeling for the ordered-product form, which shifts into itself.
inline double ggt_factorization_defect(const VerblunskySeq& seq) {
  detail::require_terminated(seq, "ggt_factorization_defect");
  const int n = seq.size();
  if (n < 2)
    throw std::invalid_argument("ggt_factorization_defect: need length >= 2");
  CMatrix head = CMatrix::Identity(n, n);
  detail::place_theta(head, 0, seq.coeffs[0], n);
  CMatrix tail = CMatrix::Identity(n, n);
  tail.block(1, 1, n - 1, n - 1) = build_ggt(shift(seq));
  return (build_ggt(seq) - head * tail).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Reflection-type extension of a unit vector
// ---------------------------------------------------------------------------

/// Unitary sigma(f) with sigma(f) e_1 = f: the 2x2 rotation-reflection block
/// on span(e_1, f) padded by the identity. For f parallel to e_1 it is the
/// global phase f_1 * I.
inline CMatrix haar_sigma(const CVector& f) {
  const auto n = f.size();
  if (n < 1) throw std::invalid_argument("haar_sigma: empty vector");
  if (std::abs(f.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("haar_sigma: vector must be unit length");
  const cplx bbar = f(0);
  CVector r = f;
  r(0) -= bbar;
  const double kappa = r.norm();
  if (kappa < 1e-14) {
    return (bbar / std::abs(bbar)) * CMatrix::Identity(n, n);
  }
  const CVector e2 = r / kappa;
  CVector e1 = CVector::Zero(n);
  e1(0) = cplx(1, 0);
  CMatrix s = CMatrix::Identity(n, n);
  s += (bbar - 1.0) * (e1 * e1.adjoint());
  s += kappa * (e2 * e1.adjoint() + e1 * e2.adjoint());
  s += (-std::conj(bbar) - 1.0) * (e2 * e2.adjoint());
  return s;
}

/// One step of the recursive unitary composition: sigma(f) * (1 (+) inner).
inline CMatrix haar_compose(const CVector& f, const CMatrix& inner) {
  const auto n = f.size();
  if (inner.rows() != n - 1 || inner.cols() != n - 1)
    throw std::invalid_argument("haar_compose: inner block must be (n-1)x(n-1)");
  CMatrix padded = CMatrix::Identity(n, n);
  if (n > 1) padded.block(1, 1, n - 1, n - 1) = inner;
  return haar_sigma(f) * padded;
}

/// Inverse of haar_compose: recover f = U e_1 and the inner block of
/// sigma(f)^* U, verifying the corner actually deflates.
inline std::pair<CVector, CMatrix> haar_decompose(const CMatrix& u) {
  const auto n = u.rows();
  if (n < 1 || u.cols() != n)
    throw std::invalid_argument("haar_decompose: square matrix required");
  if (!is_unitary(u, 1e-10))
    throw std::invalid_argument("haar_decompose: matrix is not unitary");
  const CVector f = u.col(0);
  const CMatrix w = haar_sigma(f).adjoint() * u;
  double defect = std::abs(w(0, 0) - cplx(1, 0));
  for (Eigen::Index i = 1; i < n; ++i)
    defect = std::max({defect, std::abs(w(i, 0)), std::abs(w(0, i))});
  if (defect > 1e-10)
    throw std::runtime_error("haar_decompose: corner did not deflate");
  return {f, w.block(1, 1, n - 1, n - 1)};
}

// ---------------------------------------------------------------------------
// Unitary matrix -> recursion coefficients
// ---------------------------------------------------------------------------

/// Coefficients of the spectral measure of (U, v). Successive steps read
/// a_k = conj(<v, U_k v>), split U_k v into its v component and remainder,
/// and rotate the remainder direction into the recursion. Full-length runs
/// on an n x n matrix end with a unimodular coefficient.
inline VerblunskySeq verblunsky_from_unitary(const CMatrix& u_in,
                                             const CVector& v_in, int m = -1) {
  const auto n = u_in.rows();
  if (n < 1 || u_in.cols() != n)
    throw std::invalid_argument("verblunsky_from_unitary: square matrix required");
  if (v_in.size() != n || std::abs(v_in.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("verblunsky_from_unitary: unit vector required");
  if (!is_unitary(u_in, 1e-10))
    throw std::invalid_argument("verblunsky_from_unitary: matrix is not unitary");
  if (m < 0) m = static_cast<int>(n);
  if (m > n)
    throw std::invalid_argument(
        "verblunsky_from_unitary: at most n coefficients exist");

  VerblunskySeq out;
  out.kind = VerblunskySeq::Kind::Interior;
  CMatrix u = u_in;
  CVector v = v_in;
  for (int k = 0; k < m; ++k) {
    const CVector f = u * v;
    const cplx bbar = v.dot(f);  // <v, U v>, antilinear in the first slot
    cplx alpha = std::conj(bbar);
    CVector r = f - bbar * v;
    const double kappa = r.norm();
    if (kappa <= 1e-10) {
      if (k != n - 1)
        throw std::invalid_argument(
            "verblunsky_from_unitary: vector is not cyclic (deflation at step " +
            std::to_string(k) + ")");
      alpha /= std::abs(alpha);
      out.coeffs.push_back(alpha);
      out.kind = VerblunskySeq::Kind::Terminated;
      return out;
    }
    out.coeffs.push_back(alpha);
    const CVector e2 = r / kappa;
    // sigma on span(v, e2) sending v -> f; identity elsewhere
    CMatrix s = CMatrix::Identity(n, n);
    s += (bbar - 1.0) * (v * v.adjoint());
    s += kappa * (e2 * v.adjoint() + v * e2.adjoint());
    s += (-std::conj(bbar) - 1.0) * (e2 * e2.adjoint());
    u = s.adjoint() * u;
    v = e2;
  }
  return out;
}

/// Split off the first coefficient of (U, e_1): returns conj(U_00) and the
/// compression whose coefficients against delta_1 are the shifted sequence.
inline std::pair<cplx, CMatrix> strip_coefficient(const CMatrix& u) {
  const auto n = u.rows();
  if (n < 2 || u.cols() != n)
    throw std::invalid_argument("strip_coefficient: need a square matrix, n >= 2");
  if (!is_unitary(u, 1e-10))
    throw std::invalid_argument("strip_coefficient: matrix is not unitary");
  CVector e1 = CVector::Zero(n);
  e1(0) = cplx(1, 0);
  if (krylov_rank_ratio(u, e1) < 1e-8)
    throw std::invalid_argument("strip_coefficient: e_1 is not cyclic");
  const cplx alpha = std::conj(u(0, 0));
  CVector r = u.col(0);
  r(0) -= u(0, 0);
  const double kappa = r.norm();
  const CVector e2 = r / kappa;
  const CMatrix b = complete_onb({e1, e2}, n);
  const CMatrix uhat = b.adjoint() * u * b;
  CMatrix head = CMatrix::Identity(n, n);
  head.block(0, 0, 2, 2) = theta_block(alpha);
  const CMatrix w = head.adjoint() * uhat;
  double defect = std::abs(w(0, 0) - cplx(1, 0));
  for (Eigen::Index i = 1; i < n; ++i)
    defect = std::max({defect, std::abs(w(i, 0)), std::abs(w(0, i))});
  if (defect > 1e-10)
    throw std::runtime_error("strip_coefficient: corner did not deflate");
  return {alpha, w.block(1, 1, n - 1, n - 1)};
}

// ---------------------------------------------------------------------------
// Coefficients <-> measures
// ---------------------------------------------------------------------------

/// Purely a.c. circle measure with density prod(1-|a_j|^2) / |P_n|^2 against
/// normalized Lebesgue; exact evaluator plus a 4096-point stored grid.
inline SpectralMeasure bernstein_szego_measure(const VerblunskySeq& seq) {
  seq.validate();
  if (seq.kind == VerblunskySeq::Kind::Terminated)
    throw std::invalid_argument(
        "bernstein_szego_measure: interior sequences only");
  const int n = seq.size();
  auto coeffs = szego_coeffs(seq, n).phi;
  double pref = 1.0;
  for (const auto& a : seq.coeffs) pref *= 1.0 - std::norm(a);
  auto dens = [coeffs, pref](double theta) {
    const cplx z = std::polar(1.0, theta);
    const double mod2 = std::norm(poly_eval(coeffs, z));
    return pref / mod2;
  };
  SpectralMeasure mu;
  mu.domain = Domain::Circle;
  AcPart ac;
  const int grid_n = 4096;
  for (int k = 0; k < grid_n; ++k) {
    const double th = kTwoPi * k / grid_n;
    ac.grid.push_back(th);
    ac.values.push_back(dens(th));
  }
  ac.analytic = dens;
  mu.ac = std::move(ac);
  return mu;
}

/// Spectral measure of a coefficient sequence. Terminated sequences give the
/// finitely-atomic eigenmeasure of the structured matrix; interior ones give
/// the a.c. measure whose coefficients extend by zero.
inline SpectralMeasure verblunsky_to_measure(const VerblunskySeq& seq) {
  seq.validate();
  if (seq.kind == VerblunskySeq::Kind::Interior)
    return bernstein_szego_measure(seq);
  const int n = seq.size();
  std::vector<Atom> atoms;
  if (n == 1) {
    atoms.push_back({std::arg(std::conj(seq.coeffs[0])), 1.0});
  } else {
    const CMatrix c = build_cmv(seq);
    const auto evs = complex_eigenvalues(c);
    for (const auto& ev : evs) {
      const cplx z = ev / std::abs(ev);
      const auto phis = orthonormal_eval(seq, z, n - 1);
      double s = 0.0;
      for (const auto& p : phis) s += std::norm(p);
      // the monic degree-n value must vanish at every atom
      const cplx topmonic = szego_eval(seq, z, n).phi[n];
      if (std::abs(topmonic) > 1e-8 * std::max(1.0, s))
        throw std::runtime_error(
            "verblunsky_to_measure: eigenvalue fails the annihilation check");
      atoms.push_back({std::arg(z), 1.0 / s});
    }
  }
  SpectralMeasure mu = atomic_measure(Domain::Circle, std::move(atoms));
  const double mass = mu.atom_mass();
  if (std::abs(mass - 1.0) > 1e-10)
    throw std::runtime_error("verblunsky_to_measure: weights sum to " +
                             std::to_string(mass));
  return mu;
}

/// Coefficients of a circle probability measure from its trigonometric
/// moments. Stops early, flagging the sequence terminated, when a coefficient
/// reaches the unit circle (finitely supported measures do this at their
/// atom count).
inline VerblunskySeq measure_to_verblunsky(const SpectralMeasure& mu, int m) {
  if (mu.domain != Domain::Circle)
    throw std::invalid_argument("measure_to_verblunsky: circle measures only");
  if (m < 1) throw std::invalid_argument("measure_to_verblunsky: need m >= 1");
  const auto mom = circle_moments(mu, m);
  VerblunskySeq out;
  out.kind = VerblunskySeq::Kind::Interior;
  std::vector<cplx> p{cplx(1, 0)}, q{cplx(1, 0)};  // monic and reversed coeffs
  for (int k = 0; k < m; ++k) {
    cplx num(0, 0), den(0, 0);
    for (int j = 0; j <= k; ++j) {
      num += p[j] * mom[j + 1];
      den += q[j] * mom[j];
    }
    // den = squared norm of the monic polynomial: real and positive
    if (!(den.real() > 1e-14) ||
        std::abs(den.imag()) > 1e-8 * std::max(1.0, den.real()))
      throw std::runtime_error(
          "measure_to_verblunsky: degenerate moment data at step " +
          std::to_string(k));
    cplx alpha = std::conj(num / den);
    const double mod = std::abs(alpha);
    if (mod >= 1.0 - 1e-12) {
      alpha /= mod;
      out.coeffs.push_back(alpha);
      out.kind = VerblunskySeq::Kind::Terminated;
      return out;
    }
    out.coeffs.push_back(alpha);
    std::vector<cplx> pn(k + 2, cplx(0, 0)), qn(k + 2, cplx(0, 0));
    for (int j = 0; j <= k; ++j) {
      pn[j + 1] += p[j];
      pn[j] -= std::conj(alpha) * q[j];
      qn[j] += q[j];
      qn[j + 1] -= alpha * p[j];
    }
    p = std::move(pn);
    q = std::move(qn);
  }
  return out;
}

}  // namespace specrule
