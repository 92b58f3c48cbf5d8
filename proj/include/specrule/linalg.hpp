#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <stdexcept>
#include <vector>

namespace specrule {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// max-norm of U*U - I.
inline double unitarity_defect(const CMatrix& U) {
  if (U.rows() != U.cols()) return std::numeric_limits<double>::infinity();
  CMatrix d = U.adjoint() * U;
  d.diagonal().array() -= 1.0;
  return d.cwiseAbs().maxCoeff();
}

inline bool is_unitary(const CMatrix& U, double tol = 1e-12) {
  return unitarity_defect(U) <= tol;
}

inline std::vector<cplx> complex_eigenvalues(const CMatrix& A) {
  Eigen::ComplexEigenSolver<CMatrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("complex_eigenvalues: eigensolver failed");
  std::vector<cplx> out(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) out[i] = es.eigenvalues()(i);
  return out;
}

/// Smallest/largest singular value ratio of the Krylov matrix
/// [v, Uv, ..., U^{n-1} v]; cyclicity means this stays away from zero.
inline double krylov_rank_ratio(const CMatrix& U, const CVector& v) {
  const Eigen::Index n = U.rows();
  CMatrix K(n, n);
  CVector w = v;
  for (Eigen::Index k = 0; k < n; ++k) {
    K.col(k) = w;
    w = U * w;
  }
  Eigen::JacobiSVD<CMatrix> svd(K);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  return smax > 0 ? smin / smax : 0.0;
}

/// Orthonormal basis whose first columns are the given (already orthonormal)
/// vectors; completion is greedy Gram-Schmidt over the standard basis.
inline CMatrix complete_onb(const std::vector<CVector>& lead, Eigen::Index n) {
  CMatrix B(n, n);
  Eigen::Index have = 0;
  for (const auto& v : lead) B.col(have++) = v;
  std::vector<bool> used(n, false);
  while (have < n) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    CVector best_vec;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[j]) continue;
      CVector v = CVector::Zero(n);
      v(j) = 1.0;
      for (Eigen::Index k = 0; k < have; ++k) v -= B.col(k).dot(v) * B.col(k);
      const double nv = v.norm();
      if (nv > best_norm) {
        best_norm = nv;
        best = j;
        best_vec = v;
      }
    }
    if (best_norm < 1e-8)
      throw std::runtime_error("complete_onb: degenerate completion");
    used[best] = true;
    B.col(have++) = best_vec / best_norm;
  }
  return B;
}

}  // namespace specrule
