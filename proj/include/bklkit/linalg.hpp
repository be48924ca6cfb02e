#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <vector>

namespace bklkit {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double default_tol = 1e-9;
inline constexpr double default_tol_rank = 1e-7;

/// Orthonormal basis (columns) of the null space of `op` acting on column
/// vectors, by singular-value thresholding sigma <= tol_rank * sigma_max.
struct KernelBasis {
  CMatrix basis;
  RVector singular_values;
  double sigma_max = 0.0;

  Eigen::Index dim() const { return basis.cols(); }
};

inline KernelBasis kernel_basis(const CMatrix& op, double tol_rank = default_tol_rank) {
  KernelBasis out;
  const Eigen::Index n = op.cols();
  if (n == 0) return out;
  Eigen::JacobiSVD<CMatrix> svd(op, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  out.sigma_max = out.singular_values.size() ? out.singular_values(0) : 0.0;
  const double cut = tol_rank * out.sigma_max;
  Eigen::Index rank = 0;
  if (out.sigma_max > 0.0)
    for (Eigen::Index k = 0; k < out.singular_values.size(); ++k)
      if (out.singular_values(k) > cut) ++rank;
  out.basis = svd.matrixV().rightCols(n - rank);
  return out;
}

inline Eigen::Index numeric_rank(const CMatrix& m, double tol_rank = default_tol_rank) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const RVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol_rank * s(0)) ++r;
  return r;
}

/// Ascending eigenvalues of a Hermitian matrix (only the lower triangle is read).
inline RVector hermitian_eigenvalues(const CMatrix& h) {
  if (h.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double unitarity_defect(const CMatrix& u) {
  return (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).norm();
}

/// Distance from v to the column span of an orthonormal basis q.
inline double distance_to_span(const CVector& v, const CMatrix& q) {
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.adjoint() * v)).norm();
}

/// Largest distance of a column of `a` from span(b); both orthonormal.
inline double subspace_excess(const CMatrix& a, const CMatrix& b) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) worst = std::max(worst, distance_to_span(a.col(k), b));
  return worst;
}

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace bklkit
