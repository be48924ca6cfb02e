#pragma once

// Pointwise identities satisfied by the torsion of a Bismut Kahler-like metric.

#include <algorithm>
#include <vector>

#include "bklkit/torsion.hpp"

namespace bklkit {

/// P_{ijkl} = sum_q { T^q_ik conj T^q_jl + T^j_iq conj T^k_lq + T^l_kq conj T^i_jq
///                    - T^l_iq conj T^k_jq - T^j_kq conj T^i_lq }.
inline cplx bkl_polynomial(const Torsion& t, int i, int j, int k, int l) {
  cplx s = 0.0;
  for (int q = 0; q < t.n(); ++q) {
    s += t(q, i, k) * std::conj(t(q, j, l));
    s += t(j, i, q) * std::conj(t(k, l, q));
    s += t(l, k, q) * std::conj(t(i, j, q));
    s -= t(l, i, q) * std::conj(t(k, j, q));
    s -= t(j, k, q) * std::conj(t(i, l, q));
  }
  return s;
}

struct BklResidual {
  int n = 0;
  std::vector<double> values; ///< |P_{ijkl}| at ((i*n + j)*n + k)*n + l
  double max = 0.0;

  double operator()(int i, int j, int k, int l) const {
    return values[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
  }
};

inline BklResidual bkl_residual(const Torsion& t) {
  const int n = t.n();
  BklResidual r;
  r.n = n;
  r.values.resize(static_cast<std::size_t>(n) * n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = std::abs(bkl_polynomial(t, i, j, k, l));
          r.values[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l] = v;
          r.max = std::max(r.max, v);
        }
  return r;
}

/// Diagonal specialization (j = i, l = k), written out independently:
/// sum_q { |T^q_ik|^2 + 2 Re(T^i_iq conj T^k_kq) - |T^k_iq|^2 - |T^i_kq|^2 }.
inline double bkl_diagonal(const Torsion& t, int i, int k) {
  double s = 0.0;
  for (int q = 0; q < t.n(); ++q) {
    s += std::norm(t(q, i, k));
    s += 2.0 * std::real(t(i, i, q) * std::conj(t(k, k, q)));
    s -= std::norm(t(k, i, q));
    s -= std::norm(t(i, k, q));
  }
  return s;
}

struct AuxiliaryResiduals {
  double eta_orth = 0.0;
  double norm_gap = 0.0;
  double b_phi_gap = 0.0;
};

inline AuxiliaryResiduals auxiliary_residuals(const Torsion& t, const DerivedTensors& d) {
  const int n = t.n();
  AuxiliaryResiduals a;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      cplx s = 0.0;
      for (int q = 0; q < n; ++q) s += d.eta(q) * t(q, i, k);
      a.eta_orth = std::max(a.eta_orth, std::abs(s));
    }
  a.norm_gap = std::abs(d.normT2 - 2.0 * d.lambda * d.lambda);
  a.b_phi_gap = max_abs(d.B - d.phi - d.phi.adjoint());
  return a;
}

inline AuxiliaryResiduals auxiliary_residuals(const Torsion& t) { return auxiliary_residuals(t, derived_tensors(t)); }

/// Max Frobenius norm of P_X P_Y^* - P_Y^* P_X over an orthonormal basis of ker B.
inline double commutation_check(const Torsion& t, const DerivedTensors& d, double tol_rank = default_tol_rank) {
  KernelBasis kb = kernel_basis(d.B.transpose(), tol_rank);
  std::vector<CMatrix> p;
  for (Eigen::Index c = 0; c < kb.dim(); ++c) p.push_back(p_matrix(t, kb.basis.col(c)));
  double worst = 0.0;
  for (const auto& px : p)
    for (const auto& py : p) worst = std::max(worst, (px * py.adjoint() - py.adjoint() * px).norm());
  return worst;
}

inline double commutation_check(const Torsion& t, double tol_rank = default_tol_rank) {
  return commutation_check(t, derived_tensors(t), tol_rank);
}

struct BklReport {
  double main = 0.0;
  double eta_orth = 0.0;
  double norm_gap = 0.0;
  double b_phi_gap = 0.0;
  double commutation = 0.0;
  double tol = default_tol;
  bool admissible = false;
};

inline BklReport is_bkl_admissible(const Torsion& t, double tol = default_tol, double tol_rank = default_tol_rank) {
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  DerivedTensors d = derived_tensors(t);
  AuxiliaryResiduals a = auxiliary_residuals(t, d);
  BklReport r;
  r.main = bkl_residual(t).max;
  r.eta_orth = a.eta_orth;
  r.norm_gap = a.norm_gap;
  r.b_phi_gap = a.b_phi_gap;
  r.commutation = commutation_check(t, d, tol_rank);
  r.tol = tol;
  r.admissible = r.main <= tol && r.eta_orth <= tol && r.norm_gap <= tol && r.b_phi_gap <= tol &&
                 r.commutation <= tol;
  return r;
}

/// Kernel relations that hold at admissible points: X_eta in ker B, ker phi = ker B,
/// ker A inside ker B and orthogonal to X_eta. Each field is a distance (0 when exact).
struct KernelRelations {
  KernelBasis ker_a, ker_b, ker_phi;
  double xeta_in_ker_b = 0.0;
  double ker_phi_vs_ker_b = 0.0; ///< max of both one-sided excesses, plus dimension mismatch as 1
  double ker_a_in_ker_b = 0.0;
  double ker_a_perp_xeta = 0.0;
};

inline KernelRelations kernel_relations(const DerivedTensors& d, double tol_rank = default_tol_rank) {
  KernelRelations k;
  k.ker_a = kernel_basis(d.A.transpose(), tol_rank);
  k.ker_b = kernel_basis(d.B.transpose(), tol_rank);
  k.ker_phi = kernel_basis(d.phi.transpose(), tol_rank);
  k.xeta_in_ker_b = distance_to_span(d.X_eta, k.ker_b.basis);
  k.ker_phi_vs_ker_b = std::max(subspace_excess(k.ker_phi.basis, k.ker_b.basis),
                                subspace_excess(k.ker_b.basis, k.ker_phi.basis));
  if (k.ker_phi.dim() != k.ker_b.dim()) k.ker_phi_vs_ker_b = std::max(k.ker_phi_vs_ker_b, 1.0);
  k.ker_a_in_ker_b = subspace_excess(k.ker_a.basis, k.ker_b.basis);
  for (Eigen::Index c = 0; c < k.ker_a.dim(); ++c)
    k.ker_a_perp_xeta = std::max(k.ker_a_perp_xeta, std::abs(k.ker_a.basis.col(c).dot(d.X_eta)));
  return k;
}

} // namespace bklkit
