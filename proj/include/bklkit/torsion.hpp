#pragma once

// Chern torsion T^j_{ik} of a Hermitian metric in a unitary frame, and the
// tensors derived from it. Indices are 0-based here and 1-based in files.

#include <cmath>
#include <string>
#include <vector>

#include "bklkit/errors.hpp"
#include "bklkit/linalg.hpp"

namespace bklkit {

/// One sparse component T^upper_{i k} with 1-based indices.
struct TorsionEntry {
  int upper = 0;
  int i = 0;
  int k = 0;
  cplx value;
};

class Torsion {
public:
  Torsion() = default;
  explicit Torsion(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n) {
    if (n < 1) throw InputError("dimension must be at least 1");
  }

  int n() const { return n_; }

  /// T^j_{ik}
  cplx operator()(int j, int i, int k) const { return data_[index(j, i, k)]; }

  /// Sets T^j_{ik} = v and T^j_{ki} = -v.
  void set(int j, int i, int k, cplx v) {
    if (i == k) {
      if (v != cplx(0.0)) throw InputError("T^j_{ii} must vanish");
      return;
    }
    data_[index(j, i, k)] = v;
    data_[index(j, k, i)] = -v;
  }

  /// Antisymmetric completion of 1-based sparse entries. A component may be
  /// listed twice only when both listings agree after antisymmetrization.
  static Torsion build(int n, const std::vector<TorsionEntry>& entries) {
    Torsion t(n);
    std::vector<char> seen(static_cast<std::size_t>(n) * n * n, 0);
    for (const auto& e : entries) {
      for (int idx : {e.upper, e.i, e.k})
        if (idx < 1 || idx > n)
          throw InputError("index " + std::to_string(idx) + " out of range 1.." + std::to_string(n));
      if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
        throw InputError("non-finite torsion entry");
      int j = e.upper - 1, i = e.i - 1, k = e.k - 1;
      if (i == k) {
        if (e.value != cplx(0.0))
          throw InputError("entry T^" + std::to_string(e.upper) + "_{" + std::to_string(e.i) + std::to_string(e.k) +
                           "} with equal lower indices must be zero");
        continue;
      }
      std::size_t slot = t.index(j, i, k);
      if (seen[slot]) {
        if (t.data_[slot] != e.value)
          throw InputError("conflicting entries for T^" + std::to_string(e.upper) + "_{" + std::to_string(e.i) +
                           std::to_string(e.k) + "}");
        continue;
      }
      seen[slot] = 1;
      seen[t.index(j, k, i)] = 1;
      t.set(j, i, k, e.value);
    }
    return t;
  }

  /// Nonzero components with i < k, 1-based.
  std::vector<TorsionEntry> entries() const {
    std::vector<TorsionEntry> out;
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i)
        for (int k = i + 1; k < n_; ++k)
          if ((*this)(j, i, k) != cplx(0.0)) out.push_back({j + 1, i + 1, k + 1, (*this)(j, i, k)});
    return out;
  }

  const std::vector<cplx>& raw() const { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const Torsion& a, const Torsion& b) { return a.n_ == b.n_ && a.data_ == b.data_; }

private:
  std::size_t index(int j, int i, int k) const {
    return (static_cast<std::size_t>(j) * n_ + i) * n_ + k;
  }

  int n_ = 0;
  std::vector<cplx> data_;
};

struct DerivedTensors {
  CVector eta;
  double lambda = 0.0;
  CVector X_eta;
  CMatrix A;   ///< A_{i jbar}
  CMatrix B;   ///< B_{i jbar}
  CMatrix phi; ///< phi(i, j) = phi_i^j
  double normT2 = 0.0;
};

inline DerivedTensors derived_tensors(const Torsion& t) {
  const int n = t.n();
  DerivedTensors d;
  d.eta = CVector::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) d.eta(k) += t(i, i, k);
  d.lambda = d.eta.norm();
  d.X_eta = d.eta.conjugate();
  d.A = CMatrix::Zero(n, n);
  d.B = CMatrix::Zero(n, n);
  d.phi = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx a = 0.0, b = 0.0, p = 0.0;
      for (int q = 0; q < n; ++q) {
        for (int k = 0; k < n; ++k) {
          a += t(q, i, k) * std::conj(t(q, j, k));
          b += t(j, q, k) * std::conj(t(i, q, k));
        }
        p += t(j, i, q) * std::conj(d.eta(q));
      }
      d.A(i, j) = a;
      d.B(i, j) = b;
      d.phi(i, j) = p;
    }
  for (const auto& v : t.raw()) d.normT2 += std::norm(v);
  return d;
}

/// Components in the frame e'_a = sum_i U_{ai} e_i:
///   T'^c_{ab} = sum U_{ai} U_{bk} conj(U_{cj}) T^j_{ik}.
inline Torsion transform_frame(const Torsion& t, const CMatrix& u, double tol = default_tol) {
  const int n = t.n();
  if (u.rows() != n || u.cols() != n) throw InputError("frame change has the wrong size");
  if (unitarity_defect(u) > tol) throw InputError("frame change is not unitary within tolerance");
  // contract one index at a time: O(n^4)
  std::vector<cplx> s1(static_cast<std::size_t>(n) * n * n), s2(s1.size());
  auto at = [n](std::vector<cplx>& v, int x, int y, int z) -> cplx& {
    return v[(static_cast<std::size_t>(x) * n + y) * n + z];
  };
  // s1[j][a][k] = sum_i U_ai T^j_ik
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < n; ++a)
      for (int k = 0; k < n; ++k) {
        cplx s = 0.0;
        for (int i = 0; i < n; ++i) s += u(a, i) * t(j, i, k);
        at(s1, j, a, k) = s;
      }
  // s2[j][a][b] = sum_k U_bk s1[j][a][k]
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx s = 0.0;
        for (int k = 0; k < n; ++k) s += u(b, k) * at(s1, j, a, k);
        at(s2, j, a, b) = s;
      }
  Torsion out(n);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        cplx s = 0.0;
        for (int j = 0; j < n; ++j) s += std::conj(u(c, j)) * at(s2, j, a, b);
        out.set(c, a, b, s);
      }
  return out;
}

/// Coefficient arrays of the pointwise forms built from T. For each (i, j):
///   gamma_ij = sum_k gamma_holo[i][j][k] phi_k + gamma_anti[i][j][k] conj(phi_k),
///   (theta_2)_ij = sum_k theta2[i][j][k] phi_k,
///   T^b(e_i, e_j) = sum_k tb_holo[i][j][k] e_k,
///   T^b(e_i, conj e_j) = sum_k tb_mixed_anti[i][j][k] conj(e_k) + tb_mixed_holo[i][j][k] e_k.
struct PointwiseForms {
  using Array3 = std::vector<std::vector<std::vector<cplx>>>;
  Array3 gamma_holo, gamma_anti, theta2, tb_holo, tb_mixed_anti, tb_mixed_holo;
};

inline PointwiseForms associated_forms(const Torsion& t) {
  const int n = t.n();
  auto zero = [n] {
    return PointwiseForms::Array3(static_cast<std::size_t>(n),
                                  std::vector<std::vector<cplx>>(static_cast<std::size_t>(n),
                                                                 std::vector<cplx>(static_cast<std::size_t>(n))));
  };
  PointwiseForms f{zero(), zero(), zero(), zero(), zero(), zero()};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        f.gamma_holo[i][j][k] = t(j, i, k);
        f.gamma_anti[i][j][k] = -std::conj(t(i, j, k));
        f.theta2[i][j][k] = std::conj(t(k, i, j));
        f.tb_holo[i][j][k] = -2.0 * t(k, i, j);
        f.tb_mixed_anti[i][j][k] = 2.0 * t(j, i, k);
        f.tb_mixed_holo[i][j][k] = -2.0 * std::conj(t(i, j, k));
      }
  return f;
}

/// Endomorphism P_X with (P_X)_i^j = sum_k T^j_{ik} X_k, as the matrix M(i, j).
inline CMatrix p_matrix(const Torsion& t, const CVector& x) {
  const int n = t.n();
  CMatrix m = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) m(i, j) += t(j, i, k) * x(k);
  return m;
}

} // namespace bklkit
