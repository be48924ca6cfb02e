#pragma once

// phi-compatible frames: e_n = X_eta / lambda, T^j_{in} = delta_ij a_i and
// T^j_{i alpha} = delta_ij b_{alpha i} on the zero eigenspace N' of phi.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bklkit/bkl_check.hpp"

namespace bklkit {

struct FrameOptions {
  double tol = default_tol;
  double tol_rank = default_tol_rank;
  std::uint64_t seed = 0;
  int retries = 5;
  bool require_admissible = true;
};

struct FrameReport {
  int n = 0;
  bool kahler = false;
  double lambda = 0.0;
  int r = 0; ///< B-rank
  int s = 0; ///< n - 1 - r
  CMatrix U; ///< e'_a = sum_i U(a, i) e_i
  Torsion normalized;
  CVector a;    ///< a_1..a_r
  CMatrix b;    ///< s x r, b(alpha, i) = T^i_{i, r+alpha}
  CMatrix bhat; ///< (s+1) x r, rows of b then a
  int bhat_rank = 0;
  double min_eig_a = 0.0;
  double max_eig_a = 0.0;
  bool full = false;
  std::vector<std::vector<int>> grouping; ///< 0-based indices into a
  KernelBasis ker_a, ker_b, ker_phi;
  double dev_frame_a = 0.0, dev_frame_b = 0.0, dev_null_block = 0.0; ///< max deviations in the normalized frame
  double dev_b_row_sums = 0.0;                      ///< max |sum_i b(alpha, i)|
  double sum_a_gap = 0.0;                 ///< |sum a - lambda|
  int attempts = 0;                       ///< simultaneous diagonalization attempts used
};

namespace detail {

/// Unitary matrix with the given last row, completed by pivoted Gram-Schmidt
/// on standard basis vectors; the identity when last_row = e_n.
inline CMatrix complete_frame(const CVector& last_row) {
  const Eigen::Index n = last_row.size();
  std::vector<CVector> rows; // rows of U; r.dot(v) = sum conj(r_k) v_k is the row inner product
  rows.push_back(last_row);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index step = 0; step + 1 < n; ++step) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    CVector best_vec;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      CVector v = CVector::Unit(n, k);
      for (const auto& rrow : rows) v -= rrow.dot(v) * rrow; // dot conjugates rrow
      double nv = v.norm();
      if (nv > best_norm + 1e-12) {
        best_norm = nv;
        best = k;
        best_vec = v;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    rows.push_back(best_vec / best_norm);
  }
  // re-orthogonalize once more for stability
  for (std::size_t a = 1; a < rows.size(); ++a) {
    for (std::size_t b2 = 0; b2 < a; ++b2) rows[a] -= rows[b2].dot(rows[a]) * rows[b2];
    rows[a].normalize();
  }
  CMatrix u(n, n);
  for (std::size_t a = 1; a < rows.size(); ++a) u.row(static_cast<Eigen::Index>(a - 1)) = rows[a].transpose();
  u.row(n - 1) = rows[0].transpose();
  return u;
}

/// Orthonormal basis (columns) of span(q) chosen by pivoted projection of
/// standard basis vectors, making it independent of how q was computed.
inline CMatrix canonical_basis(const CMatrix& q) {
  const Eigen::Index n = q.rows(), m = q.cols();
  CMatrix out(n, m);
  if (m == 0) return out;
  CMatrix proj = q * q.adjoint();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index c = 0; c < m; ++c) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    CVector best_vec;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      CVector v = proj.col(k);
      for (Eigen::Index p = 0; p < c; ++p) v -= out.col(p).dot(v) * out.col(p);
      double nv = v.norm();
      if (nv > best_norm + 1e-12) {
        best_norm = nv;
        best = k;
        best_vec = v;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.col(c) = best_vec / best_norm;
  }
  return out;
}

inline double off_diagonal(const CMatrix& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) worst = std::max(worst, std::abs(m(i, j)));
  return worst;
}

/// Three-way comparison with tolerance.
inline int compare_tol(double x, double y, double tol) {
  if (x < y - tol) return -1;
  if (x > y + tol) return 1;
  return 0;
}

inline double principal_arg(cplx z) {
  double t = std::arg(z);
  return t <= -std::numbers::pi ? t + 2.0 * std::numbers::pi : t;
}

} // namespace detail

inline FrameReport kahler_report(const Torsion& t, const DerivedTensors& d, double tol_rank) {
  FrameReport rep;
  rep.n = t.n();
  rep.kahler = true;
  rep.lambda = d.lambda;
  rep.U = CMatrix::Identity(t.n(), t.n());
  rep.normalized = t;
  rep.a = CVector(0);
  rep.b = CMatrix(0, 0);
  rep.bhat = CMatrix(0, 0);
  rep.s = 0;
  RVector ea = hermitian_eigenvalues(d.A);
  rep.min_eig_a = ea.size() ? ea(0) : 0.0;
  rep.max_eig_a = ea.size() ? ea(ea.size() - 1) : 0.0;
  rep.full = false;
  rep.ker_a = kernel_basis(d.A.transpose(), tol_rank);
  rep.ker_b = kernel_basis(d.B.transpose(), tol_rank);
  rep.ker_phi = kernel_basis(d.phi.transpose(), tol_rank);
  return rep;
}

/// Positivity of A in the scale-free sense min-eig > tol_rank * max-eig.
inline bool a_positive(double min_eig, double max_eig, double tol_rank) {
  return max_eig > 0.0 && min_eig > tol_rank * max_eig;
}

/// rank(bhat) and fullness, cross-checked against positivity of A; throws
/// CheckFailure when the two disagree.
inline std::pair<int, bool> bhat_and_fullness(const FrameReport& rep, double tol_rank = default_tol_rank) {
  if (rep.kahler) return {0, false};
  int rank = static_cast<int>(numeric_rank(rep.bhat, tol_rank));
  bool full = rank == rep.n - rep.r;
  bool pos = a_positive(rep.min_eig_a, rep.max_eig_a, tol_rank);
  if (full != pos)
    throw CheckFailure("tolerance inconsistency: rank(bhat) = " + std::to_string(rank) + " (n - r = " +
                       std::to_string(rep.n - rep.r) + ") but min eigenvalue of A is " + std::to_string(rep.min_eig_a));
  return {rank, full};
}

inline FrameReport phi_compatible_frame(const Torsion& t, const FrameOptions& opt = {}) {
  const int n = t.n();
  DerivedTensors d = derived_tensors(t);
  if (opt.require_admissible) {
    BklReport chk = is_bkl_admissible(t, opt.tol, opt.tol_rank);
    if (!chk.admissible) throw CheckFailure("torsion is not BKL-admissible within tolerance");
  }
  if (d.lambda <= opt.tol) return kahler_report(t, d, opt.tol_rank);

  // step 1: e_n = X_eta / lambda
  CMatrix u0 = detail::complete_frame(d.X_eta / d.lambda);
  Torsion t1 = transform_frame(t, u0, 1e-8);
  const int m = n - 1;

  // step 2: diagonalize the normal matrix M(i, j) = T^j_{in} on e_1..e_{n-1}
  CMatrix mm(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) mm(i, j) = t1(j, i, n - 1);
  CMatrix g_e(m, 0), g_n(m, 0);
  if (m > 0) {
    Eigen::ComplexSchur<CMatrix> schur(mm);
    const CMatrix& q = schur.matrixU();
    const CMatrix& tri = schur.matrixT();
    double amax = 0.0;
    for (int k = 0; k < m; ++k) amax = std::max(amax, std::abs(tri(k, k)));
    const double cut = opt.tol_rank * std::max(d.lambda, amax);
    std::vector<int> nz, z;
    for (int k = 0; k < m; ++k) (std::abs(tri(k, k)) > cut ? nz : z).push_back(k);
    g_e.resize(m, static_cast<Eigen::Index>(nz.size()));
    g_n.resize(m, static_cast<Eigen::Index>(z.size()));
    for (std::size_t c = 0; c < nz.size(); ++c) g_e.col(static_cast<Eigen::Index>(c)) = q.col(nz[c]);
    for (std::size_t c = 0; c < z.size(); ++c) g_n.col(static_cast<Eigen::Index>(c)) = q.col(z[c]);
    g_e = detail::canonical_basis(g_e);
    g_n = detail::canonical_basis(g_n);
  }
  const int r = static_cast<int>(g_e.cols());
  const int s = m - r;
  const int rank_b = static_cast<int>(numeric_rank(d.B, opt.tol_rank));
  if (rank_b != r)
    throw CheckFailure("tolerance inconsistency: rank of phi/lambda is " + std::to_string(r) + " but rank of B is " +
                       std::to_string(rank_b));

  // step 3: simultaneous diagonalization of {P_{e_n}, P_{e_alpha}} restricted to E
  std::vector<CMatrix> family;
  {
    family.push_back(g_e.adjoint() * mm * g_e);
    for (int al = 0; al < s; ++al) {
      CVector x = CVector::Zero(n);
      // frame vector f = conj(g) has coordinates X_k = f(k)
      x.head(m) = g_n.col(al).conjugate();
      CMatrix pa = p_matrix(t1, x).topLeftCorner(m, m);
      family.push_back(g_e.adjoint() * pa * g_e);
    }
  }
  double scale = 0.0;
  for (const auto& f : family) scale = std::max(scale, f.norm());
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  CMatrix z = CMatrix::Identity(r, r);
  int attempts = 0;
  bool ok = r == 0;
  while (!ok && attempts < opt.retries) {
    ++attempts;
    CMatrix comb = CMatrix::Zero(r, r);
    for (const auto& f : family) comb += coef(rng) * f;
    Eigen::ComplexSchur<CMatrix> cs(comb);
    z = cs.matrixU();
    ok = true;
    for (const auto& f : family)
      if (detail::off_diagonal(z.adjoint() * f * z) > opt.tol * std::max(1.0, scale)) ok = false;
  }
  if (!ok)
    throw CheckFailure("simultaneous diagonalization failed after " + std::to_string(opt.retries) +
                       " attempts; the kernel family does not commute numerically");
  if (r > 0) g_e = g_e * z;

  // assemble: columns of g_full are eigenvectors in the t1 frame, rows of W = g_full^H
  CMatrix g_full = CMatrix::Zero(n, n);
  g_full.topLeftCorner(m, r) = g_e;
  g_full.block(0, r, m, s) = g_n;
  g_full(n - 1, n - 1) = 1.0;
  CMatrix u = g_full.adjoint() * u0;

  // step 5: phase gauge on every frame vector except e_n
  for (int a = 0; a < n - 1; ++a) {
    Eigen::Index idx = 0;
    u.row(a).cwiseAbs().maxCoeff(&idx);
    cplx v = u(a, idx);
    if (std::abs(v) > 0.0) u.row(a) *= std::conj(v) / std::abs(v);
  }
  Torsion t2 = transform_frame(t, u, 1e-8);

  // step 4: canonical order of e_1..e_r
  auto a_of = [&](int i) { return t2(i, i, n - 1); };
  auto b_of = [&](int al, int i) { return t2(i, i, r + al); };
  const double amax_now = [&] {
    double v = 0.0;
    for (int i = 0; i < r; ++i) v = std::max(v, std::abs(a_of(i)));
    return v;
  }();
  const double ctol = opt.tol * std::max(1.0, amax_now);
  auto less = [&](int x, int y) {
    cplx ax = a_of(x), ay = a_of(y);
    if (int c = detail::compare_tol(std::abs(ay), std::abs(ax), ctol)) return c < 0;
    if (int c = detail::compare_tol(detail::principal_arg(ax), detail::principal_arg(ay), opt.tol * 1e3)) return c < 0;
    for (int al = 0; al <= s; ++al) {
      cplx bx = al < s ? b_of(al, x) : ax, by = al < s ? b_of(al, y) : ay;
      if (int c = detail::compare_tol(bx.real(), by.real(), ctol)) return c < 0;
    }
    for (int al = 0; al <= s; ++al) {
      cplx bx = al < s ? b_of(al, x) : ax, by = al < s ? b_of(al, y) : ay;
      if (int c = detail::compare_tol(bx.imag(), by.imag(), ctol)) return c < 0;
    }
    return false;
  };
  // insertion sort: stable and well-defined for a tolerance comparator
  std::vector<int> order(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) order[static_cast<std::size_t>(i)] = i;
  for (std::size_t i = 1; i < order.size(); ++i)
    for (std::size_t j = i; j > 0 && less(order[j], order[j - 1]); --j) std::swap(order[j], order[j - 1]);
  CMatrix u_sorted = u;
  for (int i = 0; i < r; ++i) u_sorted.row(i) = u.row(order[static_cast<std::size_t>(i)]);
  u = u_sorted;
  t2 = transform_frame(t, u, 1e-8);

  FrameReport rep;
  rep.n = n;
  rep.lambda = d.lambda;
  rep.r = r;
  rep.s = s;
  rep.U = u;
  rep.normalized = t2;
  rep.attempts = attempts;
  rep.a.resize(r);
  rep.b.resize(s, r);
  rep.bhat.resize(s + 1, r);
  for (int i = 0; i < r; ++i) {
    rep.a(i) = t2(i, i, n - 1);
    for (int al = 0; al < s; ++al) rep.b(al, i) = t2(i, i, r + al);
  }
  rep.bhat.topRows(s) = rep.b;
  rep.bhat.row(s) = rep.a.transpose();

  // eq (7)-(9) deviations
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      cplx want7 = (i == j && i < r) ? rep.a(i) : cplx(0.0);
      rep.dev_frame_a = std::max(rep.dev_frame_a, std::abs(t2(j, i, n - 1) - want7));
      for (int al = 0; al < s; ++al) {
        cplx want8 = (i == j && i < r) ? rep.b(al, i) : cplx(0.0);
        rep.dev_frame_b = std::max(rep.dev_frame_b, std::abs(t2(j, i, r + al) - want8));
      }
    }
  for (int al = r; al < n; ++al)
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        rep.dev_null_block = std::max(rep.dev_null_block, std::abs(t2(al, x, y)));
        if (y >= r) rep.dev_null_block = std::max(rep.dev_null_block, std::abs(t2(x, al, y)));
      }
  for (int al = 0; al < s; ++al) rep.dev_b_row_sums = std::max(rep.dev_b_row_sums, std::abs(rep.b.row(al).sum()));
  rep.sum_a_gap = std::abs(rep.a.sum() - d.lambda);
  const double vtol = opt.tol * std::max(1.0, d.lambda);
  if (rep.dev_frame_a > vtol || rep.dev_frame_b > vtol || rep.dev_null_block > vtol || rep.dev_b_row_sums > vtol || rep.sum_a_gap > vtol)
    throw CheckFailure("normalized frame violates the phi-compatible structure beyond tolerance");

  DerivedTensors d2 = derived_tensors(t2);
  RVector ea = hermitian_eigenvalues(d2.A);
  rep.min_eig_a = ea(0);
  rep.max_eig_a = ea(ea.size() - 1);
  rep.ker_a = kernel_basis(d2.A.transpose(), opt.tol_rank);
  rep.ker_b = kernel_basis(d2.B.transpose(), opt.tol_rank);
  rep.ker_phi = kernel_basis(d2.phi.transpose(), opt.tol_rank);

  // grouping of equal a_i (relative tolerance), consecutive after sorting
  const double gtol = opt.tol * std::max(1.0, amax_now) * 1e3;
  for (int i = 0; i < r; ++i) {
    bool placed = false;
    for (auto& g : rep.grouping)
      if (std::abs(rep.a(g.front()) - rep.a(i)) <= gtol) {
        g.push_back(i);
        placed = true;
        break;
      }
    if (!placed) rep.grouping.push_back({i});
  }

  auto [rank, full] = bhat_and_fullness(rep, opt.tol_rank);
  rep.bhat_rank = rank;
  rep.full = full;
  return rep;
}

/// a_q and b_{alpha q} for all q in 0..n-1, extended by zeros outside E.
inline std::vector<cplx> extended_a(const FrameReport& rep) {
  std::vector<cplx> a(static_cast<std::size_t>(rep.n), 0.0);
  for (int i = 0; i < rep.r; ++i) a[static_cast<std::size_t>(i)] = rep.a(i);
  return a;
}

/// max |(a_i + a_k - a_j) conj T^j_ik| and |(b_ai + b_ak - b_aj) conj T^j_ik| over all indices.
inline double weight_relation_residual(const Torsion& tn, const FrameReport& rep) {
  const int n = tn.n();
  std::vector<std::vector<cplx>> rows;
  rows.push_back(extended_a(rep));
  for (int al = 0; al < rep.s; ++al) {
    std::vector<cplx> b(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < rep.r; ++i) b[static_cast<std::size_t>(i)] = rep.b(al, i);
    rows.push_back(b);
  }
  double worst = 0.0;
  for (const auto& w : rows)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          cplx f = w[static_cast<std::size_t>(i)] + w[static_cast<std::size_t>(k)] - w[static_cast<std::size_t>(j)];
          worst = std::max(worst, std::abs(f * std::conj(tn(j, i, k))));
        }
  return worst;
}

struct GroupingReport {
  std::vector<std::vector<int>> groups;
  double a_block_residual = 0.0; ///< max |A_ij| across different blocks of E_1..E_p, N
  bool distinct_required = false;
  bool distinct = true;
  bool isolated_check_required = false;
  std::vector<int> isolated_roots; ///< 0-based indices i < n-1 that are isolated
};

inline GroupingReport eigen_grouping(const FrameReport& rep, double tol = default_tol) {
  GroupingReport g;
  g.groups = rep.grouping;
  if (rep.kahler) return g;
  const int n = rep.n;
  std::vector<int> block(static_cast<std::size_t>(n), -1); // -1 marks N
  for (std::size_t gi = 0; gi < g.groups.size(); ++gi)
    for (int i : g.groups[gi]) block[static_cast<std::size_t>(i)] = static_cast<int>(gi);
  DerivedTensors d = derived_tensors(rep.normalized);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (block[static_cast<std::size_t>(i)] != block[static_cast<std::size_t>(j)])
        g.a_block_residual = std::max(g.a_block_residual, std::abs(d.A(i, j)));
  if (rep.r == n - 1 && n >= 2) {
    g.distinct_required = true;
    for (const auto& grp : g.groups)
      if (grp.size() > 1) g.distinct = false;
  }
  if (rep.r == n - 1 && n >= 4) {
    g.isolated_check_required = true;
    const Torsion& t = rep.normalized;
    for (int i = 0; i < n - 1; ++i) {
      bool found = false;
      for (int j = 0; j < n - 1 && !found; ++j)
        for (int k = 0; k < n - 1 && !found; ++k)
          if (std::abs(t(j, i, k)) > tol || std::abs(t(i, j, k)) > tol) found = true;
      if (!found) g.isolated_roots.push_back(i);
    }
  }
  return g;
}

/// Rank bound: when A > 0, r >= ceil(n/2). Returns true when it holds or does not apply.
inline bool rank_bound_holds(const FrameReport& rep, double tol_rank = default_tol_rank) {
  if (!a_positive(rep.min_eig_a, rep.max_eig_a, tol_rank)) return true;
  return rep.r >= (rep.n + 1) / 2;
}

} // namespace bklkit
