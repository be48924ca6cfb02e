#pragma once

// Branch decision for an admissible point from its frame data. The branches
// certify only pointwise hypotheses; flatness and splitting are differential
// statements that a single torsion tensor cannot prove.

#include <optional>
#include <string>

#include "bklkit/constructors.hpp"

namespace bklkit {

enum class Branch { kahler, bismut_flat_predicted, twisted_product, dim5_sasakian, other };

inline const char* to_string(Branch b) {
  switch (b) {
  case Branch::kahler: return "kahler";
  case Branch::bismut_flat_predicted: return "bismut-flat-predicted";
  case Branch::twisted_product: return "twisted-product";
  case Branch::dim5_sasakian: return "dim5-sasakian";
  case Branch::other: return "other";
  }
  return "other";
}

struct Dim5Report {
  double degeneracy = 0.0; ///< max |T^j_ik| over i, j, k <= 3
  bool degenerate = false;
  double abik = 0.0;       ///< max_{i<k} |2 Re sum_alpha b_ai conj b_ak|
  double abi = 0.0;        ///< max_i |lambda (b_5i + conj b_5i) - 2 sum_alpha |b_ai|^2|
  RVector B;               ///< B_i = 2 sum_alpha |b_ai|^2
  RVector B_direct;        ///< diagonal of the tensor B in the normalized frame
  Eigen::MatrixXd Y;       ///< columns Y_1..Y_4 in (eps_4, eps_4*, eps_5, eps_5*)
  double y_orthonormality = 0.0;
  CVector b4;              ///< (b_44, b_54) from Y_4
  double b4_norm_gap = 0.0;
  double b4_orthogonality = 0.0;
};

struct TwistRecovery {
  std::vector<double> lambdas; ///< surface constants in the gauge lambda_i = 1 of each surface
  CMatrix D;                   ///< twist matrix, d_ki = conj(bhat_ki)
  std::vector<double> factor_scales; ///< |column i of bhat| = lambda_i |column i of D|, gauge invariant
  double reconstruction = 0.0; ///< max deviation of twisted_product(1, D) from the normalized torsion
  double re_orthogonality = 0.0;
};

struct ClassificationReport {
  int n = 0;
  int r = 0;
  bool full = false;
  Branch branch = Branch::other;
  double lambda = 0.0;
  std::optional<FrameReport> frame;
  BklReport admissibility;
  double weight_relation = 0.0;
  GroupingReport grouping;
  std::optional<TwistRecovery> twist;
  std::optional<Dim5Report> dim5;
  std::string note;
};

namespace detail {

/// The vector X with X . v = det[c1, c2, c3, v] for all v.
inline Eigen::Vector4d cross4(const Eigen::Vector4d& c1, const Eigen::Vector4d& c2, const Eigen::Vector4d& c3) {
  Eigen::Vector4d out;
  for (int l = 0; l < 4; ++l) {
    Eigen::Matrix4d m;
    m.col(0) = c1;
    m.col(1) = c2;
    m.col(2) = c3;
    m.col(3) = Eigen::Vector4d::Unit(l);
    out(l) = m.determinant();
  }
  return out;
}

} // namespace detail

/// Five-dimensional frame data at n = 5, r = 3, full; b_5i is taken to be a_i.
inline Dim5Report dim5_report(const FrameReport& rep, double tol = default_tol) {
  if (rep.kahler || rep.n != 5 || rep.r != 3 || !rep.full)
    throw InputError("dim5 report needs n = 5, B-rank 3 and a full point");
  const Torsion& t = rep.normalized;
  Dim5Report d;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) d.degeneracy = std::max(d.degeneracy, std::abs(t(j, i, k)));
  d.degenerate = d.degeneracy <= tol * std::max(1.0, rep.lambda);

  // rows alpha = 4, 5 of bhat
  auto b = [&](int al, int i) { return rep.bhat(al, i); };
  d.B.resize(3);
  d.B_direct.resize(3);
  DerivedTensors dt = derived_tensors(t);
  for (int i = 0; i < 3; ++i) {
    d.B(i) = 2.0 * (std::norm(b(0, i)) + std::norm(b(1, i)));
    d.B_direct(i) = dt.B(i, i).real();
    double lhs = rep.lambda * 2.0 * b(1, i).real();
    d.abi = std::max(d.abi, std::abs(lhs - d.B(i)));
    for (int k = i + 1; k < 3; ++k) {
      double s = 2.0 * (b(0, i) * std::conj(b(0, k)) + b(1, i) * std::conj(b(1, k))).real();
      d.abik = std::max(d.abik, std::abs(s));
    }
  }
  // Y_i is proportional to -(Im b_4i, Re b_4i, Im b_5i, Re b_5i)
  d.Y = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector4d y(-b(0, i).imag(), -b(0, i).real(), -b(1, i).imag(), -b(1, i).real());
    d.Y.col(i) = y / y.norm();
  }
  Eigen::Vector4d y4 = detail::cross4(d.Y.col(0), d.Y.col(1), d.Y.col(2));
  d.Y.col(3) = y4 / y4.norm();
  d.y_orthonormality = (d.Y.transpose() * d.Y - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
  d.b4.resize(2);
  d.b4(0) = cplx(-d.Y(1, 3), -d.Y(0, 3));
  d.b4(1) = cplx(-d.Y(3, 3), -d.Y(2, 3));
  d.b4_norm_gap = std::abs(d.b4.squaredNorm() - 1.0);
  for (int i = 0; i < 3; ++i) {
    double s = (d.b4(0) * std::conj(b(0, i)) + d.b4(1) * std::conj(b(1, i))).real();
    d.b4_orthogonality = std::max(d.b4_orthogonality, std::abs(s));
  }
  return d;
}

/// Recovers surface data in the gauge where each surface has T^1_12 = 1:
/// the normalized torsion is then twisted_product(lambda = 1, D) with d_ki = conj(bhat_ki).
inline TwistRecovery recover_twist(const FrameReport& rep) {
  TwistRecovery out;
  const int r = rep.r;
  out.D = rep.bhat.conjugate();
  out.lambdas.assign(static_cast<std::size_t>(r), 1.0);
  for (int i = 0; i < r; ++i) out.factor_scales.push_back(rep.bhat.col(i).norm());
  out.re_orthogonality = re_orthogonality_defect(out.D);
  Torsion rebuilt(rep.n);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) rebuilt.set(i, i, r + k, std::conj(out.D(k, i)));
  double worst = 0.0;
  for (std::size_t q = 0; q < rebuilt.raw().size(); ++q)
    worst = std::max(worst, std::abs(rebuilt.raw()[q] - rep.normalized.raw()[q]));
  out.reconstruction = worst;
  return out;
}

inline ClassificationReport classify_point(const Torsion& t, const FrameOptions& opt = {}) {
  ClassificationReport out;
  out.n = t.n();
  out.admissibility = is_bkl_admissible(t, opt.tol, opt.tol_rank);
  if (!out.admissibility.admissible) throw CheckFailure("torsion is not BKL-admissible within tolerance");
  FrameOptions o = opt;
  o.require_admissible = false;
  FrameReport rep = phi_compatible_frame(t, o);
  out.lambda = rep.lambda;
  out.r = rep.r;
  out.full = rep.full;
  if (rep.kahler) {
    out.branch = Branch::kahler;
    out.frame = std::move(rep);
    return out;
  }
  out.weight_relation = weight_relation_residual(rep.normalized, rep);
  out.grouping = eigen_grouping(rep, opt.tol);
  const int n = out.n, r = out.r;
  if (r == n - 1 && n >= 4) {
    out.branch = Branch::bismut_flat_predicted;
    out.note = "B-rank n-1 with n >= 4: the pointwise hypotheses for Bismut flatness hold; flatness itself is not certified";
    if (!out.grouping.distinct) out.note += "; warning: repeated eigenvalue a_i at rank n-1";
    if (!out.grouping.isolated_roots.empty()) out.note += "; warning: isolated root present at rank n-1";
  } else if (rep.full && 2 * r == n) {
    out.branch = Branch::twisted_product;
    out.twist = recover_twist(rep);
    out.note = "surface constants reported in the gauge T^1_12 = 1 per surface; factor_scales are gauge invariant";
  } else if (n == 5 && r == 3 && rep.full) {
    out.dim5 = dim5_report(rep, opt.tol);
    if (out.dim5->degenerate) {
      out.branch = Branch::dim5_sasakian;
      out.note = "degenerate E-torsion: locally the data of a multiple product of Sasakian 3-manifolds; a pointwise analogue, not a proof";
    } else {
      out.branch = Branch::bismut_flat_predicted;
      out.note = "n = 5, r = 3 with T^j_ik != 0 for some i, j, k <= 3: the Bismut-flat side of the dichotomy; not certified";
    }
  } else {
    out.branch = Branch::other;
  }
  out.frame = std::move(rep);
  return out;
}

} // namespace bklkit
