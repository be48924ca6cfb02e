#pragma once

// The three example families: pluriclosed twisted products of surfaces,
// multiple products of Sasakian 3-manifolds, and eta-scalings. Each
// constructor returns a torsion tensor and, when every frame coefficient lies
// in Q(i, sqrt2), the exact FormModel it came from.

#include <optional>

#include "bklkit/exact/models.hpp"
#include "bklkit/frame.hpp"

namespace bklkit {

struct Constructed {
  Torsion torsion;
  std::optional<exact::CoframedModel> model;
  std::string model_note; ///< why the model is absent, when it is
};

struct TwistedProductSpec {
  std::vector<double> lambdas;
  CMatrix D;
};

struct SasakianProductSpec {
  int r = 0;
  int s = 0;
  std::vector<double> c;
  Eigen::MatrixXd D;
};

struct EtaScaleSpec {
  Torsion base;
  double t = 1.0;
};

inline constexpr double construct_tol = 1e-12;

namespace detail {

inline std::optional<exact::NumberMatrix> snap_matrix(const CMatrix& m) {
  exact::NumberMatrix out(static_cast<std::size_t>(m.rows()), std::vector<exact::Number>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!exact::snap_complex(m(i, j), out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])) return std::nullopt;
  return out;
}

} // namespace detail

/// max_{j<k} |sum_i d_ij conj(d_ik) + d_ik conj(d_ij)|: columns must be Re-orthogonal.
inline double re_orthogonality_defect(const CMatrix& d) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index k = j + 1; k < d.cols(); ++k) worst = std::max(worst, std::abs(2.0 * d.col(k).dot(d.col(j)).real()));
  return worst;
}

inline void validate(const TwistedProductSpec& spec) {
  const auto r = static_cast<Eigen::Index>(spec.lambdas.size());
  if (r == 0) throw InputError("twisted product needs at least one factor");
  if (spec.D.rows() != r || spec.D.cols() != r) throw InputError("D must be r x r with r = number of lambdas");
  for (double l : spec.lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw InputError("every lambda_i must be positive");
  if (!spec.D.allFinite()) throw InputError("D has non-finite entries");
  const double scale = std::max(1.0, max_abs(spec.D));
  if (numeric_rank(spec.D, construct_tol) < r) throw InputError("D is singular");
  if (re_orthogonality_defect(spec.D) > construct_tol * scale * scale)
    throw InputError("D violates sum_i (d_ij conj d_ik + d_ik conj d_ij) = 0");
}

/// T^i_{j, r+k} = lambda_i conj(d_ki) delta_ij in the frame (phi-directions, psi-directions).
inline Torsion twisted_product_torsion(const TwistedProductSpec& spec) {
  validate(spec);
  const int r = static_cast<int>(spec.lambdas.size());
  Torsion t(2 * r);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) t.set(i, i, r + k, spec.lambdas[static_cast<std::size_t>(i)] * std::conj(spec.D(k, i)));
  return t;
}

inline Constructed twisted_product(const TwistedProductSpec& spec) {
  Constructed out{twisted_product_torsion(spec), std::nullopt, {}};
  if (auto d = detail::snap_matrix(spec.D)) {
    out.model = exact::twisted_product_model(*d);
  } else {
    out.model_note = "D has entries outside Q(i, sqrt2); the exact model is available only for field entries";
  }
  return out;
}

inline void validate(const SasakianProductSpec& spec) {
  if (spec.r < 1 || spec.s < 0) throw InputError("need r >= 1 Sasakian factors and s >= 0 flat directions");
  if ((spec.r + spec.s) % 2 != 0) throw InputError("r + s must be even");
  if (static_cast<int>(spec.c.size()) != spec.r) throw InputError("need exactly r constants c_j");
  for (double c : spec.c)
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("every c_j must be positive");
  const int m = spec.r + spec.s;
  if (spec.D.rows() != m || spec.D.cols() != m) throw InputError("D must be (r+s) x (r+s)");
  if (!spec.D.allFinite()) throw InputError("D has non-finite entries");
  if ((spec.D + spec.D.transpose()).cwiseAbs().maxCoeff() > construct_tol) throw InputError("D is not skew-symmetric");
  if ((spec.D.transpose() * spec.D - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > construct_tol)
    throw InputError("D is not orthogonal");
}

struct SkewCanonicalForm {
  Eigen::MatrixXd P;
  bool orientation_reversing = false; ///< det P = -1; forced by D when Pf(D) and Pf(J) differ in sign
};

/// The block matrix [[0, I_m], [-I_m, 0]].
inline Eigen::MatrixXd canonical_j(int m) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m).setIdentity();
  j.bottomLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  return j;
}

/// Orthogonal P with P^T D P = J. Columns come in pairs p_k, p_{m+k} = -D p_k,
/// each p_k the pivoted projection of a standard basis vector, so D = J gives P = I.
/// det P is determined by D (it equals Pf(D)/Pf(J)) and is reported, not forced.
inline SkewCanonicalForm skew_orthogonal_canonical_form(const Eigen::MatrixXd& d, double tol = 1e-10) {
  const Eigen::Index n = d.rows();
  if (n == 0 || n != d.cols() || n % 2 != 0) throw InputError("D must be square of even size");
  if ((d + d.transpose()).cwiseAbs().maxCoeff() > tol) throw InputError("D is not skew-symmetric");
  if ((d.transpose() * d - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > tol)
    throw InputError("D is not orthogonal");
  const Eigen::Index m = n / 2;
  Eigen::MatrixXd p(n, n);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    Eigen::VectorXd best_vec;
    for (Eigen::Index e = 0; e < n; ++e) {
      if (used[static_cast<std::size_t>(e)]) continue;
      Eigen::VectorXd v = Eigen::VectorXd::Unit(n, e);
      for (Eigen::Index q = 0; q < k; ++q) {
        v -= p.col(q).dot(v) * p.col(q);
        v -= p.col(m + q).dot(v) * p.col(m + q);
      }
      if (v.norm() > best_norm + 1e-12) {
        best_norm = v.norm();
        best = e;
        best_vec = v;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    p.col(k) = best_vec / best_norm;
    p.col(m + k) = -d * p.col(k);
  }
  SkewCanonicalForm out{p, p.determinant() < 0.0};
  return out;
}

/// T^i_{j, r+a} = (c_j i / sqrt2)(p_{a j} - i p_{a* j}) delta_ij, a* = a + m, m = (r+s)/2.
inline Torsion sasakian_product_torsion(const SasakianProductSpec& spec, const Eigen::MatrixXd& p) {
  const int m = (spec.r + spec.s) / 2;
  Torsion t(spec.r + m);
  const cplx iu(0.0, 1.0);
  for (int j = 0; j < spec.r; ++j)
    for (int a = 0; a < m; ++a) {
      cplx v = spec.c[static_cast<std::size_t>(j)] * iu / std::sqrt(2.0) * (p(a, j) - iu * p(a + m, j));
      t.set(j, j, spec.r + a, v);
    }
  return t;
}

struct SasakianConstructed : Constructed {
  SkewCanonicalForm canonical;
};

inline SasakianConstructed sasakian_product(const SasakianProductSpec& spec) {
  validate(spec);
  SasakianConstructed out;
  out.canonical = skew_orthogonal_canonical_form(spec.D);
  out.torsion = sasakian_product_torsion(spec, out.canonical.P);
  if (auto p = detail::snap_matrix(out.canonical.P.cast<cplx>())) {
    out.model = exact::sasakian_product_model(static_cast<std::size_t>(spec.r), static_cast<std::size_t>(spec.s), *p);
  } else {
    out.model_note = "P has entries outside Q(sqrt2); the exact model is available only for field entries";
  }
  return out;
}

/// max_{i != k} |Re(a_i conj a_k)|.
inline double eta_scaling_obstruction(const CVector& a) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index k = 0; k < a.size(); ++k)
      if (i != k) worst = std::max(worst, std::abs((a(i) * std::conj(a(k))).real()));
  return worst;
}

struct EtaScaled {
  Torsion torsion;      ///< in the frame U^H (normalized, rescaled e_n), so t = 1 returns the input
  FrameReport base;     ///< normalization of the base
  double lambda = 0.0;  ///< new |eta|
};

/// In the normalized frame, T^j_{in} = a_i delta_ij becomes t a_i delta_ij and
/// nothing else changes; the result is rotated back by U^H.
inline EtaScaled eta_scaling(const EtaScaleSpec& spec, const FrameOptions& opt = {}) {
  if (!(spec.t > 0.0) || !std::isfinite(spec.t)) throw InputError("t must be positive");
  FrameReport rep = phi_compatible_frame(spec.base, opt);
  if (rep.kahler) throw InputError("eta-scaling needs a non-Kahler base");
  const double amax = rep.a.cwiseAbs().maxCoeff();
  if (eta_scaling_obstruction(rep.a) > opt.tol * std::max(1.0, amax * amax))
    throw InputError("eta-scaling requires Re(a_i conj a_k) = 0 for i != k");
  Torsion t = rep.normalized;
  const int n = t.n();
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < n - 1; ++j) t.set(j, i, n - 1, i == j && i < rep.r ? spec.t * rep.a(i) : cplx(0.0));
  EtaScaled out;
  out.torsion = transform_frame(t, rep.U.adjoint(), 1e-8);
  out.base = std::move(rep);
  out.lambda = derived_tensors(out.torsion).lambda;
  return out;
}

/// Exact counterpart: rescales the last coframe member of a model whose coframe
/// is phi-compatible with e_n along X_eta. t must lie in Q(sqrt2).
inline exact::ScaledModel eta_scaled_model(const exact::CoframedModel& base, double t) {
  exact::Number tn;
  if (!(t > 0.0) || !exact::snap_real(t, tn)) throw InputError("t must be a positive element of Q(sqrt2) for the exact model");
  return exact::eta_scaled_model(base, base.coframe.size() - 1, tn);
}

} // namespace bklkit
