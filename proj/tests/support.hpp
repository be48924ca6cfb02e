#pragma once

// Seeded generators and fixed inputs shared by the test binaries.

#include <Eigen/QR>

#include <random>

#include "bklkit/bklkit.hpp"

namespace testing {

using namespace bklkit;

inline Torsion unit_surface() {
  Torsion t(2);
  t.set(0, 0, 1, -1.0);
  return t;
}

/// Far from admissible: T^1_23 = 1 alone gives BKL residual 1 and commutation residual sqrt2.
inline Torsion negative_control() {
  Torsion t(3);
  t.set(0, 1, 2, 1.0);
  return t;
}

/// T^1_12 = -1, T^2_12 = 1. Every n = 2 torsion is a scaled unit surface in a
/// rotated frame, so this point is admissible despite looking generic.
inline Torsion surface_pair() {
  Torsion t(2);
  t.set(0, 0, 1, -1.0);
  t.set(1, 0, 1, 1.0);
  return t;
}

/// Random tensor with T^n_{ik} = 0, so e_n lies in ker B as at every BKL point;
/// fully generic tensors have ker B = 0 and a vacuous commutation residual.
inline Torsion random_torsion_with_kernel(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Torsion t(n);
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) t.set(j, i, k, cplx(g(rng), g(rng)));
  return t;
}

inline TwistedProductSpec e2_spec() {
  TwistedProductSpec s{{1.0, 1.0}, CMatrix(2, 2)};
  s.D << 1.0, cplx(0, 1), cplx(0, 1), 1.0;
  return s;
}

inline SasakianProductSpec e3_spec() { return {3, 1, {1.0, 1.0, 1.0}, canonical_j(2)}; }

/// n = 5 admissible point with T^3_12 != 0: the non-degenerate side of the dimension-5 dichotomy.
inline Torsion dim5_probe() {
  Torsion t(5);
  const double s2 = std::sqrt(2.0);
  t.set(0, 0, 4, cplx(1, 1));
  t.set(1, 1, 4, cplx(1, -1));
  t.set(2, 2, 4, 2.0);
  t.set(0, 0, 3, s2);
  t.set(1, 1, 3, -s2);
  t.set(2, 0, 1, 2.0);
  return t;
}

inline double torsion_distance(const Torsion& a, const Torsion& b) {
  double worst = 0.0;
  for (std::size_t q = 0; q < a.raw().size(); ++q) worst = std::max(worst, std::abs(a.raw()[q] - b.raw()[q]));
  return worst;
}

inline CMatrix random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  // fix the phases so the distribution does not depend on the QR sign convention
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

inline Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

/// Invertible D with Re-orthogonal columns: either a unitary with scaled
/// columns, or r columns of a real orthogonal 2r x 2r matrix read as complex vectors.
inline TwistedProductSpec random_twisted_spec(int r, std::mt19937_64& rng, bool unit_lambdas = false) {
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::bernoulli_distribution coin(0.5);
  TwistedProductSpec spec;
  for (int i = 0; i < r; ++i) spec.lambdas.push_back(unit_lambdas ? 1.0 : scale(rng));
  for (;;) {
    CMatrix d(r, r);
    if (coin(rng)) {
      d = random_unitary(r, rng);
    } else {
      Eigen::MatrixXd o = random_orthogonal(2 * r, rng);
      for (int i = 0; i < r; ++i)
        for (int k = 0; k < r; ++k) d(i, k) = cplx(o(i, k), o(r + i, k));
    }
    for (int k = 0; k < r; ++k) d.col(k) *= scale(rng);
    if (std::abs(d.determinant()) > 1e-2) {
      spec.D = d;
      return spec;
    }
  }
}

/// D = Q J Q^T for a random orthogonal Q, c_j in [0.5, 2].
inline SasakianProductSpec random_sasakian_spec(int r, int s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cd(0.5, 2.0);
  SasakianProductSpec spec;
  spec.r = r;
  spec.s = s;
  for (int j = 0; j < r; ++j) spec.c.push_back(cd(rng));
  Eigen::MatrixXd q = random_orthogonal(r + s, rng);
  spec.D = q * canonical_j((r + s) / 2) * q.transpose();
  return spec;
}

inline Torsion random_torsion(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Torsion t(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) t.set(j, i, k, cplx(g(rng), g(rng)));
  return t;
}

/// Seeded admissible instance from one of the constructor families, possibly in a rotated frame.
inline Torsion random_admissible(std::mt19937_64& rng, int* family = nullptr) {
  std::uniform_int_distribution<int> pick(0, 2);
  const int f = pick(rng);
  if (family) *family = f;
  Torsion t;
  if (f == 0) {
    std::uniform_int_distribution<int> rd(1, 3);
    t = twisted_product_torsion(random_twisted_spec(rd(rng), rng));
  } else if (f == 1) {
    // (r, s) with r + s even
    static const int shapes[][2] = {{1, 1}, {2, 0}, {2, 2}, {3, 1}, {4, 0}, {3, 3}, {4, 2}};
    std::uniform_int_distribution<int> sd(0, 6);
    const auto& sh = shapes[sd(rng)];
    t = sasakian_product(random_sasakian_spec(sh[0], sh[1], rng)).torsion;
  } else {
    std::uniform_int_distribution<int> rd(1, 2);
    t = twisted_product_torsion(random_twisted_spec(rd(rng), rng));
    // a Kahler factor appended: full fails, everything else must hold
    Torsion big(t.n() + 1);
    for (int j = 0; j < t.n(); ++j)
      for (int i = 0; i < t.n(); ++i)
        for (int k = i + 1; k < t.n(); ++k) big.set(j, i, k, t(j, i, k));
    t = big;
  }
  return transform_frame(t, random_unitary(t.n(), rng));
}

} // namespace testing
