#include <catch_amalgamated.hpp>

#include <algorithm>

#include "support.hpp"

using namespace bklkit;
using namespace testing;

namespace {

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

/// Nonzero eigenvalues of B straight from the input tensor, largest first.
std::vector<double> nonzero_b_eigs(const Torsion& t) {
  RVector e = hermitian_eigenvalues(derived_tensors(t).B);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e(i) > 1e-9) out.push_back(e(i));
  return sorted(out);
}

} // namespace

TEST_CASE("classification of fixed points") {
  ClassificationReport z = classify_point(Torsion(3));
  CHECK(z.branch == Branch::kahler);
  CHECK(std::string(to_string(z.branch)) == "kahler");

  ClassificationReport e2 = classify_point(twisted_product_torsion(e2_spec()));
  CHECK(e2.branch == Branch::twisted_product);
  REQUIRE(e2.twist);
  CHECK(sorted(e2.twist->lambdas) == std::vector<double>{1.0, 1.0});
  CHECK(e2.twist->reconstruction < 1e-12);
  CHECK(e2.twist->re_orthogonality < 1e-12);
  for (double f : e2.twist->factor_scales) CHECK(std::abs(f - std::sqrt(2.0)) < 1e-12);

  ClassificationReport e3 = classify_point(sasakian_product(e3_spec()).torsion);
  CHECK(e3.branch == Branch::dim5_sasakian);
  REQUIRE(e3.dim5);
  CHECK(e3.dim5->degenerate);

  ClassificationReport probe = classify_point(dim5_probe());
  CHECK(probe.n == 5);
  CHECK(probe.r == 3);
  CHECK(probe.full);
  REQUIRE(probe.dim5);
  CHECK_FALSE(probe.dim5->degenerate);
  CHECK(probe.branch == Branch::bismut_flat_predicted);

  CHECK_THROWS_AS(classify_point(negative_control()), CheckFailure);
}

TEST_CASE("E3 five-dimensional report") {
  Torsion t = sasakian_product(e3_spec()).torsion;
  FrameReport rep = phi_compatible_frame(t);
  Dim5Report d = dim5_report(rep);
  CHECK(d.degenerate);
  CHECK(d.degeneracy < 1e-12);
  CHECK(d.abik <= 1e-12);
  CHECK(d.abi <= 1e-12);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(d.B(i) - 1.0) < 1e-12);
    CHECK(std::abs(d.B(i) - d.B_direct(i)) < 1e-12);
  }
  // B_i against the spectrum of B computed from the raw tensor
  std::vector<double> bs{d.B(0), d.B(1), d.B(2)};
  std::vector<double> eig = nonzero_b_eigs(t);
  REQUIRE(eig.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(sorted(bs)[i] - eig[i]) < 1e-12);
  CHECK(d.y_orthonormality < 1e-12);
  CHECK(d.b4_norm_gap < 1e-12);
  CHECK(d.b4_orthogonality < 1e-12);
}

TEST_CASE("five-dimensional report on random Sasakian points") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 30; ++trial) {
    Torsion t = sasakian_product(random_sasakian_spec(3, 1, rng)).torsion;
    t = transform_frame(t, random_unitary(5, rng));
    ClassificationReport c = classify_point(t);
    CHECK(c.branch == Branch::dim5_sasakian);
    REQUIRE(c.dim5);
    const Dim5Report& d = *c.dim5;
    const double sc = std::max(1.0, c.lambda * c.lambda);
    CHECK(d.abik < 1e-10 * sc);
    CHECK(d.abi < 1e-10 * sc);
    CHECK((d.B - d.B_direct).cwiseAbs().maxCoeff() < 1e-10 * sc);
    std::vector<double> bs(d.B.data(), d.B.data() + 3);
    std::vector<double> eig = nonzero_b_eigs(t);
    REQUIRE(eig.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(sorted(bs)[i] - eig[i]) < 1e-10 * sc);
    CHECK(d.y_orthonormality < 1e-10);
  }
}

TEST_CASE("five-dimensional report preconditions") {
  CHECK_THROWS_AS(dim5_report(phi_compatible_frame(Torsion(5))), InputError);
  CHECK_THROWS_AS(dim5_report(phi_compatible_frame(twisted_product_torsion(e2_spec()))), InputError);
}

TEST_CASE("twisted products classify as such, with gauge-invariant factor data") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const int r = 2 + trial % 3;
    const bool unit = trial % 2 == 0;
    TwistedProductSpec spec = random_twisted_spec(r, rng, unit);
    Torsion t = transform_frame(twisted_product_torsion(spec), random_unitary(2 * r, rng));
    ClassificationReport c = classify_point(t);
    CHECK(c.branch == Branch::twisted_product);
    REQUIRE(c.twist);
    CHECK(c.twist->reconstruction < 1e-10 * c.lambda);
    CHECK(c.twist->re_orthogonality < 1e-10 * c.lambda * c.lambda);
    // lambda_i |D col i| is all the torsion sees of (lambda_i, D)
    std::vector<double> want;
    for (int i = 0; i < r; ++i) want.push_back(spec.lambdas[static_cast<std::size_t>(i)] * spec.D.col(i).norm());
    std::vector<double> got = sorted(c.twist->factor_scales);
    want = sorted(want);
    for (int i = 0; i < r; ++i) CHECK(std::abs(got[static_cast<std::size_t>(i)] - want[static_cast<std::size_t>(i)]) < 1e-10 * c.lambda);
    // in the unit gauge the recovered constants are the input ones
    if (unit)
      for (double l : c.twist->lambdas) CHECK(l == 1.0);
    // rebuilding from the recovered data gives a point with the same invariants
    TwistedProductSpec back{c.twist->lambdas, c.twist->D};
    FrameReport f = phi_compatible_frame(twisted_product_torsion(back));
    CHECK(std::abs(f.lambda - c.lambda) < 1e-10 * c.lambda);
    CHECK((f.a - c.frame->a).norm() < 1e-9 * c.lambda);
  }
}

TEST_CASE("Sasakian products with r = s are twisted products") {
  std::mt19937_64 rng(103);
  for (int r : {1, 2, 3}) {
    Torsion t = sasakian_product(random_sasakian_spec(r, r, rng)).torsion;
    ClassificationReport c = classify_point(t);
    CHECK(c.branch == Branch::twisted_product);
  }
}

TEST_CASE("non-full and other branches") {
  std::mt19937_64 rng(107);
  // Sasakian with r < s is not full
  ClassificationReport c = classify_point(sasakian_product(random_sasakian_spec(1, 3, rng)).torsion);
  CHECK_FALSE(c.full);
  CHECK(c.branch == Branch::other);
  // a Kahler factor appended to a surface: n = 3, r = 1
  Torsion t(3);
  t.set(0, 0, 1, -1.0);
  ClassificationReport k = classify_point(t);
  CHECK_FALSE(k.full);
  CHECK(k.branch == Branch::other);
}

TEST_CASE("cross4 is orthogonal to its arguments") {
  std::mt19937_64 rng(109);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector4d a, b, c;
    for (int i = 0; i < 4; ++i) {
      a(i) = g(rng);
      b(i) = g(rng);
      c(i) = g(rng);
    }
    Eigen::Vector4d x = detail::cross4(a, b, c);
    CHECK(std::abs(x.dot(a)) < 1e-12);
    CHECK(std::abs(x.dot(b)) < 1e-12);
    CHECK(std::abs(x.dot(c)) < 1e-12);
    Eigen::Matrix4d m;
    m << a, b, c, x;
    CHECK(m.determinant() > 0.0);
  }
}
