#include <catch_amalgamated.hpp>

#include <algorithm>

#include "support.hpp"

using namespace bklkit;
using namespace testing;

namespace {

SearchConfig plain(int n) {
  SearchConfig c;
  c.n = n;
  c.lambda_target.reset();
  return c;
}

RVector random_params(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RVector x(2 * param_count(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
  return x;
}

/// Parameter pairs of T^i_jk and T^j_ik for all j, k < n - 1: an isolated root at index i.
std::vector<int> isolated_root_pattern(int n, int i) {
  std::vector<int> out;
  for (int j = 0; j < n - 1; ++j)
    for (int k = 0; k < n - 1; ++k) {
      if (j < k) out.push_back(param_index(n, i, j, k));
      if (i < k) out.push_back(param_index(n, j, i, k));
      if (k < i) out.push_back(param_index(n, j, k, i));
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

} // namespace

TEST_CASE("parameter layout round-trips") {
  std::mt19937_64 rng(113);
  for (int n = 2; n <= 6; ++n) {
    Torsion t = random_torsion(n, rng);
    CHECK(torsion_distance(torsion_from_params(n, params_from_torsion(t)), t) == 0.0);
    CHECK(param_index(n, 0, 0, 1) == 0);
    CHECK(param_index(n, n - 1, n - 2, n - 1) == param_count(n) - 1);
  }
  CHECK_THROWS_AS(torsion_from_params(3, RVector::Zero(5)), InputError);
}

TEST_CASE("residual on fixed points") {
  ResidualModel m2(plain(2));
  CHECK(m2.residual(RVector::Zero(m2.dim())).norm() == 0.0);
  CHECK(m2.residual(params_from_torsion(unit_surface())).norm() == 0.0);
  // the lambda pin is met by the unit surface
  ResidualModel pinned([] {
    SearchConfig c;
    c.n = 2;
    return c;
  }());
  CHECK(pinned.residual(params_from_torsion(unit_surface())).norm() == 0.0);
  ResidualModel m3(plain(3));
  CHECK(m3.residual(params_from_torsion(negative_control())).norm() > 0.5);
  CHECK(m3.residual(RVector::Zero(m3.dim())).norm() == 0.0);
  CHECK_THROWS_AS(m3.residual(RVector::Zero(4)), InputError);
}

TEST_CASE("residual families match the checker") {
  std::mt19937_64 rng(127);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3;
    RVector x = random_params(n, rng);
    Torsion t = torsion_from_params(n, x);
    ResidualModel m(plain(n));
    RVector r = m.residual(x);
    BklResidual br = bkl_residual(t);
    double worst = 0.0;
    for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(br.values.size()); ++q)
      worst = std::max(worst, std::abs(std::hypot(r(2 * q), r(2 * q + 1)) - br.values[static_cast<std::size_t>(q)]));
    CHECK(worst < 1e-10);
    AuxiliaryResiduals a = auxiliary_residuals(t);
    const Eigen::Index base = 2 * static_cast<Eigen::Index>(br.values.size());
    double eo = 0.0;
    const int pairs = n * (n - 1) / 2;
    for (int p = 0; p < pairs; ++p) eo = std::max(eo, std::hypot(r(base + 2 * p), r(base + 2 * p + 1)));
    CHECK(std::abs(eo - a.eta_orth) < 1e-10);
    CHECK(std::abs(std::abs(r(base + 2 * pairs)) - a.norm_gap) < 1e-10);
  }
}

TEST_CASE("analytic Jacobian against central differences") {
  std::mt19937_64 rng(131);
  for (int trial = 0; trial < 10; ++trial) {
    SearchConfig c;
    c.n = 3 + trial % 2;
    c.target_rank = c.n - 2;
    c.full = true;
    ResidualModel m(c);
    RVector x = random_params(c.n, rng);
    CHECK(m.jacobian_self_check(x) < 1e-5);
  }
  // plain tables, several dimensions
  for (int n = 2; n <= 5; ++n) {
    ResidualModel m(plain(n));
    CHECK(m.jacobian_self_check(random_params(n, rng)) < 1e-5);
  }
}

TEST_CASE("Jacobian structure at the zero tensor and along the phase orbit") {
  ResidualModel z(plain(3));
  CHECK(z.jacobian(RVector::Zero(z.dim())).cwiseAbs().maxCoeff() == 0.0);

  SearchConfig c;
  c.n = 2;
  ResidualModel m(c);
  RVector x = params_from_torsion(unit_surface());
  // d/dtheta of e^{i theta} T at theta = 0 is i T
  RVector v = params_from_torsion(transform_frame(unit_surface(), CMatrix::Identity(2, 2)));
  for (Eigen::Index p = 0; p < v.size() / 2; ++p) {
    const double re = x(2 * p), im = x(2 * p + 1);
    v(2 * p) = -im;
    v(2 * p + 1) = re;
  }
  CHECK((m.jacobian(x) * v).norm() < 1e-14);
  const double h = 1e-6;
  RVector fd = (m.residual(x + h * v) - m.residual(x - h * v)) / (2 * h);
  CHECK(fd.norm() < 1e-9);
}

TEST_CASE("descent from a perturbed E2 converges") {
  Torsion e2 = twisted_product_torsion(e2_spec());
  RVector x0 = params_from_torsion(e2);
  std::mt19937_64 rng(137);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RVector start = x0;
  for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += 1e-2 * u(rng);
  REQUIRE((start - x0).cwiseAbs().maxCoeff() <= 1e-2);
  SearchConfig c;
  c.n = 4;
  c.target_rank = 2;
  c.full = true;
  c.lambda_target = 2.0;
  c.start = start;
  c.restarts = 1;
  c.max_iters = 200;
  SearchResult r = search(c);
  CHECK(r.best_residual < 1e-10);
  CHECK(r.trace[0].iterations <= 200);
  CHECK(r.success);
  REQUIRE(r.admissibility);
  CHECK(r.admissibility->admissible);
  REQUIRE(r.classification);
  CHECK(r.classification->branch == Branch::twisted_product);
}

TEST_CASE("surface search finds admissible points") {
  SearchConfig c;
  c.n = 2;
  c.seed = 1;
  c.restarts = 4;
  SearchResult r = search(c);
  CHECK(r.success);
  REQUIRE(r.admissibility);
  CHECK(r.admissibility->admissible);
  // the reported residual is reproducible from the reported x
  ResidualModel m(c);
  CHECK(std::abs(m.residual(r.x).norm() - r.best_residual) == 0.0);
  // the best is the minimum over restarts
  for (const auto& t : r.trace) CHECK(r.best_residual <= t.residual);
}

TEST_CASE("results do not depend on the worker count") {
  SearchConfig c;
  c.n = 3;
  c.target_rank = 2;
  c.seed = 0x5eed5eed12345ull;
  c.restarts = 8;
  c.max_iters = 60;
  c.threads = 1;
  SearchResult a = search(c);
  c.threads = 8;
  SearchResult b = search(c);
  CHECK(a.best_restart == b.best_restart);
  CHECK(a.best_residual == b.best_residual);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].residual == b.trace[k].residual);
    CHECK(a.trace[k].iterations == b.trace[k].iterations);
  }
}

TEST_CASE("isolated-root pattern at rank n-1 stays away from the variety") {
  SearchConfig c;
  c.n = 4;
  c.target_rank = 3;
  c.seed = 2024;
  c.restarts = 6;
  c.max_iters = 300;
  c.threads = 4;
  c.clamped = isolated_root_pattern(4, 0);
  SearchResult r = search(c);
  double floor = 1e300;
  for (const auto& t : r.trace) floor = std::min(floor, t.residual);
  INFO("empirical residual floor " << floor);
  CHECK(floor > 1e-3);
  CHECK_FALSE(r.success);
  // the clamped components really are zero at the reported point
  for (int p : c.clamped) CHECK(r.x(2 * p) == 0.0);
}

TEST_CASE("configuration validation") {
  SearchConfig c;
  c.n = 1;
  CHECK_THROWS_AS(ResidualModel(c), InputError);
  c.n = 3;
  c.target_rank = 3;
  CHECK_THROWS_AS(ResidualModel(c), InputError);
  c.target_rank = 1;
  c.restarts = 0;
  CHECK_THROWS_AS(ResidualModel(c), InputError);
}
