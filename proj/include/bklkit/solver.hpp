#pragma once

// Damped least squares over the independent torsion components. Every
// residual family is a sum of products of two components, so residuals and
// the analytic Jacobian come from one table of bilinear terms.
//
// Parameter layout: components T^j_{ik} with i < k, ordered by (j, i, k)
// lexicographically, each as (Re, Im): x[2p], x[2p+1].

#include <Eigen/Dense>

#include <atomic>
#include <optional>
#include <random>
#include <thread>

#include "bklkit/analyzer.hpp"

namespace bklkit {

struct SearchConfig {
  int n = 2;
  std::optional<int> target_rank;
  bool full = false;
  std::uint64_t seed = 0;
  int restarts = 1;
  int max_iters = 500;
  double residual_tol = 1e-10;
  double stop_tol = 1e-12;
  double damping_init = 1e-3;
  double damping_up = 10.0;
  double damping_down = 10.0;
  double damping_min = 1e-12;
  double damping_max = 1e6;
  double barrier = 0.05;                  ///< margin for rank and fullness barriers
  std::optional<double> lambda_target = 1.0; ///< pins |eta|^2 - target^2 = 0; excludes the trivial zero
  std::optional<RVector> start;           ///< common starting point; restarts add jitter
  double start_jitter = 0.0;              ///< per-coordinate Gaussian scale around `start`
  std::vector<int> clamped;               ///< parameter pairs p held at zero
  int threads = 1;
};

struct RestartTrace {
  int restart = 0;
  int iterations = 0;
  double residual = 0.0;
  bool success = false;
};

struct SearchResult {
  double best_residual = 0.0;
  int best_restart = -1;
  bool success = false;
  RVector x;
  Torsion torsion;
  std::vector<RestartTrace> trace;
  std::optional<BklReport> admissibility;   ///< independent check of the best point
  std::optional<FrameReport> frame;
  std::optional<ClassificationReport> classification;
  std::string post_note;
};

/// Index of T^j_{ik} (i < k) in the parameter layout, in complex units.
inline int param_index(int n, int j, int i, int k) {
  // pairs (i, k) with i < k in lexicographic order
  int pair = i * n - i * (i + 1) / 2 + (k - i - 1);
  return j * (n * (n - 1) / 2) + pair;
}

inline int param_count(int n) { return n * n * (n - 1) / 2; }

inline Torsion torsion_from_params(int n, const RVector& x) {
  if (x.size() != 2 * param_count(n)) throw InputError("parameter vector has the wrong length");
  Torsion t(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        int p = param_index(n, j, i, k);
        t.set(j, i, k, cplx(x(2 * p), x(2 * p + 1)));
      }
  return t;
}

inline RVector params_from_torsion(const Torsion& t) {
  const int n = t.n();
  RVector x(2 * param_count(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        int p = param_index(n, j, i, k);
        x(2 * p) = t(j, i, k).real();
        x(2 * p + 1) = t(j, i, k).imag();
      }
  return x;
}

namespace detail {

/// A torsion slot as (parameter, sign); parameter -1 for the vanishing T^j_{ii}.
struct Slot {
  int p = -1;
  double sign = 0.0;
};

inline Slot slot(int n, int j, int i, int k) {
  if (i == k) return {};
  if (i < k) return {param_index(n, j, i, k), 1.0};
  return {param_index(n, j, k, i), -1.0};
}

/// coef * T_a * T_b, or coef * T_a * conj(T_b) when conj_b.
struct Term {
  cplx coef;
  Slot a, b;
  bool conj_b = true;
};

struct Expr {
  std::vector<Term> terms;
  void add(cplx c, Slot a, Slot b, bool conj_b) {
    if (a.p < 0 || b.p < 0) return;
    terms.push_back({c, a, b, conj_b});
  }
};

inline cplx comp(const RVector& x, int p) { return {x(2 * p), x(2 * p + 1)}; }

inline cplx eval(const Expr& e, const RVector& x) {
  cplx s = 0.0;
  for (const auto& t : e.terms) {
    cplx za = t.a.sign * comp(x, t.a.p);
    cplx zb = t.b.sign * comp(x, t.b.p);
    s += t.coef * za * (t.conj_b ? std::conj(zb) : zb);
  }
  return s;
}

/// Adds d e / d x_m (complex) into grad.
inline void gradient(const Expr& e, const RVector& x, Eigen::VectorXcd& grad) {
  const cplx iu(0.0, 1.0);
  for (const auto& t : e.terms) {
    cplx za = t.a.sign * comp(x, t.a.p);
    cplx zb = t.b.sign * comp(x, t.b.p);
    cplx wb = t.conj_b ? std::conj(zb) : zb;
    cplx ga = t.coef * t.a.sign * wb;
    grad(2 * t.a.p) += ga;
    grad(2 * t.a.p + 1) += ga * iu;
    cplx gb = t.coef * za * t.b.sign;
    grad(2 * t.b.p) += gb;
    grad(2 * t.b.p + 1) += t.conj_b ? gb * (-iu) : gb * iu;
  }
}

} // namespace detail

/// The bilinear tables for one dimension n, built once.
class ResidualModel {
public:
  explicit ResidualModel(SearchConfig cfg) : cfg_(std::move(cfg)), n_(cfg_.n) {
    if (n_ < 2) throw InputError("search dimension must be at least 2");
    if (cfg_.target_rank && (*cfg_.target_rank < 0 || *cfg_.target_rank > n_ - 1))
      throw InputError("target rank must lie in 0..n-1");
    if (cfg_.restarts < 1) throw InputError("restarts must be at least 1");
    build();
  }

  const SearchConfig& config() const { return cfg_; }
  int dim() const { return 2 * param_count(n_); }

  /// Residual families in order: BKL polynomial (Re, Im for every i, j, k, l),
  /// eta-orthogonality (Re, Im for every q and i < k), |T|^2 - 2|eta|^2,
  /// B - phi - phi^* (Re, Im for i <= j), then the optional lambda pin,
  /// rank penalty, rank barrier and fullness barrier.
  RVector residual(const RVector& x) const {
    check(x);
    RVector r(rows());
    Eigen::Index row = 0;
    for (const auto& e : complex_rows_) {
      cplx v = detail::eval(e, x);
      r(row++) = v.real();
      r(row++) = v.imag();
    }
    r(row++) = detail::eval(norm_gap_, x).real();
    for (const auto& e : bphi_) {
      cplx v = detail::eval(e, x);
      r(row++) = v.real();
      r(row++) = v.imag();
    }
    if (cfg_.lambda_target) r(row++) = detail::eval(eta_sq_, x).real() - *cfg_.lambda_target * *cfg_.lambda_target;
    for (const auto& pen : penalties(x)) r(row++) = pen.value;
    return r;
  }

  Eigen::MatrixXd jacobian(const RVector& x) const {
    check(x);
    const Eigen::Index m = dim();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(rows(), m);
    Eigen::VectorXcd g(m);
    Eigen::Index row = 0;
    auto put_complex = [&](const detail::Expr& e) {
      g.setZero();
      detail::gradient(e, x, g);
      j.row(row++) = g.real().transpose();
      j.row(row++) = g.imag().transpose();
    };
    for (const auto& e : complex_rows_) put_complex(e);
    g.setZero();
    detail::gradient(norm_gap_, x, g);
    j.row(row++) = g.real().transpose();
    for (const auto& e : bphi_) put_complex(e);
    if (cfg_.lambda_target) {
      g.setZero();
      detail::gradient(eta_sq_, x, g);
      j.row(row++) = g.real().transpose();
    }
    for (const auto& pen : penalties(x)) j.row(row++) = pen.grad.transpose();
    for (int p : cfg_.clamped) {
      j.col(2 * p).setZero();
      j.col(2 * p + 1).setZero();
    }
    return j;
  }

  /// Central differences with step h; max over entries of |J - J_fd| / max(1, |J_fd|).
  double jacobian_self_check(const RVector& x, double h = 1e-6) const {
    Eigen::MatrixXd ja = jacobian(x);
    double worst = 0.0;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      if (is_clamped(static_cast<int>(c / 2))) continue;
      RVector xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      RVector fd = (residual(xp) - residual(xm)) / (2.0 * h);
      for (Eigen::Index r = 0; r < fd.size(); ++r)
        worst = std::max(worst, std::abs(ja(r, c) - fd(r)) / std::max(1.0, std::abs(fd(r))));
    }
    return worst;
  }

  Eigen::Index rows() const {
    Eigen::Index r = 2 * static_cast<Eigen::Index>(complex_rows_.size()) + 1 + 2 * static_cast<Eigen::Index>(bphi_.size());
    if (cfg_.lambda_target) ++r;
    return r + penalty_count();
  }

  bool is_clamped(int p) const {
    return std::find(cfg_.clamped.begin(), cfg_.clamped.end(), p) != cfg_.clamped.end();
  }

private:
  struct Penalty {
    double value = 0.0;
    RVector grad;
  };

  void check(const RVector& x) const {
    if (x.size() != dim()) throw InputError("parameter vector has the wrong length");
  }

  Eigen::Index penalty_count() const {
    Eigen::Index c = 0;
    if (cfg_.target_rank) {
      if (*cfg_.target_rank < n_) ++c;
      if (*cfg_.target_rank >= 1) ++c;
    }
    if (cfg_.full) ++c;
    return c;
  }

  void build() {
    const int n = n_;
    using detail::slot;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            detail::Expr e;
            for (int q = 0; q < n; ++q) {
              e.add(1.0, slot(n, q, i, k), slot(n, q, j, l), true);
              e.add(1.0, slot(n, j, i, q), slot(n, k, l, q), true);
              e.add(1.0, slot(n, l, k, q), slot(n, i, j, q), true);
              e.add(-1.0, slot(n, l, i, q), slot(n, k, j, q), true);
              e.add(-1.0, slot(n, j, k, q), slot(n, i, l, q), true);
            }
            complex_rows_.push_back(std::move(e));
          }
    // sum_q eta_q T^q_ik with eta_q = sum_m T^m_mq
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        detail::Expr e;
        for (int q = 0; q < n; ++q)
          for (int mm = 0; mm < n; ++mm) e.add(1.0, slot(n, mm, mm, q), slot(n, q, i, k), false);
        complex_rows_.push_back(std::move(e));
      }
    for (int q = 0; q < n; ++q)
      for (int m1 = 0; m1 < n; ++m1)
        for (int m2 = 0; m2 < n; ++m2) eta_sq_.add(1.0, slot(n, m1, m1, q), slot(n, m2, m2, q), true);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) norm_gap_.add(1.0, slot(n, j, i, k), slot(n, j, i, k), true);
    for (const auto& t : eta_sq_.terms) norm_gap_.terms.push_back({-2.0 * t.coef, t.a, t.b, t.conj_b});
    bmat_.assign(static_cast<std::size_t>(n * n), {});
    amat_.assign(static_cast<std::size_t>(n * n), {});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        detail::Expr& b = bmat_[static_cast<std::size_t>(i * n + j)];
        detail::Expr& a = amat_[static_cast<std::size_t>(i * n + j)];
        for (int q = 0; q < n; ++q)
          for (int k = 0; k < n; ++k) {
            b.add(1.0, slot(n, j, q, k), slot(n, i, q, k), true);
            a.add(1.0, slot(n, q, i, k), slot(n, q, j, k), true);
          }
      }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        detail::Expr e = bmat_[static_cast<std::size_t>(i * n + j)];
        for (int q = 0; q < n; ++q)
          for (int mm = 0; mm < n; ++mm) {
            // phi_ij = sum T^j_iq conj(eta_q), phi^*_ij = sum eta_q conj(T^i_jq)
            e.add(-1.0, slot(n, j, i, q), slot(n, mm, mm, q), true);
            e.add(-1.0, slot(n, mm, mm, q), slot(n, i, j, q), true);
          }
        bphi_.push_back(std::move(e));
      }
  }

  /// Hermitian matrix and its per-parameter derivatives from entry tables.
  CMatrix matrix_of(const std::vector<detail::Expr>& tab, const RVector& x) const {
    CMatrix m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = detail::eval(tab[static_cast<std::size_t>(i * n_ + j)], x);
    return m;
  }

  /// Gradient of the mean of eigenvalues in `cluster` (eigenvectors v): the
  /// tie rule averages over eigenvalues that coincide within 1e-9.
  RVector eigen_gradient(const std::vector<detail::Expr>& tab, const RVector& x, const CMatrix& vecs,
                         const std::vector<int>& cluster) const {
    RVector grad = RVector::Zero(dim());
    Eigen::VectorXcd g(dim());
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        cplx w = 0.0;
        for (int c : cluster) w += std::conj(vecs(i, c)) * vecs(j, c);
        w /= static_cast<double>(cluster.size());
        if (std::abs(w) == 0.0) continue;
        g.setZero();
        detail::gradient(tab[static_cast<std::size_t>(i * n_ + j)], x, g);
        grad += (w * g).real();
      }
    return grad;
  }

  /// Eigenvalue at ascending position `pos` and its (tie-averaged) gradient.
  std::pair<double, RVector> eigen_with_gradient(const std::vector<detail::Expr>& tab, const RVector& x,
                                                 int pos) const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_of(tab, x));
    const RVector& ev = es.eigenvalues();
    std::vector<int> cluster;
    for (int c = 0; c < n_; ++c)
      if (std::abs(ev(c) - ev(pos)) <= 1e-9) cluster.push_back(c);
    return {ev(pos), eigen_gradient(tab, x, es.eigenvectors(), cluster)};
  }

  std::vector<Penalty> penalties(const RVector& x) const {
    std::vector<Penalty> out;
    const double delta = cfg_.barrier;
    if (cfg_.target_rank) {
      const int r = *cfg_.target_rank;
      // descending position r (the (r+1)-th largest) is ascending n-1-r
      if (r < n_) {
        auto [v, g] = eigen_with_gradient(bmat_, x, n_ - 1 - r);
        out.push_back({v, g});
      }
      if (r >= 1) {
        auto [v, g] = eigen_with_gradient(bmat_, x, n_ - r);
        if (v < delta) out.push_back({delta - v, -g});
        else out.push_back({0.0, RVector::Zero(dim())});
      }
    }
    if (cfg_.full) {
      auto [v, g] = eigen_with_gradient(amat_, x, 0);
      if (v < delta) out.push_back({delta - v, -g});
      else out.push_back({0.0, RVector::Zero(dim())});
    }
    return out;
  }

  SearchConfig cfg_;
  int n_;
  std::vector<detail::Expr> complex_rows_;
  detail::Expr eta_sq_, norm_gap_;
  std::vector<detail::Expr> bmat_, amat_, bphi_;
};

struct DescentResult {
  RVector x;
  double residual = 0.0;
  int iterations = 0;
};

/// Levenberg iteration: (J^T J + mu I) dx = -J^T r, accepted when |r| drops.
inline DescentResult descend(const ResidualModel& model, RVector x) {
  const SearchConfig& cfg = model.config();
  for (int p : cfg.clamped) x(2 * p) = x(2 * p + 1) = 0.0;
  RVector r = model.residual(x);
  double cost = r.norm();
  double mu = cfg.damping_init;
  int it = 0;
  int stalls = 0;
  while (it < cfg.max_iters && cost >= cfg.stop_tol) {
    ++it;
    Eigen::MatrixXd j = model.jacobian(x);
    Eigen::MatrixXd h = j.transpose() * j;
    RVector g = j.transpose() * r;
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd hm = h;
      hm.diagonal().array() += mu;
      RVector dx = -hm.ldlt().solve(g);
      RVector xn = x + dx;
      for (int p : cfg.clamped) xn(2 * p) = xn(2 * p + 1) = 0.0;
      RVector rn = model.residual(xn);
      double cn = rn.norm();
      if (std::isfinite(cn) && cn < cost) {
        x = std::move(xn);
        r = std::move(rn);
        cost = cn;
        mu = std::max(cfg.damping_min, mu / cfg.damping_down);
        accepted = true;
        stalls = 0;
      } else {
        if (mu >= cfg.damping_max) break;
        mu = std::min(cfg.damping_max, mu * cfg.damping_up);
      }
    }
    // at maximal damping with no decrease the point is stationary for this schedule
    if (!accepted && ++stalls >= 3) break;
  }
  return {x, cost, it};
}

/// Starting point for a restart: `start` plus jitter, or a Gaussian scaled to |T|^2 = 2.
inline RVector initial_point(const ResidualModel& model, int restart) {
  const SearchConfig& cfg = model.config();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector x(model.dim());
  if (cfg.start) {
    if (cfg.start->size() != x.size()) throw InputError("start point has the wrong length");
    for (Eigen::Index c = 0; c < x.size(); ++c) x(c) = (*cfg.start)(c) + cfg.start_jitter * normal(rng);
    return x;
  }
  for (Eigen::Index c = 0; c < x.size(); ++c) x(c) = normal(rng);
  for (int p : cfg.clamped) x(2 * p) = x(2 * p + 1) = 0.0;
  double nt = derived_tensors(torsion_from_params(cfg.n, x)).normT2;
  if (nt > 0.0) x *= std::sqrt(2.0 / nt);
  return x;
}

inline SearchResult search(const SearchConfig& cfg) {
  ResidualModel model(cfg);
  std::vector<DescentResult> runs(static_cast<std::size_t>(cfg.restarts));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next.fetch_add(1); k < cfg.restarts; k = next.fetch_add(1))
      runs[static_cast<std::size_t>(k)] = descend(model, initial_point(model, k));
  };
  const int threads = std::max(1, std::min(cfg.threads, cfg.restarts));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SearchResult res;
  for (int k = 0; k < cfg.restarts; ++k) {
    const auto& run = runs[static_cast<std::size_t>(k)];
    res.trace.push_back({k, run.iterations, run.residual, run.residual < cfg.residual_tol});
    if (res.best_restart < 0 || run.residual < res.best_residual) {
      res.best_restart = k;
      res.best_residual = run.residual;
    }
  }
  res.x = runs[static_cast<std::size_t>(res.best_restart)].x;
  res.success = res.best_residual < cfg.residual_tol;
  res.torsion = torsion_from_params(cfg.n, res.x);

  // the checker, not the solver's residual, decides admissibility
  BklReport chk = is_bkl_admissible(res.torsion);
  res.admissibility = chk;
  if (chk.admissible) {
    try {
      res.classification = classify_point(res.torsion, FrameOptions{default_tol, default_tol_rank, cfg.seed});
      res.frame = res.classification->frame;
    } catch (const Error& e) {
      res.post_note = std::string("post-processing failed: ") + e.what();
    }
  } else {
    res.post_note = "best point is not admissible at the default tolerance";
  }
  return res;
}

} // namespace bklkit
