#pragma once

// Exact FormModels of the twisted product of surfaces, the multiple product of
// Sasakian 3-manifolds, and the eta-scaling of a model along one coframe member.
//
// The connection 1-form of each factor enters as alpha_i = vt_i - conj(vt_i)
// with vt_i an abstract (1,0) generator and d vt_i = (kappa_i / 2) phi_i ^ conj(phi_i),
// so that d alpha_i = kappa_i phi_i ^ conj(phi_i) and alpha_i is imaginary.

#include "bklkit/exact/rebase.hpp"
#include "bklkit/exact/structure.hpp"

namespace bklkit::exact {

struct CoframedModel {
  FormModel model;
  std::vector<GenId> coframe;
};

inline std::string indexed(const std::string& stem, std::size_t i) { return stem + std::to_string(i + 1); }

/// Real symbol such as lambda1, kappa2, c3.
inline Scalar real_symbol(const std::string& name) { return Scalar::symbol(SymbolTable::instance().declare_real(name)); }

/// Twisted product of r surfaces: before twisting, each factor has
///   d phi1 = (-alpha + 2 lambda (phi2 - conj phi2)) ^ phi1,  d phi2 = -2 lambda phi1 ^ conj(phi1);
/// the coframe is (phi1_1..phi1_r, psi_1..psi_r) with psi_i = sum_j d_ij phi2_j.
inline CoframedModel twisted_product_model(const NumberMatrix& d) {
  const std::size_t r = d.size();
  if (r == 0) throw InputError("twisted product needs at least one factor");
  FormModel m;
  std::vector<GenId> p1(r), p2(r), vt(r);
  for (std::size_t i = 0; i < r; ++i) {
    p1[i] = m.add_pair(indexed("phi", i), indexed("phib", i), GenType::holo);
    p2[i] = m.add_pair(indexed("chi", i), indexed("chib", i), GenType::holo);
    vt[i] = m.add_pair(indexed("vt", i), indexed("vtb", i), GenType::holo);
  }
  for (std::size_t i = 0; i < r; ++i) {
    Scalar lambda = real_symbol(indexed("lambda", i));
    Scalar kappa = real_symbol(indexed("kappa", i));
    Form phi = m.gen(p1[i]);
    Form phib = m.conj(phi);
    Form chi = m.gen(p2[i]);
    Form alpha = m.gen(vt[i]) - m.conj(m.gen(vt[i]));
    Form xi = -alpha + (Scalar(2) * lambda) * (chi - m.conj(chi));
    m.set_d(p1[i], wedge(xi, phi));
    m.set_d(p2[i], (Scalar(-2) * lambda) * wedge(phi, phib));
    m.set_d(vt[i], (kappa / Scalar(2)) * wedge(phi, phib));
  }
  m.finalize();

  std::vector<NewGenerator> fresh;
  for (std::size_t i = 0; i < r; ++i) {
    if (d[i].size() != r) throw InputError("twist matrix must be square");
    NewGenerator g{indexed("psi", i), indexed("psib", i), GenType::holo, {}};
    for (std::size_t j = 0; j < r; ++j)
      if (!d[i][j].is_zero()) g.combination.emplace_back(indexed("chi", j), d[i][j]);
    fresh.push_back(std::move(g));
  }
  RebaseResult rb = rebase(m, fresh);
  CoframedModel out{std::move(rb.model), {}};
  for (std::size_t i = 0; i < r; ++i) out.coframe.push_back(out.model.id_of(indexed("phi", i)));
  for (std::size_t i = 0; i < r; ++i) out.coframe.push_back(out.model.id_of(indexed("psi", i)));
  return out;
}

/// Multiple product of r Sasakian 3-manifolds with R^s. Each factor has
///   d rho = 2 c i phi ^ conj(phi),  d phi = alpha ^ phi + c i rho ^ phi
/// with rho the dual of the Reeb field; the flat directions x_j are closed.
/// The coframe is (phi_1..phi_r, phit_1..phit_m) with
///   phit_a = (1/sqrt2) sum_k (p_{a k} + i p_{a* k}) rho_k,  a* = m + a,
/// where rho_k runs over (rho_1..rho_r, x_1..x_s).
inline CoframedModel sasakian_product_model(std::size_t r, std::size_t s, const NumberMatrix& p) {
  const std::size_t two_m = r + s;
  if (two_m == 0 || two_m % 2 != 0) throw InputError("r + s must be positive and even");
  if (p.size() != two_m) throw InputError("P must be (r+s) x (r+s)");
  const std::size_t mm = two_m / 2;
  FormModel m;
  std::vector<GenId> rho(two_m), phi(r), vt(r);
  for (std::size_t k = 0; k < r; ++k) rho[k] = m.add_real(indexed("rho", k));
  for (std::size_t j = 0; j < s; ++j) rho[r + j] = m.add_real(indexed("x", j));
  for (std::size_t i = 0; i < r; ++i) {
    phi[i] = m.add_pair(indexed("phi", i), indexed("phib", i), GenType::holo);
    vt[i] = m.add_pair(indexed("vt", i), indexed("vtb", i), GenType::holo);
  }
  const Scalar I(Number::i());
  for (std::size_t i = 0; i < r; ++i) {
    Scalar c = real_symbol(indexed("c", i));
    Scalar kappa = real_symbol(indexed("kappa", i));
    Form f = m.gen(phi[i]);
    Form fb = m.conj(f);
    Form alpha = m.gen(vt[i]) - m.conj(m.gen(vt[i]));
    m.set_d(rho[i], (Scalar(2) * c * I) * wedge(f, fb));
    m.set_d(phi[i], wedge(alpha, f) + (c * I) * wedge(m.gen(rho[i]), f));
    m.set_d(vt[i], (kappa / Scalar(2)) * wedge(f, fb));
  }
  for (std::size_t j = 0; j < s; ++j) m.set_d(rho[r + j], m.zero());
  m.finalize();

  const Number inv_sqrt2 = Number::sqrt2().inverse();
  std::vector<NewGenerator> fresh;
  for (std::size_t a = 0; a < mm; ++a) {
    NewGenerator g{indexed("phit", a), indexed("phitb", a), GenType::holo, {}};
    for (std::size_t k = 0; k < two_m; ++k) {
      if (p[a].size() != two_m || p[mm + a].size() != two_m) throw InputError("P must be square");
      Number coef = inv_sqrt2 * (p[a][k] + Number::i() * p[mm + a][k]);
      if (!coef.is_zero()) g.combination.emplace_back(m.generator(rho[k]).name, coef);
    }
    fresh.push_back(std::move(g));
  }
  RebaseResult rb = rebase(m, fresh);
  CoframedModel out{std::move(rb.model), {}};
  for (std::size_t i = 0; i < r; ++i) out.coframe.push_back(out.model.id_of(indexed("phi", i)));
  for (std::size_t a = 0; a < mm; ++a) out.coframe.push_back(out.model.id_of(indexed("phit", a)));
  return out;
}

/// eta-scaling: replaces coframe member `which` by t times itself (t a nonzero
/// field element); the images map the base model into the scaled one.
struct ScaledModel {
  CoframedModel scaled;
  RebaseResult map; ///< map.model is the scaled model; pull() transports base forms
};

inline ScaledModel eta_scaled_model(const CoframedModel& base, std::size_t which, const Number& t) {
  if (which >= base.coframe.size()) throw InputError("coframe index out of range");
  if (t.is_zero()) throw InputError("scale must be nonzero");
  const auto& g = base.model.generator(base.coframe[which]);
  std::string name = g.name + "s";
  std::string cname = base.model.generator(g.conj).name + "s";
  RebaseResult rb = rebase(base.model, {NewGenerator{name, cname, GenType::holo, {{g.name, t}}}});
  ScaledModel out{{rb.model, {}}, rb};
  for (std::size_t k = 0; k < base.coframe.size(); ++k) {
    const std::string& nm = k == which ? name : base.model.generator(base.coframe[k]).name;
    out.scaled.coframe.push_back(out.scaled.model.id_of(nm));
  }
  return out;
}

} // namespace bklkit::exact
