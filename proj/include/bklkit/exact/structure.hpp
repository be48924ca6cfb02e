#pragma once

// Chern and Bismut connections of a unitary coframe inside a FormModel.
// Conventions: d(phi) = -theta^t ^ phi + tau, tau^i = sum_{a<b} 2 T^i_{ab} phi_a ^ phi_b,
// gamma_ij = sum_k (T^j_ik phi_k - conj(T^i_jk) conj(phi_k)), theta^b = theta^c + 2 gamma,
// Theta = d theta - theta ^ theta.

#include "bklkit/exact/form.hpp"

namespace bklkit::exact {

/// T[j][i][k] = T^j_{ik}.
using ScalarTensor = std::vector<std::vector<std::vector<Scalar>>>;

struct HermitianData {
  std::vector<GenId> coframe;
  FormMatrix theta_c;
  ScalarTensor torsion;
  FormMatrix gamma;
  FormMatrix theta_b;
  FormMatrix curvature_b;
};

inline FormMatrix form_matrix(const FormModel& m, std::size_t n) {
  return FormMatrix(n, std::vector<Form>(n, m.zero()));
}

/// Theta_ij = d theta_ij - sum_k theta_ik ^ theta_kj.
inline FormMatrix connection_curvature(const FormModel& m, const FormMatrix& theta) {
  const std::size_t n = theta.size();
  for (const auto& row : theta)
    if (row.size() != n) throw InputError("connection matrix must be square");
  FormMatrix out = form_matrix(m, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Form v = m.d(theta[i][j]);
      for (std::size_t k = 0; k < n; ++k) v -= wedge(theta[i][k], theta[k][j]);
      out[i][j] = v;
    }
  return out;
}

/// Extracts theta^c and T from the structure equations of a (1,0) coframe.
/// Throws CheckFailure when d(phi) has a (0,2) part (J not integrable) or when
/// d(phi) cannot be written in the required shape over the coframe.
inline HermitianData hermitian_data(const FormModel& m, const std::vector<GenId>& coframe) {
  const std::size_t n = coframe.size();
  std::map<GenId, std::size_t> pos;
  for (std::size_t a = 0; a < n; ++a) {
    if (m.generator(coframe[a]).type != GenType::holo)
      throw InputError("coframe member '" + m.generator(coframe[a]).name + "' is not of type (1,0)");
    if (!pos.emplace(coframe[a], a).second) throw InputError("repeated coframe member");
  }

  HermitianData h;
  h.coframe = coframe;
  FormMatrix theta_pp = form_matrix(m, n); // theta''
  std::vector<Form> dphi;
  for (std::size_t i = 0; i < n; ++i) {
    const Form& dp = *m.structure(coframe[i]);
    dphi.push_back(dp);
    auto parts = m.type_decomposition(dp);
    if (auto it = parts.find({0, 2}); it != parts.end() && !it->second.is_zero())
      throw CheckFailure("d(" + m.generator(coframe[i]).name + ") has a (0,2) part: " + m.str(it->second));
    auto it = parts.find({1, 1});
    if (it == parts.end()) continue;
    for (const auto& [mono, c] : it->second.terms()) {
      // mono = {u, v}; rewrite c*mono as h ^ phi_j with h of type (0,1)
      bool first_holo = m.generator(mono[0]).type == GenType::holo;
      GenId u = first_holo ? mono[0] : mono[1];
      GenId v = first_holo ? mono[1] : mono[0];
      auto pj = pos.find(u);
      if (pj == pos.end())
        throw CheckFailure("(1,1) part of d(" + m.generator(coframe[i]).name + ") involves '" +
                           m.generator(u).name + "', which is not in the coframe");
      Scalar hc = first_holo ? -c : c;
      // (d phi_i)^{1,1} = -sum_j theta''_ji ^ phi_j
      theta_pp[pj->second][i] -= hc * m.gen(v);
    }
  }

  h.theta_c = form_matrix(m, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h.theta_c[i][j] = theta_pp[i][j] - m.conj(theta_pp[j][i]);

  h.torsion.assign(n, std::vector<std::vector<Scalar>>(n, std::vector<Scalar>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    Form tau = m.type_part(dphi[i], 2, 0);
    for (std::size_t j = 0; j < n; ++j) tau -= wedge(m.conj(theta_pp[i][j]), m.gen(coframe[j]));
    for (const auto& [mono, c] : tau.terms()) {
      auto pa = pos.find(mono[0]);
      auto pb = pos.find(mono[1]);
      if (pa == pos.end() || pb == pos.end())
        throw CheckFailure("torsion of '" + m.generator(coframe[i]).name + "' is not a form in the coframe: " +
                           m.str(tau));
      Scalar half = c / Scalar(2);
      h.torsion[i][pa->second][pb->second] = half;
      h.torsion[i][pb->second][pa->second] = -half;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    Form rebuilt = m.zero();
    for (std::size_t j = 0; j < n; ++j) rebuilt -= wedge(h.theta_c[j][i], m.gen(coframe[j]));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (!h.torsion[i][a][b].is_zero())
          rebuilt += (Scalar(2) * h.torsion[i][a][b]) * wedge(m.gen(coframe[a]), m.gen(coframe[b]));
    if (!(rebuilt == dphi[i]))
      throw CheckFailure("d(" + m.generator(coframe[i]).name + ") is not of the form -theta^t ^ phi + tau");
  }

  h.gamma = form_matrix(m, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const Scalar& t1 = h.torsion[j][i][k];
        Scalar t2 = h.torsion[i][j][k].conj();
        if (!t1.is_zero()) h.gamma[i][j] += t1 * m.gen(coframe[k]);
        if (!t2.is_zero()) h.gamma[i][j] -= t2 * m.conj(m.gen(coframe[k]));
      }

  h.theta_b = form_matrix(m, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h.theta_b[i][j] = h.theta_c[i][j] + Scalar(2) * h.gamma[i][j];
  h.curvature_b = connection_curvature(m, h.theta_b);
  return h;
}

/// Residuals R_j = sum_i phi_i ^ Theta_ij; the condition holds iff all vanish.
struct BklCondition {
  bool holds = true;
  std::vector<Form> residual;
};

inline BklCondition bkl_condition(const FormModel& m, const std::vector<Form>& coframe, const FormMatrix& theta) {
  const std::size_t n = coframe.size();
  if (theta.size() != n) throw InputError("curvature matrix size does not match coframe");
  BklCondition out;
  for (std::size_t j = 0; j < n; ++j) {
    Form r = m.zero();
    for (std::size_t i = 0; i < n; ++i) r += wedge(coframe[i], theta[i][j]);
    out.holds = out.holds && r.is_zero();
    out.residual.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Form> coframe_forms(const FormModel& m, const std::vector<GenId>& coframe) {
  std::vector<Form> out;
  for (GenId g : coframe) out.push_back(m.gen(g));
  return out;
}

/// Coefficient of phi_a ^ conj(phi_a) in a form, with the sign of the sorted monomial absorbed.
inline Scalar coefficient_of_pair(const FormModel& m, const Form& f, GenId a) {
  GenId b = m.generator(a).conj;
  if (a < b) return f.coefficient({a, b});
  return -f.coefficient({b, a});
}

struct RicciAnalysis {
  Form trace;
  bool normal_form = false;     ///< off-diagonal zero, each diagonal entry a multiple of phi_i ^ conj(phi_i)
  std::vector<Scalar> diagonal; ///< the multiples, when in normal form
  bool cyt_implies_flat = false;
  std::string reason;
};

/// First Bismut Ricci form and the trace argument: in normal form the monomials
/// phi_i ^ conj(phi_i) are independent, so a vanishing trace forces every entry to vanish.
inline RicciAnalysis bismut_ricci(const FormModel& m, const std::vector<GenId>& coframe, const FormMatrix& theta) {
  const std::size_t n = coframe.size();
  RicciAnalysis out;
  out.trace = m.zero();
  for (std::size_t i = 0; i < n; ++i) out.trace += theta[i][i];
  out.normal_form = true;
  for (std::size_t i = 0; i < n && out.normal_form; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!theta[i][j].is_zero()) {
        out.normal_form = false;
        out.reason = "off-diagonal curvature entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") is nonzero";
        break;
      }
    }
  if (out.normal_form) {
    for (std::size_t i = 0; i < n; ++i) {
      Scalar k = coefficient_of_pair(m, theta[i][i], coframe[i]);
      Form expected = k * wedge(m.gen(coframe[i]), m.conj(m.gen(coframe[i])));
      if (!(expected == theta[i][i])) {
        out.normal_form = false;
        out.reason = "diagonal entry " + std::to_string(i + 1) + " is not a multiple of phi ^ conj(phi)";
        out.diagonal.clear();
        break;
      }
      out.diagonal.push_back(k);
    }
  }
  // distinct coframe members give distinct monomials, so the implication is
  // exactly the normal-form property
  out.cyt_implies_flat = out.normal_form;
  return out;
}

} // namespace bklkit::exact
