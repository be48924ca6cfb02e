#pragma once

// Constant linear change of 1-form generators. New generators are given as
// field-linear combinations of old ones; the old generators in their support
// are retired and every structure equation is rewritten in the new basis.

#include <set>
#include <tuple>

#include "bklkit/exact/form.hpp"

namespace bklkit::exact {

struct NewGenerator {
  std::string name;
  std::string conj_name; ///< equal to name for a real generator
  GenType type = GenType::holo;
  std::vector<std::pair<std::string, Number>> combination; ///< old generator name and coefficient
};

struct RebaseResult {
  FormModel model;
  std::vector<Form> images; ///< images[g] expresses old generator g in the new model

  Form pull(const Form& old_form) const { return FormModel::substitute(old_form, images, model); }
};

using NumberMatrix = std::vector<std::vector<Number>>;

/// Exact inverse by Gauss-Jordan elimination; throws InputError if singular.
inline NumberMatrix invert(NumberMatrix a) {
  const std::size_t n = a.size();
  NumberMatrix inv(n, std::vector<Number>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw InputError("matrix is not square");
    inv[i][i] = Number(1);
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col].is_zero()) ++piv;
    if (piv == n) throw InputError("matrix is singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Number p = a[col][col].inverse();
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] *= p;
      inv[col][k] *= p;
    }
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col].is_zero()) continue;
      Number f = a[row][col];
      for (std::size_t k = 0; k < n; ++k) {
        a[row][k] -= f * a[col][k];
        inv[row][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

/// Rebases `old` (finalized). Conjugate partners of new complex generators are
/// created automatically from the conjugated combination. The support (old
/// generators used, closed under conjugation) must have exactly as many members
/// as there are new generators including partners, and the change must be invertible.
inline RebaseResult rebase(const FormModel& old, const std::vector<NewGenerator>& fresh) {
  if (!old.finalized()) throw InputError("rebase requires a finalized model");

  struct Row {
    std::string name;
    std::map<GenId, Number> coeffs;
  };
  std::vector<Row> rows;
  std::vector<std::tuple<std::string, std::string, GenType>> decls;
  std::set<GenId> support;
  for (const auto& ng : fresh) {
    Row r{ng.name, {}};
    for (const auto& [gname, c] : ng.combination) {
      GenId g = old.id_of(gname);
      r.coeffs[g] += c;
      support.insert(g);
      support.insert(old.generator(g).conj);
    }
    std::erase_if(r.coeffs, [](const auto& kv) { return kv.second.is_zero(); });
    if (ng.name == ng.conj_name) {
      // real generator: the combination must be self-conjugate
      std::map<GenId, Number> cc;
      for (const auto& [g, c] : r.coeffs) cc[old.generator(g).conj] += c.conj();
      if (!(cc == r.coeffs)) throw InputError("combination for real generator '" + ng.name + "' is not real");
      rows.push_back(std::move(r));
      decls.emplace_back(ng.name, ng.name, GenType::untyped);
    } else {
      Row rc{ng.conj_name, {}};
      for (const auto& [g, c] : r.coeffs) rc.coeffs[old.generator(g).conj] += c.conj();
      rows.push_back(std::move(r));
      rows.push_back(std::move(rc));
      decls.emplace_back(ng.name, ng.conj_name, ng.type);
    }
  }
  if (rows.size() != support.size())
    throw InputError("rebase needs " + std::to_string(support.size()) + " new generators (with partners), got " +
                     std::to_string(rows.size()));

  std::vector<GenId> sup(support.begin(), support.end());
  std::map<GenId, std::size_t> col_of;
  for (std::size_t k = 0; k < sup.size(); ++k) col_of[sup[k]] = k;
  NumberMatrix m(rows.size(), std::vector<Number>(sup.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [g, c] : rows[i].coeffs) m[i][col_of.at(g)] = c;
  NumberMatrix minv = invert(m); // old_support = minv * new

  RebaseResult res;
  FormModel& nm = res.model;
  std::vector<GenId> kept_new(old.size(), -1);
  for (GenId g = 0; g < static_cast<GenId>(old.size()); ++g) {
    if (support.count(g) || kept_new[static_cast<std::size_t>(g)] >= 0) continue;
    const auto& gen = old.generator(g);
    if (gen.conj == g) {
      kept_new[static_cast<std::size_t>(g)] = nm.add_real(gen.name);
    } else {
      GenId a = nm.add_pair(gen.name, old.generator(gen.conj).name, gen.type);
      kept_new[static_cast<std::size_t>(g)] = a;
      kept_new[static_cast<std::size_t>(gen.conj)] = nm.generator(a).conj;
    }
  }
  std::vector<GenId> new_ids;
  for (const auto& [name, cname, type] : decls) {
    if (name == cname) {
      new_ids.push_back(nm.add_real(name));
    } else {
      GenId a = nm.add_pair(name, cname, type);
      new_ids.push_back(a);
      new_ids.push_back(nm.generator(a).conj);
    }
  }
  // rows[i] corresponds to new_ids[i] by construction order

  res.images.assign(old.size(), nm.zero());
  for (GenId g = 0; g < static_cast<GenId>(old.size()); ++g) {
    if (kept_new[static_cast<std::size_t>(g)] >= 0) {
      res.images[static_cast<std::size_t>(g)] = nm.gen(kept_new[static_cast<std::size_t>(g)]);
    }
  }
  for (std::size_t k = 0; k < sup.size(); ++k) {
    Form img = nm.zero();
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!minv[k][i].is_zero()) img += Scalar(minv[k][i]) * nm.gen(new_ids[i]);
    res.images[static_cast<std::size_t>(sup[k])] = img;
  }

  for (GenId g = 0; g < static_cast<GenId>(old.size()); ++g) {
    GenId ng = kept_new[static_cast<std::size_t>(g)];
    if (ng >= 0) nm.set_d(ng, res.pull(*old.structure(g)));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Form dnew = old.zero();
    for (const auto& [g, c] : rows[i].coeffs) dnew += Scalar(c) * *old.structure(g);
    nm.set_d(new_ids[i], res.pull(dnew));
  }
  nm.finalize();
  return res;
}

} // namespace bklkit::exact
