#pragma once

// Exterior algebra over a finite set of degree-1 generators with exact Scalar
// coefficients, plus models that attach a structure equation d(g) to every
// generator.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bklkit/exact/scalar.hpp"

namespace bklkit::exact {

using GenId = int;

/// Strictly increasing list of generator ids.
using Monomial = std::vector<GenId>;

enum class GenType {
  untyped, ///< real or not tagged; forbidden in type decomposition
  holo,    ///< type (1,0)
  antiholo ///< type (0,1)
};

inline const char* to_string(GenType t) {
  switch (t) {
  case GenType::holo: return "(1,0)";
  case GenType::antiholo: return "(0,1)";
  default: return "untyped";
  }
}

/// Wedge product of two monomials: 0 when they share a generator, else the
/// merged monomial and the sign of the sorting permutation.
inline int wedge_monomials(const Monomial& a, const Monomial& b, Monomial& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  long inversions = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return 0;
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else {
      // b[j] jumps over the remaining a's
      inversions += static_cast<long>(a.size() - i);
      out.push_back(b[j++]);
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return (inversions % 2 == 0) ? 1 : -1;
}

/// Sorts an arbitrary generator sequence; returns the permutation sign or 0 on repeats.
inline int normalize_monomial(Monomial& m) {
  int sign = 1;
  for (std::size_t i = 1; i < m.size(); ++i)
    for (std::size_t j = i; j > 0 && m[j - 1] >= m[j]; --j) {
      if (m[j - 1] == m[j]) return 0;
      std::swap(m[j - 1], m[j]);
      sign = -sign;
    }
  return sign;
}

class Form {
public:
  Form() = default;
  explicit Form(std::uint64_t model) : model_(model) {}

  static Form scalar(std::uint64_t model, const Scalar& s) {
    Form f(model);
    f.add_term({}, s);
    return f;
  }
  static Form generator(std::uint64_t model, GenId g) {
    Form f(model);
    f.add_term({g}, Scalar(1));
    return f;
  }

  std::uint64_t model() const { return model_; }
  const std::map<Monomial, Scalar>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Degree of a homogeneous form; -1 for zero, throws when mixed.
  int degree() const {
    int deg = -1;
    for (const auto& [m, c] : terms_) {
      int d = static_cast<int>(m.size());
      if (deg >= 0 && d != deg) throw InputError("form is not homogeneous");
      deg = d;
    }
    return deg;
  }

  Scalar coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Scalar() : it->second;
  }

  void add_term(const Monomial& m, const Scalar& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Form operator-() const {
    Form r(model_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }
  Form& operator+=(const Form& o) {
    adopt(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Form& operator-=(const Form& o) {
    adopt(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(const Scalar& s, const Form& f) {
    Form r(f.model_);
    if (s.is_zero()) return r;
    for (const auto& [m, c] : f.terms_) r.add_term(m, s * c);
    return r;
  }

  /// Graded-commutative product.
  friend Form wedge(const Form& a, const Form& b) {
    Form r(a.model_ ? a.model_ : b.model_);
    r.adopt(a);
    r.adopt(b);
    Monomial m;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        int sign = wedge_monomials(ma, mb, m);
        if (sign == 0) continue;
        Scalar c = ca * cb;
        r.add_term(m, sign > 0 ? c : -c);
      }
    return r;
  }
  friend Form operator^(const Form& a, const Form& b) { return wedge(a, b); }

  friend bool operator==(const Form& a, const Form& b) { return a.terms_ == b.terms_; }

private:
  void adopt(const Form& o) {
    if (o.model_ == 0) return;
    if (model_ == 0) {
      model_ = o.model_;
    } else if (model_ != o.model_) {
      throw InputError("forms from different models cannot be combined");
    }
  }

  std::uint64_t model_ = 0;
  std::map<Monomial, Scalar> terms_;
};

using FormMatrix = std::vector<std::vector<Form>>;

struct Generator {
  std::string name;
  GenType type = GenType::untyped;
  GenId conj = -1;
};

/// A finitely generated exterior algebra with structure equations. Build with
/// add_* and set_d, then finalize(); forms may only be differentiated after
/// finalize() succeeded.
class FormModel {
public:
  FormModel() : id_(next_id()) {}

  std::uint64_t id() const { return id_; }
  std::size_t size() const { return gens_.size(); }
  const Generator& generator(GenId g) const { return gens_.at(static_cast<std::size_t>(g)); }
  const std::vector<Generator>& generators() const { return gens_; }
  bool finalized() const { return finalized_; }

  bool has(const std::string& name) const { return by_name_.count(name) != 0; }
  GenId id_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw InputError("unknown generator '" + name + "'");
    return it->second;
  }

  /// Adds a self-conjugate generator (a real 1-form).
  GenId add_real(const std::string& name) {
    GenId g = push(name, GenType::untyped);
    gens_[static_cast<std::size_t>(g)].conj = g;
    return g;
  }

  /// Adds a conjugate pair; `type` tags `name`, the partner gets the opposite tag.
  GenId add_pair(const std::string& name, const std::string& conj_name, GenType type) {
    if (name == conj_name) throw InputError("generator '" + name + "' cannot be its own complex partner");
    GenType other = type == GenType::holo ? GenType::antiholo
                    : type == GenType::antiholo ? GenType::holo
                                                : GenType::untyped;
    GenId a = push(name, type);
    GenId b = push(conj_name, other);
    gens_[static_cast<std::size_t>(a)].conj = b;
    gens_[static_cast<std::size_t>(b)].conj = a;
    return a;
  }

  Form gen(GenId g) const {
    check_gen(g);
    return Form::generator(id_, g);
  }
  Form gen(const std::string& name) const { return gen(id_of(name)); }
  Form scalar(const Scalar& s) const { return Form::scalar(id_, s); }
  Form zero() const { return Form(id_); }

  /// Declares d(g); the conjugate generator receives conj(d g) unless set explicitly.
  void set_d(GenId g, const Form& dg) {
    check_gen(g);
    if (finalized_) throw InputError("model already finalized");
    if (dg.model() != 0 && dg.model() != id_) throw InputError("structure equation from a different model");
    if (!dg.is_zero() && dg.degree() != 2) throw InputError("d(" + gens_[static_cast<std::size_t>(g)].name + ") must be a 2-form");
    d_[static_cast<std::size_t>(g)] = dg;
  }
  void set_d(const std::string& name, const Form& dg) { set_d(id_of(name), dg); }

  const std::optional<Form>& structure(GenId g) const { return d_.at(static_cast<std::size_t>(g)); }

  /// Fills missing conjugate equations, then checks d(conj g) = conj(d g) and
  /// d(d g) = 0 for every generator. Throws InputError naming the first failure.
  void finalize() {
    for (std::size_t g = 0; g < gens_.size(); ++g) {
      auto c = static_cast<std::size_t>(gens_[g].conj);
      if (!d_[g] && d_[c]) d_[g] = conj(*d_[c]);
    }
    for (std::size_t g = 0; g < gens_.size(); ++g)
      if (!d_[g]) throw InputError("generator '" + gens_[g].name + "' has no structure equation");
    finalized_ = true;
    for (std::size_t g = 0; g < gens_.size(); ++g) {
      auto c = static_cast<std::size_t>(gens_[g].conj);
      if (!(conj(*d_[g]) == *d_[c])) {
        finalized_ = false;
        throw InputError("structure equations violate d(conj " + gens_[g].name + ") = conj(d " + gens_[g].name + ")");
      }
      if (!d(*d_[g]).is_zero()) {
        finalized_ = false;
        throw InputError("structure equations violate d^2 = 0 on '" + gens_[g].name + "'");
      }
    }
  }

  /// Exterior derivative by the Leibniz rule; scalars are constants.
  Form d(const Form& f) const {
    if (!finalized_) throw InputError("model must be finalized before differentiating");
    check_same(f);
    Form r(id_);
    Monomial left, right, tmp;
    for (const auto& [m, c] : f.terms()) {
      for (std::size_t p = 0; p < m.size(); ++p) {
        const Form& dg = *d_[static_cast<std::size_t>(m[p])];
        left.assign(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(p));
        right.assign(m.begin() + static_cast<std::ptrdiff_t>(p) + 1, m.end());
        Scalar sc = (p % 2 == 0) ? c : -c;
        for (const auto& [md, cd] : dg.terms()) {
          int s1 = wedge_monomials(left, md, tmp);
          if (s1 == 0) continue;
          Monomial full;
          int s2 = wedge_monomials(tmp, right, full);
          if (s2 == 0) continue;
          Scalar term = sc * cd;
          r.add_term(full, s1 * s2 > 0 ? term : -term);
        }
      }
    }
    return r;
  }

  /// Complex conjugation: generators to partners, coefficients conjugated.
  Form conj(const Form& f) const {
    check_same(f);
    Form r(id_);
    for (const auto& [m, c] : f.terms()) {
      Monomial cm;
      cm.reserve(m.size());
      for (GenId g : m) cm.push_back(gens_[static_cast<std::size_t>(g)].conj);
      int sign = normalize_monomial(cm);
      if (sign == 0) continue;
      Scalar cc = c.conj();
      r.add_term(cm, sign > 0 ? cc : -cc);
    }
    return r;
  }

  /// (p,q) type of a monomial; throws for untyped generators.
  std::pair<int, int> type_of(const Monomial& m) const {
    int p = 0, q = 0;
    for (GenId g : m) {
      const auto& gen = gens_[static_cast<std::size_t>(g)];
      if (gen.type == GenType::holo) {
        ++p;
      } else if (gen.type == GenType::antiholo) {
        ++q;
      } else {
        throw InputError("generator '" + gen.name + "' carries no (p,q) type");
      }
    }
    return {p, q};
  }

  std::map<std::pair<int, int>, Form> type_decomposition(const Form& f) const {
    check_same(f);
    std::map<std::pair<int, int>, Form> out;
    for (const auto& [m, c] : f.terms()) {
      auto [it, inserted] = out.try_emplace(type_of(m), Form(id_));
      it->second.add_term(m, c);
    }
    return out;
  }

  Form type_part(const Form& f, int p, int q) const {
    auto parts = type_decomposition(f);
    auto it = parts.find({p, q});
    return it == parts.end() ? zero() : it->second;
  }

  std::string str(const Form& f) const {
    if (f.is_zero()) return "0";
    std::string out;
    for (const auto& [m, c] : f.terms()) {
      std::string mono;
      for (GenId g : m) {
        if (!mono.empty()) mono += "^";
        mono += gens_[static_cast<std::size_t>(g)].name;
      }
      std::string coef = c.str();
      bool simple = c.terms().size() == 1 && c.terms().begin()->second.part_count() == 1;
      if (!out.empty()) out += " + ";
      if (mono.empty()) {
        out += "(" + coef + ")";
      } else if (coef == "1") {
        out += mono;
      } else {
        out += (simple ? coef : "(" + coef + ")") + "*" + mono;
      }
    }
    return out;
  }

  /// Algebra homomorphism into `target` sending generator g to images[g] (1-forms).
  static Form substitute(const Form& f, const std::vector<Form>& images, const FormModel& target) {
    Form r = target.zero();
    for (const auto& [m, c] : f.terms()) {
      Form t = target.scalar(c);
      for (GenId g : m) t = wedge(t, images.at(static_cast<std::size_t>(g)));
      r += t;
    }
    return r;
  }

private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  GenId push(const std::string& name, GenType type) {
    if (finalized_) throw InputError("model already finalized");
    if (name.empty()) throw InputError("empty generator name");
    if (by_name_.count(name)) throw InputError("duplicate generator '" + name + "'");
    auto g = static_cast<GenId>(gens_.size());
    gens_.push_back({name, type, -1});
    d_.emplace_back();
    by_name_[name] = g;
    return g;
  }
  void check_gen(GenId g) const {
    if (g < 0 || static_cast<std::size_t>(g) >= gens_.size()) throw InputError("generator id out of range");
  }
  void check_same(const Form& f) const {
    if (f.model() != 0 && f.model() != id_) throw InputError("form belongs to a different model");
  }

  std::uint64_t id_;
  bool finalized_ = false;
  std::vector<Generator> gens_;
  std::vector<std::optional<Form>> d_;
  std::unordered_map<std::string, GenId> by_name_;
};

} // namespace bklkit::exact
