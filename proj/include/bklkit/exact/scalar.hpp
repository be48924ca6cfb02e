#pragma once

// Polynomials over Q(i, sqrt2) in a set of named symbols. Symbols are either
// real (self-conjugate) or come in conjugate pairs; conj() maps each symbol to
// its partner and conjugates coefficients.

#include <algorithm>
#include <cctype>
#include <complex>
#include <iterator>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bklkit/exact/number.hpp"

namespace bklkit::exact {

using SymbolId = int;

/// Process-wide symbol table. Registration is idempotent for identical
/// declarations and throws InputError for conflicting ones.
class SymbolTable {
public:
  static SymbolTable& instance() {
    static SymbolTable t;
    return t;
  }

  SymbolId declare_real(const std::string& name) {
    std::lock_guard lock(mu_);
    check_name(name);
    if (auto it = by_name_.find(name); it != by_name_.end()) {
      if (conj_[it->second] != it->second) throw InputError("symbol '" + name + "' already declared complex");
      return it->second;
    }
    SymbolId id = push(name);
    conj_[id] = id;
    return id;
  }

  /// Declares `name` and `conj_name` as a conjugate pair; returns the id of `name`.
  SymbolId declare_pair(const std::string& name, const std::string& conj_name) {
    if (name == conj_name) return declare_real(name);
    std::lock_guard lock(mu_);
    check_name(name);
    check_name(conj_name);
    auto a = by_name_.find(name);
    auto b = by_name_.find(conj_name);
    if (a != by_name_.end() || b != by_name_.end()) {
      if (a != by_name_.end() && b != by_name_.end() && conj_[a->second] == b->second) return a->second;
      throw InputError("symbol pair '" + name + "'/'" + conj_name + "' conflicts with an earlier declaration");
    }
    SymbolId x = push(name);
    SymbolId y = push(conj_name);
    conj_[x] = y;
    conj_[y] = x;
    return x;
  }

  bool contains(std::string_view name) const {
    std::lock_guard lock(mu_);
    return by_name_.count(std::string(name)) != 0;
  }

  SymbolId id(std::string_view name) const {
    std::lock_guard lock(mu_);
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) throw InputError("unknown symbol '" + std::string(name) + "'");
    return it->second;
  }

  std::string name(SymbolId s) const {
    std::lock_guard lock(mu_);
    return names_.at(static_cast<std::size_t>(s));
  }

  SymbolId conj(SymbolId s) const {
    std::lock_guard lock(mu_);
    return conj_.at(static_cast<std::size_t>(s));
  }

private:
  static void check_name(const std::string& n) {
    if (n.empty() || !(std::isalpha(static_cast<unsigned char>(n[0])) || n[0] == '_'))
      throw InputError("invalid symbol name '" + n + "'");
    for (char c : n)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
        throw InputError("invalid symbol name '" + n + "'");
    if (n == "I" || n == "sqrt2") throw InputError("'" + n + "' is reserved");
  }
  SymbolId push(const std::string& n) {
    auto id = static_cast<SymbolId>(names_.size());
    names_.push_back(n);
    conj_.push_back(id);
    by_name_[n] = id;
    return id;
  }

  mutable std::mutex mu_;
  std::vector<std::string> names_;
  std::vector<SymbolId> conj_;
  std::unordered_map<std::string, SymbolId> by_name_;
};

/// Sorted multiset of symbol ids.
using SymMono = std::vector<SymbolId>;

class Scalar {
public:
  Scalar() = default;
  Scalar(long v) : Scalar(Number(v)) {} // NOLINT
  Scalar(const Number& c) { // NOLINT
    if (!c.is_zero()) terms_[{}] = c;
  }
  static Scalar symbol(SymbolId s) {
    Scalar r;
    r.terms_[{s}] = Number(1);
    return r;
  }
  static Scalar symbol(std::string_view name) { return symbol(SymbolTable::instance().id(name)); }

  const std::map<SymMono, Number>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
  Number constant() const {
    auto it = terms_.find({});
    return it == terms_.end() ? Number() : it->second;
  }

  Scalar conj() const {
    auto& tab = SymbolTable::instance();
    Scalar r;
    for (const auto& [m, c] : terms_) {
      SymMono cm;
      cm.reserve(m.size());
      for (SymbolId s : m) cm.push_back(tab.conj(s));
      std::sort(cm.begin(), cm.end());
      r.add_term(cm, c.conj());
    }
    return r;
  }

  Scalar operator-() const {
    Scalar r;
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }
  Scalar& operator+=(const Scalar& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    Scalar r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        SymMono m;
        m.reserve(ma.size() + mb.size());
        std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
        r.add_term(m, ca * cb);
      }
    return r;
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (!b.is_constant() || b.is_zero()) throw InputError("division by a non-constant or zero scalar");
    return a * Scalar(b.constant().inverse());
  }
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.terms_ == b.terms_; }

  /// Evaluates with the supplied symbol values; missing symbols throw.
  std::complex<double> eval(const std::map<SymbolId, std::complex<double>>& values) const {
    std::complex<double> sum = 0;
    for (const auto& [m, c] : terms_) {
      std::complex<double> t = c.to_complex();
      for (SymbolId s : m) {
        auto it = values.find(s);
        if (it == values.end()) throw InputError("no value for symbol '" + SymbolTable::instance().name(s) + "'");
        t *= it->second;
      }
      sum += t;
    }
    return sum;
  }

  /// Substitutes each listed symbol by a scalar.
  Scalar substitute(const std::map<SymbolId, Scalar>& sub) const {
    Scalar r;
    for (const auto& [m, c] : terms_) {
      Scalar t(c);
      SymMono rest;
      for (SymbolId s : m) {
        auto it = sub.find(s);
        if (it == sub.end()) {
          rest.push_back(s);
        } else {
          t = t * it->second;
        }
      }
      Scalar mono;
      mono.terms_[rest] = Number(1);
      r += t * mono;
    }
    return r;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    auto& tab = SymbolTable::instance();
    std::string out;
    for (const auto& [m, c] : terms_) {
      std::string sym;
      for (std::size_t k = 0; k < m.size();) {
        std::size_t j = k;
        while (j < m.size() && m[j] == m[k]) ++j;
        if (!sym.empty()) sym += "*";
        sym += tab.name(m[k]);
        if (j - k > 1) sym += "^" + std::to_string(j - k);
        k = j;
      }
      std::string coef = c.str();
      bool neg = false;
      if (c.part_count() == 1 && coef[0] == '-') {
        neg = true;
        coef = coef.substr(1);
      }
      std::string body;
      if (sym.empty()) {
        body = c.part_count() > 1 ? "(" + coef + ")" : coef;
      } else if (coef == "1") {
        body = sym;
      } else {
        body = (c.part_count() > 1 ? "(" + coef + ")" : coef) + "*" + sym;
      }
      if (out.empty()) {
        out = (neg ? "-" : "") + body;
      } else {
        out += neg ? " - " : " + ";
        out += body;
      }
    }
    return out;
  }

  void add_term(const SymMono& m, const Number& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

private:
  std::map<SymMono, Number> terms_;
};

/// Recursive-descent parser for scalar expressions:
///   expr := term (('+'|'-') term)*
///   term := unary (('*'|'/') unary)*
///   unary := '-' unary | power
///   power := atom ('^' nonneg-int)?
///   atom := integer | integer '/' integer | 'I' | 'sqrt2' | symbol | '(' expr ')'
/// Unknown identifiers are an InputError; symbols must be declared beforehand.
class ScalarParser {
public:
  static Scalar parse(std::string_view text) {
    ScalarParser p(text);
    Scalar s = p.expr();
    p.skip();
    if (p.pos_ != p.text_.size()) p.fail("unexpected trailing input");
    return s;
  }

private:
  explicit ScalarParser(std::string_view t) : text_(t) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw InputError("cannot parse scalar '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " +
                     why);
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Scalar expr() {
    Scalar acc = term();
    for (;;) {
      if (eat('+')) {
        acc += term();
      } else if (eat('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }
  Scalar term() {
    Scalar acc = unary();
    for (;;) {
      if (eat('*')) {
        acc = acc * unary();
      } else if (eat('/')) {
        Scalar d = unary();
        if (!d.is_constant() || d.is_zero()) fail("division by a non-constant or zero");
        acc = acc / d;
      } else {
        return acc;
      }
    }
  }
  Scalar unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  Scalar power() {
    Scalar base = atom();
    if (eat('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected exponent");
      int e = std::stoi(std::string(text_.substr(start, pos_ - start)));
      Scalar r(1);
      for (int k = 0; k < e; ++k) r = r * base;
      return r;
    }
    return base;
  }
  Scalar atom() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Scalar s = expr();
      if (!eat(')')) fail("expected ')'");
      return s;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '.') fail("decimal literals are not exact; use a fraction");
      return Scalar(Number(Rational(std::string(text_.substr(start, pos_ - start)))));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string id(text_.substr(start, pos_ - start));
      if (id == "I") return Scalar(Number::i());
      if (id == "sqrt2") return Scalar(Number::sqrt2());
      auto& tab = SymbolTable::instance();
      if (!tab.contains(id)) fail("unknown symbol '" + id + "'");
      return Scalar::symbol(tab.id(id));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Scalar parse_scalar(std::string_view text) { return ScalarParser::parse(text); }

} // namespace bklkit::exact
