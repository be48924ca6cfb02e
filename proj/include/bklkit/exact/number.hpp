#pragma once

// Exact arithmetic in the field Q(i, sqrt2). An element is stored as
//   (re + im*i) + (re2 + im2*i)*sqrt2
// with four GMP rationals.

#include <gmpxx.h>

#include <complex>
#include <compare>
#include <cmath>
#include <string>
#include <vector>

#include "bklkit/errors.hpp"

namespace bklkit::exact {

using Rational = mpq_class;

class Number {
public:
  Number() : re_(0), im_(0), re2_(0), im2_(0) {}
  Number(long v) : re_(v), im_(0), re2_(0), im2_(0) {} // NOLINT: implicit on purpose
  Number(Rational re, Rational im = 0, Rational re2 = 0, Rational im2 = 0)
      : re_(std::move(re)), im_(std::move(im)), re2_(std::move(re2)), im2_(std::move(im2)) {
    canonicalize();
  }

  static Number i() { return {Rational(0), Rational(1)}; }
  static Number sqrt2() { return {Rational(0), Rational(0), Rational(1)}; }
  static Number rational(long num, long den) { return Number(Rational(num, den)); }

  const Rational& re() const { return re_; }
  const Rational& im() const { return im_; }
  const Rational& re_sqrt2() const { return re2_; }
  const Rational& im_sqrt2() const { return im2_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0 && sgn(re2_) == 0 && sgn(im2_) == 0; }
  bool is_real() const { return sgn(im_) == 0 && sgn(im2_) == 0; }
  bool is_rational() const { return sgn(im_) == 0 && sgn(re2_) == 0 && sgn(im2_) == 0; }

  Number conj() const { return {re_, -im_, re2_, -im2_}; }

  Number operator-() const { return {-re_, -im_, -re2_, -im2_}; }

  Number& operator+=(const Number& o) {
    re_ += o.re_;
    im_ += o.im_;
    re2_ += o.re2_;
    im2_ += o.im2_;
    return *this;
  }
  Number& operator-=(const Number& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    re2_ -= o.re2_;
    im2_ -= o.im2_;
    return *this;
  }
  Number& operator*=(const Number& o) {
    // (a + b s)(c + d s) = (ac + 2bd) + (ad + bc) s, with a,b,c,d Gaussian rationals
    const Gauss a{re_, im_}, b{re2_, im2_}, c{o.re_, o.im_}, d{o.re2_, o.im2_};
    Gauss bd = mul(b, d);
    Gauss first = add(mul(a, c), Gauss{2 * bd.re, 2 * bd.im});
    Gauss second = add(mul(a, d), mul(b, c));
    re_ = first.re;
    im_ = first.im;
    re2_ = second.re;
    im2_ = second.im;
    canonicalize();
    return *this;
  }

  Number inverse() const {
    if (is_zero()) throw InputError("division by zero in Q(i, sqrt2)");
    // (a + b s)^{-1} = (a - b s) / (a^2 - 2 b^2); a^2 - 2b^2 != 0 because sqrt2 is not in Q(i)
    const Gauss a{re_, im_}, b{re2_, im2_};
    Gauss bb = mul(b, b);
    Gauss den = add(mul(a, a), Gauss{-2 * bb.re, -2 * bb.im});
    Gauss inv = ginv(den);
    Gauss x = mul(a, inv);
    Gauss y = mul(b, inv);
    return {x.re, x.im, -y.re, -y.im};
  }

  Number& operator/=(const Number& o) { return *this *= o.inverse(); }

  friend Number operator+(Number a, const Number& b) { return a += b; }
  friend Number operator-(Number a, const Number& b) { return a -= b; }
  friend Number operator*(Number a, const Number& b) { return a *= b; }
  friend Number operator/(Number a, const Number& b) { return a /= b; }

  friend bool operator==(const Number& a, const Number& b) {
    return a.re_ == b.re_ && a.im_ == b.im_ && a.re2_ == b.re2_ && a.im2_ == b.im2_;
  }

  /// Total order used only for canonical printing and map keys.
  friend std::strong_ordering operator<=>(const Number& a, const Number& b) {
    for (auto [x, y] : {std::pair{&a.re_, &b.re_}, std::pair{&a.im_, &b.im_},
                        std::pair{&a.re2_, &b.re2_}, std::pair{&a.im2_, &b.im2_}}) {
      int c = cmp(*x, *y);
      if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
  }

  std::complex<double> to_complex() const {
    const double s = std::sqrt(2.0);
    return {re_.get_d() + s * re2_.get_d(), im_.get_d() + s * im2_.get_d()};
  }

  /// Renders e.g. "3/2 - 1/2*I + sqrt2 - I*sqrt2"; "0" for zero.
  std::string str() const {
    struct Part {
      const Rational* q;
      const char* unit;
    };
    const Part parts[] = {{&re_, ""}, {&im_, "I"}, {&re2_, "sqrt2"}, {&im2_, "I*sqrt2"}};
    std::string out;
    for (const auto& p : parts) {
      if (sgn(*p.q) == 0) continue;
      Rational mag = abs(*p.q);
      bool neg = sgn(*p.q) < 0;
      std::string body;
      if (*p.unit == '\0') {
        body = mag.get_str();
      } else if (mag == 1) {
        body = p.unit;
      } else {
        body = mag.get_str() + "*" + p.unit;
      }
      if (out.empty()) {
        out = (neg ? "-" : "") + body;
      } else {
        out += neg ? " - " : " + ";
        out += body;
      }
    }
    return out.empty() ? "0" : out;
  }

  /// Number of nonzero rational parts; used to decide parenthesization.
  int part_count() const {
    return (sgn(re_) != 0) + (sgn(im_) != 0) + (sgn(re2_) != 0) + (sgn(im2_) != 0);
  }

private:
  struct Gauss {
    Rational re, im;
  };
  static Gauss mul(const Gauss& x, const Gauss& y) {
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
  }
  static Gauss add(const Gauss& x, const Gauss& y) { return {x.re + y.re, x.im + y.im}; }
  static Gauss ginv(const Gauss& x) {
    Rational n = x.re * x.re + x.im * x.im;
    return {x.re / n, -x.im / n};
  }

  void canonicalize() {
    re_.canonicalize();
    im_.canonicalize();
    re2_.canonicalize();
    im2_.canonicalize();
  }

  Rational re_, im_, re2_, im2_;
};

/// Best-effort lift of a double into Q(sqrt2): tries p/q and (p/q)*sqrt2 with
/// q <= max_den. Returns false when neither matches within 1e-13 relative.
inline bool snap_real(double x, Number& out, long max_den = 1024) {
  if (!std::isfinite(x)) return false;
  auto try_rational = [&](double v, Rational& q) {
    for (long den = 1; den <= max_den; ++den) {
      double num = std::round(v * static_cast<double>(den));
      if (std::abs(num) > 1e12) return false;
      if (std::abs(num / static_cast<double>(den) - v) <= 1e-13 * std::max(1.0, std::abs(v))) {
        q = Rational(static_cast<long>(num), den);
        q.canonicalize();
        return true;
      }
    }
    return false;
  };
  Rational q;
  if (try_rational(x, q)) {
    out = Number(q);
    return true;
  }
  if (try_rational(x / std::sqrt(2.0), q)) {
    out = Number(Rational(0), Rational(0), q);
    return true;
  }
  return false;
}

inline bool snap_complex(std::complex<double> z, Number& out, long max_den = 1024) {
  Number re, im;
  if (!snap_real(z.real(), re, max_den) || !snap_real(z.imag(), im, max_den)) return false;
  out = re + Number::i() * im;
  return true;
}

} // namespace bklkit::exact
