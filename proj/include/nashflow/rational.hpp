#pragma once

#include <gmpxx.h>

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace nashflow {

// Exact rational scalar, always kept canonical (lowest terms, positive
// denominator), so operator== is numeric equality and values can be used
// as map keys. All quantities in this library (transit times, capacities,
// rates, labels, flows, queue sizes) are Rat; nothing is ever rounded.
class Rat {
public:
  Rat() : q_(0) {}
  Rat(long n) : q_(n) {}  // NOLINT: implicit by design, mirrors integer literals
  Rat(long num, long den) : q_(num, den) {
    if (den == 0) throw std::domain_error("Rat: zero denominator");
    q_.canonicalize();
  }
  explicit Rat(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

  // Accepts "p", "p/q", with optional leading '-'.
  static Rat parse(const std::string& text) {
    auto slash = text.find('/');
    try {
      if (slash == std::string::npos) return Rat(mpq_class(mpz_class(text)));
      mpz_class num(text.substr(0, slash));
      mpz_class den(text.substr(slash + 1));
      if (den == 0) throw std::domain_error("Rat: zero denominator");
      mpq_class q(num);
      q /= mpq_class(den);
      return Rat(std::move(q));
    } catch (const std::invalid_argument&) {
      throw std::domain_error("Rat: cannot parse '" + text + "'");
    }
  }

  std::string str() const {
    if (q_.get_den() == 1) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
  }

  // Approximate decimal rendering, 12 significant digits.
  std::string approx() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", q_.get_d());
    return buf;
  }

  double to_double() const { return q_.get_d(); }
  bool is_integer() const { return q_.get_den() == 1; }
  int sign() const { return sgn(q_); }
  const mpq_class& raw() const { return q_; }

  Rat& operator+=(const Rat& o) { q_ += o.q_; return *this; }
  Rat& operator-=(const Rat& o) { q_ -= o.q_; return *this; }
  Rat& operator*=(const Rat& o) { q_ *= o.q_; return *this; }
  Rat& operator/=(const Rat& o) {
    if (o.q_ == 0) throw std::domain_error("Rat: division by zero");
    q_ /= o.q_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
  friend Rat operator-(const Rat& a) { Rat r; r.q_ = -a.q_; return r; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.q_ == b.q_; }
  friend bool operator!=(const Rat& a, const Rat& b) { return a.q_ != b.q_; }
  friend bool operator<(const Rat& a, const Rat& b) { return a.q_ < b.q_; }
  friend bool operator<=(const Rat& a, const Rat& b) { return a.q_ <= b.q_; }
  friend bool operator>(const Rat& a, const Rat& b) { return a.q_ > b.q_; }
  friend bool operator>=(const Rat& a, const Rat& b) { return a.q_ >= b.q_; }

private:
  mpq_class q_;
};

inline Rat abs(const Rat& a) { return a < Rat(0) ? -a : a; }
inline const Rat& min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline const Rat& max(const Rat& a, const Rat& b) { return a < b ? b : a; }
inline Rat midpoint(const Rat& a, const Rat& b) { return (a + b) / Rat(2); }

// Rational extended with +infinity. Used wherever the model genuinely needs
// an unbounded value (unreachable distances, unbounded phases, horizons);
// never encoded as a large sentinel magnitude.
class ExtRat {
public:
  ExtRat() : finite_(true), value_(0) {}
  ExtRat(Rat v) : finite_(true), value_(std::move(v)) {}  // NOLINT
  static ExtRat infinity() {
    ExtRat e;
    e.finite_ = false;
    return e;
  }

  bool is_finite() const { return finite_; }
  const Rat& value() const {
    if (!finite_) throw std::domain_error("ExtRat: infinite value");
    return value_;
  }

  std::string str() const { return finite_ ? value_.str() : "inf"; }

  friend bool operator==(const ExtRat& a, const ExtRat& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.value_ == b.value_;
  }
  friend bool operator!=(const ExtRat& a, const ExtRat& b) { return !(a == b); }
  friend bool operator<(const ExtRat& a, const ExtRat& b) {
    if (!a.finite_) return false;
    if (!b.finite_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator<=(const ExtRat& a, const ExtRat& b) { return a < b || a == b; }
  friend bool operator>(const ExtRat& a, const ExtRat& b) { return b < a; }
  friend bool operator>=(const ExtRat& a, const ExtRat& b) { return b <= a; }

  friend ExtRat operator+(const ExtRat& a, const Rat& b) {
    return a.finite_ ? ExtRat(a.value_ + b) : a;
  }

  friend const ExtRat& min(const ExtRat& a, const ExtRat& b) { return b < a ? b : a; }

private:
  bool finite_;
  Rat value_;
};

}  // namespace nashflow
