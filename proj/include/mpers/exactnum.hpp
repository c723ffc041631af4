#pragma once

// Exact scalars: arbitrary-precision rationals, square roots of rationals,
// extended reals and elements of the fields Q and Z/p.

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace mpers {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition: mismatched fields, bad dimensions, division by zero.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact rational number, always in lowest terms with a positive denominator.
class Rational {
 public:
  Rational() = default;
  Rational(long v) : q_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(int v) : q_(static_cast<long>(v)) {}  // NOLINT(google-explicit-constructor)
  Rational(long num, long den) {
    if (den == 0) throw DomainError("rational with zero denominator");
    q_ = mpq_class(mpz_class(num), mpz_class(den));
    q_.canonicalize();
  }
  Rational(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw DomainError("rational with zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
  }
  explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  /// Parses `a`, `a/b` or the exact decimal `a.b` (optionally signed).
  static Rational parse(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw ParseError("empty rational");
    auto valid_int = [](std::string_view t, bool allow_sign) {
      std::size_t i = 0;
      if (allow_sign && !t.empty() && (t[0] == '-' || t[0] == '+')) i = 1;
      if (i == t.size()) return false;
      for (; i < t.size(); ++i)
        if (t[i] < '0' || t[i] > '9') return false;
      return true;
    };
    if (auto slash = s.find('/'); slash != std::string::npos) {
      std::string num = s.substr(0, slash), den = s.substr(slash + 1);
      if (!valid_int(num, true) || !valid_int(den, false))
        throw ParseError("malformed rational '" + s + "'");
      if (num[0] == '+') num.erase(0, 1);
      mpz_class d(den);
      if (d == 0) throw ParseError("zero denominator in '" + s + "'");
      return Rational(mpz_class(num), d);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
      bool negative = !whole.empty() && whole[0] == '-';
      if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.erase(0, 1);
      if (whole.empty()) whole = "0";
      if (frac.empty() || !valid_int(whole, false) || !valid_int(frac, false))
        throw ParseError("malformed decimal '" + s + "'");
      mpz_class scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
      mpz_class num = mpz_class(whole) * scale + mpz_class(frac);
      if (negative) num = -num;
      return Rational(num, scale);
    }
    if (!valid_int(s, true)) throw ParseError("malformed rational '" + s + "'");
    if (s[0] == '+') s.erase(0, 1);
    return Rational(mpz_class(s), mpz_class(1));
  }

  /// Nearest dyadic rational k / 2^bits to a double (ties away from zero).
  static Rational from_double(double v, unsigned bits) {
    if (!std::isfinite(v)) throw DomainError("non-finite double");
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits);
    mpf_class scaled(v, 128);
    scaled *= mpf_class(scale, 128);
    scaled += (v < 0 ? -0.5 : 0.5);
    mpz_class k(scaled);
    return Rational(k, scale);
  }

  const mpq_class& raw() const { return q_; }
  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }
  bool is_zero() const { return sgn(q_) == 0; }
  bool is_integer() const { return q_.get_den() == 1; }
  int sign() const { return sgn(q_); }
  double to_double() const { return q_.get_d(); }

  std::string str() const {
    if (is_integer()) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
  }

  Rational operator-() const { return Rational(mpq_class(-q_)); }
  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw DomainError("rational division by zero");
    q_ /= o.q_;
    return *this;
  }
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  mpq_class q_{0};
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }

/// 2^-bits as a rational.
inline Rational dyadic_unit(unsigned bits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits);
  return Rational(mpz_class(1), scale);
}

/// Exact non-negative number sqrt(q) for rational q, stored by its square.
/// Euclidean distances between rational points and miniball radii are of
/// this form, so comparisons stay exact.
class SqrtRational {
 public:
  SqrtRational() = default;
  static SqrtRational from_square(Rational square) {
    if (square.sign() < 0) throw DomainError("negative square");
    SqrtRational s;
    s.square_ = std::move(square);
    return s;
  }
  static SqrtRational from_rational(const Rational& value) {
    if (value.sign() < 0) throw DomainError("SqrtRational of a negative value");
    return from_square(value * value);
  }

  const Rational& square() const { return square_; }

  bool is_rational() const {
    return mpz_perfect_square_p(square_.numerator().get_mpz_t()) &&
           mpz_perfect_square_p(square_.denominator().get_mpz_t());
  }
  /// Exact value; only valid when is_rational().
  Rational exact() const {
    if (!is_rational()) throw DomainError("irrational square root");
    mpz_class n, d;
    mpz_sqrt(n.get_mpz_t(), square_.numerator().get_mpz_t());
    mpz_sqrt(d.get_mpz_t(), square_.denominator().get_mpz_t());
    return Rational(n, d);
  }
  /// Smallest k/2^bits with k/2^bits >= value.
  Rational upper(unsigned bits = 20) const { return bound(bits, true); }
  /// Largest k/2^bits with k/2^bits <= value.
  Rational lower(unsigned bits = 20) const { return bound(bits, false); }
  /// The exact value when rational, the upper dyadic bound otherwise.
  Rational representative(unsigned bits = 20) const {
    return is_rational() ? exact() : upper(bits);
  }
  double to_double() const { return std::sqrt(square_.to_double()); }
  std::string str() const {
    if (is_rational()) return exact().str();
    return "sqrt(" + square_.str() + ")";
  }

  friend bool operator==(const SqrtRational& a, const SqrtRational& b) { return a.square_ == b.square_; }
  friend std::strong_ordering operator<=>(const SqrtRational& a, const SqrtRational& b) {
    return a.square_ <=> b.square_;
  }
  friend bool operator<=(const SqrtRational& a, const Rational& b) {
    return b.sign() >= 0 && a.square_ <= b * b;
  }

 private:
  Rational bound(unsigned bits, bool up) const {
    // k = floor/ceil(sqrt(square * 4^bits))
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits);
    mpz_class num = square_.numerator() * scale * scale;
    const mpz_class den = square_.denominator();
    mpz_class floor_q = num / den;
    mpz_class k;
    mpz_sqrt(k.get_mpz_t(), floor_q.get_mpz_t());  // k^2 <= num/den
    while (k * k * den > num) --k;
    while ((k + 1) * (k + 1) * den <= num) ++k;
    if (up && k * k * den < num) ++k;
    return Rational(k, scale);
  }

  Rational square_{0};
};

/// Element of the extended line: a finite rational, +inf or -inf.
class ExtendedReal {
 public:
  enum class Kind { NegInf, Finite, PosInf };

  ExtendedReal() = default;
  ExtendedReal(Rational v) : kind_(Kind::Finite), value_(std::move(v)) {}  // NOLINT
  ExtendedReal(long v) : ExtendedReal(Rational(v)) {}                       // NOLINT
  ExtendedReal(int v) : ExtendedReal(Rational(v)) {}                        // NOLINT

  static ExtendedReal infinity() { return ExtendedReal(Kind::PosInf); }
  static ExtendedReal neg_infinity() { return ExtendedReal(Kind::NegInf); }

  /// Accepts everything Rational::parse does plus `inf`, `+inf`, `-inf`.
  static ExtendedReal parse(std::string_view text) {
    if (text == "inf" || text == "+inf" || text == "infinity") return infinity();
    if (text == "-inf" || text == "-infinity") return neg_infinity();
    return ExtendedReal(Rational::parse(text));
  }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_pos_inf() const { return kind_ == Kind::PosInf; }
  bool is_neg_inf() const { return kind_ == Kind::NegInf; }
  const Rational& value() const {
    if (!is_finite()) throw DomainError("value() of an infinite extended real");
    return value_;
  }
  std::string str() const {
    switch (kind_) {
      case Kind::NegInf: return "-inf";
      case Kind::PosInf: return "inf";
      default: return value_.str();
    }
  }

  /// x + inf = inf; inf + (-inf) is rejected.
  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.is_finite() && b.is_finite()) return ExtendedReal(a.value_ + b.value_);
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
      throw DomainError("inf - inf is undefined");
    return a.is_finite() ? b : a;
  }
  ExtendedReal operator-() const {
    if (kind_ == Kind::PosInf) return neg_infinity();
    if (kind_ == Kind::NegInf) return infinity();
    return ExtendedReal(-value_);
  }
  friend ExtendedReal operator-(const ExtendedReal& a, const ExtendedReal& b) { return a + (-b); }
  /// Multiplication by a non-negative rational; 0 * inf = 0 is not needed and rejected.
  friend ExtendedReal operator*(const ExtendedReal& a, const Rational& c) {
    if (a.is_finite()) return ExtendedReal(a.value_ * c);
    if (c.sign() <= 0) throw DomainError("non-positive multiple of an infinity");
    return a;
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.kind_ == b.kind_ && (!a.is_finite() || a.value_ == b.value_);
  }
  friend std::strong_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) <=> static_cast<int>(b.kind_);
    if (!a.is_finite()) return std::strong_ordering::equal;
    return a.value_ <=> b.value_;
  }
  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& r) { return os << r.str(); }

 private:
  explicit ExtendedReal(Kind k) : kind_(k) {}
  Kind kind_ = Kind::Finite;
  Rational value_{0};
};

inline std::strong_ordering compare_extended(const ExtendedReal& a, const ExtendedReal& b) {
  return a <=> b;
}
inline const ExtendedReal& max(const ExtendedReal& a, const ExtendedReal& b) { return a < b ? b : a; }
inline const ExtendedReal& min(const ExtendedReal& a, const ExtendedReal& b) { return b < a ? b : a; }

/// |a - b| on the extended line; equal infinities are at distance 0.
inline ExtendedReal abs_difference(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.is_finite() && b.is_finite()) return ExtendedReal(abs(a.value() - b.value()));
  if (a == b) return ExtendedReal(0);
  return ExtendedReal::infinity();
}

inline bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  for (std::uint64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

/// Coefficient field: Q, or Z/p for a prime p <= 2^31.
class Field {
 public:
  static constexpr std::uint64_t kMaxPrime = 1ull << 31;

  Field() = default;
  static Field rationals() { return Field(0); }
  static Field prime(std::uint64_t p) {
    if (p > kMaxPrime || !is_prime(p))
      throw DomainError("field modulus " + std::to_string(p) + " is not a prime <= 2^31");
    return Field(static_cast<std::uint32_t>(p));
  }
  /// Parses `q` or `zp P`.
  static Field parse(std::string_view text) {
    std::string s(text);
    if (s == "q" || s == "Q") return rationals();
    if (s.rfind("zp", 0) == 0) {
      std::string rest = s.substr(2);
      auto start = rest.find_first_not_of(" \t");
      if (start == std::string::npos) throw ParseError("missing modulus in field '" + s + "'");
      rest = rest.substr(start);
      for (char c : rest)
        if (c < '0' || c > '9') throw ParseError("bad field modulus in '" + s + "'");
      if (rest.size() > 12) throw DomainError("field modulus too large in '" + s + "'");
      return prime(std::stoull(rest));
    }
    throw ParseError("unknown field '" + s + "'");
  }

  bool is_rational() const { return modulus_ == 0; }
  bool is_prime_field() const { return modulus_ != 0; }
  std::uint32_t modulus() const { return modulus_; }
  std::string str() const { return is_rational() ? "q" : "zp " + std::to_string(modulus_); }

  friend bool operator==(Field a, Field b) { return a.modulus_ == b.modulus_; }

 private:
  explicit Field(std::uint32_t m) : modulus_(m) {}
  std::uint32_t modulus_ = 2;
};

namespace detail {
inline std::uint32_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint32_t p) {
  std::uint64_t result = 1;
  base %= p;
  while (exp) {
    if (exp & 1u) result = result * base % p;
    base = base * base % p;
    exp >>= 1u;
  }
  return static_cast<std::uint32_t>(result);
}
inline std::uint32_t mod_inverse(std::uint32_t a, std::uint32_t p) {
  if (a % p == 0) throw DomainError("inverse of zero in Z/" + std::to_string(p));
  return mod_pow(a, p - 2, p);
}
inline std::uint32_t rational_to_residue(const Rational& r, std::uint32_t p) {
  mpz_class num = r.numerator() % p;
  if (num < 0) num += p;
  mpz_class den = r.denominator() % p;
  if (den == 0)
    throw DomainError("denominator of " + r.str() + " is not invertible in Z/" + std::to_string(p));
  std::uint64_t n = num.get_ui(), d = den.get_ui();
  return static_cast<std::uint32_t>(n * mod_inverse(static_cast<std::uint32_t>(d), p) % p);
}
}  // namespace detail

/// Element of a Field. Z/p elements hold their canonical residue in [0, p).
class FieldElement {
 public:
  FieldElement() : field_(Field::prime(2)), value_(std::uint32_t{0}) {}
  FieldElement(Field f, const Rational& v) : field_(f) {
    if (f.is_rational())
      value_ = v;
    else
      value_ = detail::rational_to_residue(v, f.modulus());
  }
  FieldElement(Field f, long v) : FieldElement(f, Rational(v)) {}
  static FieldElement zero(Field f) { return FieldElement(f, 0L); }
  static FieldElement one(Field f) { return FieldElement(f, 1L); }

  Field field() const { return field_; }
  bool is_zero() const {
    if (auto r = std::get_if<std::uint32_t>(&value_)) return *r == 0;
    return std::get<Rational>(value_).is_zero();
  }
  bool is_one() const {
    if (auto r = std::get_if<std::uint32_t>(&value_)) return *r == 1;
    return std::get<Rational>(value_) == Rational(1);
  }
  /// Canonical representative as a rational (the residue for Z/p).
  Rational to_rational() const {
    if (auto r = std::get_if<std::uint32_t>(&value_)) return Rational(static_cast<long>(*r));
    return std::get<Rational>(value_);
  }
  std::uint32_t residue() const { return std::get<std::uint32_t>(value_); }
  std::string str() const {
    if (auto r = std::get_if<std::uint32_t>(&value_)) return std::to_string(*r);
    return std::get<Rational>(value_).str();
  }

  FieldElement operator-() const {
    FieldElement out = *this;
    if (auto r = std::get_if<std::uint32_t>(&out.value_)) {
      if (*r) *r = field_.modulus() - *r;
    } else {
      std::get<Rational>(out.value_) = -std::get<Rational>(out.value_);
    }
    return out;
  }
  FieldElement& operator+=(const FieldElement& o) {
    check(o);
    if (auto r = std::get_if<std::uint32_t>(&value_)) {
      std::uint64_t s = std::uint64_t{*r} + o.residue();
      *r = static_cast<std::uint32_t>(s % field_.modulus());
    } else {
      std::get<Rational>(value_) += std::get<Rational>(o.value_);
    }
    return *this;
  }
  FieldElement& operator-=(const FieldElement& o) { return *this += -o; }
  FieldElement& operator*=(const FieldElement& o) {
    check(o);
    if (auto r = std::get_if<std::uint32_t>(&value_)) {
      *r = static_cast<std::uint32_t>(std::uint64_t{*r} * o.residue() % field_.modulus());
    } else {
      std::get<Rational>(value_) *= std::get<Rational>(o.value_);
    }
    return *this;
  }
  FieldElement inverse() const {
    if (is_zero()) throw DomainError("division by zero in " + field_.str());
    FieldElement out = *this;
    if (auto r = std::get_if<std::uint32_t>(&out.value_))
      *r = detail::mod_inverse(*r, field_.modulus());
    else
      std::get<Rational>(out.value_) = Rational(1) / std::get<Rational>(out.value_);
    return out;
  }
  FieldElement& operator/=(const FieldElement& o) {
    check(o);
    return *this *= o.inverse();
  }
  friend FieldElement operator+(FieldElement a, const FieldElement& b) { return a += b; }
  friend FieldElement operator-(FieldElement a, const FieldElement& b) { return a -= b; }
  friend FieldElement operator*(FieldElement a, const FieldElement& b) { return a *= b; }
  friend FieldElement operator/(FieldElement a, const FieldElement& b) { return a /= b; }
  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.field_ == b.field_ && a.value_ == b.value_;
  }
  friend std::ostream& operator<<(std::ostream& os, const FieldElement& e) { return os << e.str(); }

 private:
  void check(const FieldElement& o) const {
    if (!(field_ == o.field_))
      throw DomainError("mixed-field operands: " + field_.str() + " and " + o.field_.str());
  }

  Field field_;
  std::variant<std::uint32_t, Rational> value_;
};

}  // namespace mpers

template <>
struct std::hash<mpers::Rational> {
  std::size_t operator()(const mpers::Rational& r) const noexcept {
    std::size_t h1 = std::hash<std::string>{}(r.numerator().get_str(16));
    std::size_t h2 = std::hash<std::string>{}(r.denominator().get_str(16));
    return h1 ^ (h2 * 0x9e3779b97f4a7c15ull);
  }
};
