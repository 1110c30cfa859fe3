#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace sosc {

/// Exact rational number. GMP keeps it in lowest terms with a positive
/// denominator after every arithmetic operation.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "p" or "p/q" with optional leading sign.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(s));
    return make_rational(Integer(s.substr(0, slash)), Integer(s.substr(slash + 1)));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("malformed rational '" + s + "'");
  }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

inline Integer integer_from_double(double v) {
  Integer z;
  mpz_set_d(z.get_mpz_t(), v);
  return z;
}

/// Nearest k/den to v.
inline Rational round_to_denominator(double v, const Integer& den) {
  if (!std::isfinite(v)) throw std::domain_error("cannot round a non-finite value");
  Integer k = integer_from_double(std::nearbyint(v * den.get_d()));
  return make_rational(k, den);
}

/// Nearest k/den to q, ties rounded up.
inline Rational round_to_denominator(const Rational& q, const Integer& den) {
  Rational scaled = q * den + Rational(1, 2);
  Integer k;
  mpz_fdiv_q(k.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return make_rational(k, den);
}

/// Best rational approximation of v with denominator <= max_den, via
/// continued fractions.
inline Rational best_rational(double v, std::int64_t max_den) {
  if (!std::isfinite(v)) throw std::domain_error("cannot rationalize a non-finite value");
  double x = v;
  Integer h_prev = 1, h = integer_from_double(std::floor(x));
  Integer k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64 && frac > 1e-15; ++iter) {
    x = 1.0 / frac;
    double a_d = std::floor(x);
    frac = x - a_d;
    Integer a = integer_from_double(a_d);
    Integer h_next = a * h + h_prev;
    Integer k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return make_rational(h, k);
}

/// First continued-fraction convergent of v within tol of v, if its
/// denominator stays <= max_den.
inline std::optional<Rational> simplest_rational(double v, double tol, std::int64_t max_den) {
  if (!std::isfinite(v)) return std::nullopt;
  double x = v;
  double a_d = std::floor(x);
  Integer h_prev = 1, h = integer_from_double(a_d);
  Integer k_prev = 0, k = 1;
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(h.get_d() / k.get_d() - v) <= tol) return make_rational(h, k);
    double frac = x - a_d;
    if (frac <= 0) break;
    x = 1.0 / frac;
    a_d = std::floor(x);
    Integer a = integer_from_double(a_d);
    Integer h_next = a * h + h_prev;
    Integer k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return std::nullopt;
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

/// q^e for e >= 0.
inline Rational pow(const Rational& q, unsigned e) {
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), e);
  return r;
}

/// Rational bracket [lo, hi] around sqrt(s), s >= 0, with hi - lo <= 2^-bits.
inline std::pair<Rational, Rational> sqrt_bracket(const Rational& s, unsigned bits = 60) {
  if (s < 0) throw std::domain_error("sqrt of negative rational");
  if (s == 0) return {Rational(0), Rational(0)};
  // floor(sqrt(s * 4^bits)) / 2^bits is a lower bound.
  Integer scale = Integer(1) << bits;
  Integer scaled = s.get_num() * scale * scale / s.get_den();
  Integer root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  Rational lo = make_rational(root, scale);
  Rational hi = make_rational(root + 1, scale);
  return {lo, hi};
}

}  // namespace sosc
