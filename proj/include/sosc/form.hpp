#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sosc/exact_linalg.hpp"
#include "sosc/rational.hpp"

namespace sosc {

using Exponent = std::vector<int>;

inline int total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0); }

/// Graded lexicographic order, largest first: higher total degree first,
/// then lexicographically larger exponent (x1 > x2 > ... > xn).
struct GrlexGreater {
  bool operator()(const Exponent& a, const Exponent& b) const {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

inline Exponent exponent_sum(const Exponent& a, const Exponent& b) {
  Exponent c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

/// All exponent vectors of n variables with total degree d, graded-lex order.
inline std::vector<Exponent> monomials_of_degree(int n, int d) {
  std::vector<Exponent> out;
  Exponent e(n, 0);
  // recursive fill: first variable takes the largest share first
  auto rec = [&](auto&& self, int var, int left) -> void {
    if (var == n - 1) {
      e[var] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[var] = k;
      self(self, var + 1, left - k);
    }
  };
  if (n >= 1 && d >= 0) rec(rec, 0, d);
  return out;
}

/// Real homogeneous form with exact rational coefficients. Immutable once
/// built; the zero form has no degree.
class Form {
 public:
  using TermMap = std::map<Exponent, Rational, GrlexGreater>;

  explicit Form(int n_vars) : n_(n_vars) {
    if (n_vars < 1) throw std::invalid_argument("a form needs at least one variable");
  }

  /// Builds a form from terms, dropping zero coefficients and merging
  /// duplicate exponents. Throws when the terms are not homogeneous.
  static Form from_terms(int n_vars, const std::vector<std::pair<Exponent, Rational>>& terms) {
    Form f(n_vars);
    for (const auto& [e, c] : terms) f.accumulate(e, c);
    f.prune();
    f.check_homogeneous();
    return f;
  }

  static Form monomial(int n_vars, Exponent e, const Rational& c = 1) {
    return from_terms(n_vars, {{std::move(e), c}});
  }

  static Form constant(int n_vars, const Rational& c) { return monomial(n_vars, Exponent(n_vars, 0), c); }

  /// The linear form x_i (0-based).
  static Form variable(int n_vars, int i) {
    if (i < 0 || i >= n_vars) throw std::out_of_range("variable index out of range");
    Exponent e(n_vars, 0);
    e[i] = 1;
    return monomial(n_vars, std::move(e));
  }

  /// Sum of c_i x_i.
  static Form linear(const std::vector<Rational>& coefficients) {
    const int n = static_cast<int>(coefficients.size());
    std::vector<std::pair<Exponent, Rational>> terms;
    for (int i = 0; i < n; ++i) {
      Exponent e(n, 0);
      e[i] = 1;
      terms.emplace_back(std::move(e), coefficients[i]);
    }
    return from_terms(n, terms);
  }

  int n_vars() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const TermMap& terms() const { return terms_; }

  /// Total degree; nullopt for the zero form.
  std::optional<int> degree() const {
    if (terms_.empty()) return std::nullopt;
    return total_degree(terms_.begin()->first);
  }

  Rational coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  std::vector<Exponent> support() const {
    std::vector<Exponent> s;
    s.reserve(terms_.size());
    for (const auto& [e, c] : terms_) s.push_back(e);
    return s;
  }

  friend bool operator==(const Form& a, const Form& b) { return a.n_ == b.n_ && a.terms_ == b.terms_; }
  friend bool operator!=(const Form& a, const Form& b) { return !(a == b); }

 private:
  friend class FormAccumulator;

  void accumulate(const Exponent& e, const Rational& c) {
    if (static_cast<int>(e.size()) != n_) throw std::invalid_argument("exponent length does not match variable count");
    for (int v : e)
      if (v < 0) throw std::invalid_argument("negative exponent");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) it->second += c;
  }

  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (it->second == 0)
        it = terms_.erase(it);
      else
        ++it;
    }
  }

  void check_homogeneous() const {
    if (terms_.empty()) return;
    const int d = total_degree(terms_.begin()->first);
    for (const auto& [e, c] : terms_)
      if (total_degree(e) != d) throw std::invalid_argument("non-homogeneous terms");
  }

  int n_;
  TermMap terms_;
};

/// Mutable term accumulator used by the arithmetic kernels.
class FormAccumulator {
 public:
  explicit FormAccumulator(int n_vars) : form_(n_vars) {}
  void add(const Exponent& e, const Rational& c) { form_.accumulate(e, c); }
  Form finish() && {
    form_.prune();
    form_.check_homogeneous();
    return std::move(form_);
  }

 private:
  Form form_;
};

namespace detail {
inline void require_same_vars(const Form& p, const Form& q) {
  if (p.n_vars() != q.n_vars()) throw std::invalid_argument("dimension mismatch: forms have different variable counts");
}
}  // namespace detail

inline Form add(const Form& p, const Form& q) {
  detail::require_same_vars(p, q);
  if (p.degree() && q.degree() && *p.degree() != *q.degree())
    throw std::invalid_argument("degree mismatch: cannot add forms of degree " + std::to_string(*p.degree()) + " and " +
                                std::to_string(*q.degree()));
  FormAccumulator acc(p.n_vars());
  for (const auto& [e, c] : p.terms()) acc.add(e, c);
  for (const auto& [e, c] : q.terms()) acc.add(e, c);
  return std::move(acc).finish();
}

inline Form scale(const Form& p, const Rational& s) {
  FormAccumulator acc(p.n_vars());
  if (s != 0)
    for (const auto& [e, c] : p.terms()) acc.add(e, c * s);
  return std::move(acc).finish();
}

inline Form negate(const Form& p) { return scale(p, Rational(-1)); }

inline Form subtract(const Form& p, const Form& q) { return add(p, negate(q)); }

inline Form mul(const Form& p, const Form& q) {
  detail::require_same_vars(p, q);
  FormAccumulator acc(p.n_vars());
  Rational t;
  for (const auto& [ea, ca] : p.terms())
    for (const auto& [eb, cb] : q.terms()) {
      t = ca * cb;
      acc.add(exponent_sum(ea, eb), t);
    }
  return std::move(acc).finish();
}

inline Form pow(const Form& p, unsigned k) {
  Form result = Form::constant(p.n_vars(), 1);
  Form base = p;
  while (k > 0) {
    if (k & 1U) result = mul(result, base);
    k >>= 1U;
    if (k > 0) base = mul(base, base);
  }
  return result;
}

/// Writes p = c q^2 with q of leading coefficient 1, when possible. Builds q
/// term by term from the leading term of the remainder.
inline std::optional<std::pair<Rational, Form>> square_factor(const Form& p) {
  if (p.is_zero()) return std::nullopt;
  const auto& [lead_e, c] = *p.terms().begin();
  Exponent half(lead_e.size());
  for (std::size_t i = 0; i < lead_e.size(); ++i) {
    if (lead_e[i] % 2 != 0) return std::nullopt;
    half[i] = lead_e[i] / 2;
  }
  const Form target = scale(p, 1 / c);
  std::vector<std::pair<Exponent, Rational>> terms{{half, 1}};
  Form q = Form::monomial(p.n_vars(), half);
  // the added exponents strictly decrease, so this terminates
  for (;;) {
    Form r = subtract(target, mul(q, q));
    if (r.is_zero()) return std::make_pair(c, q);
    const auto& [e, d] = *r.terms().begin();
    Exponent next(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      next[i] = e[i] - half[i];
      if (next[i] < 0) return std::nullopt;
    }
    if (!GrlexGreater{}(terms.back().first, next)) return std::nullopt;
    terms.emplace_back(next, d / 2);
    q = Form::from_terms(p.n_vars(), terms);
  }
}

inline Form operator+(const Form& p, const Form& q) { return add(p, q); }
inline Form operator-(const Form& p, const Form& q) { return subtract(p, q); }
inline Form operator-(const Form& p) { return negate(p); }
inline Form operator*(const Form& p, const Form& q) { return mul(p, q); }
inline Form operator*(const Rational& s, const Form& p) { return scale(p, s); }

inline Rational evaluate(const Form& p, const std::vector<Rational>& point) {
  if (static_cast<int>(point.size()) != p.n_vars())
    throw std::invalid_argument("dimension mismatch: point has " + std::to_string(point.size()) + " coordinates, form has " +
                                std::to_string(p.n_vars()) + " variables");
  // cache powers per variable
  std::vector<std::vector<Rational>> powers(point.size());
  Rational value = 0, term;
  for (const auto& [e, c] : p.terms()) {
    term = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      auto& pw = powers[i];
      if (pw.empty()) pw.push_back(1);
      while (static_cast<int>(pw.size()) <= e[i]) pw.push_back(pw.back() * point[i]);
      term *= pw[e[i]];
    }
    value += term;
  }
  return value;
}

/// p(s1 x1, ..., sn xn).
inline Form scale_variables(const Form& p, const std::vector<Rational>& scales) {
  if (static_cast<int>(scales.size()) != p.n_vars()) throw std::invalid_argument("dimension mismatch: scale vector length");
  for (const auto& s : scales)
    if (s == 0) throw std::invalid_argument("zero scale entry");
  FormAccumulator acc(p.n_vars());
  for (const auto& [e, c] : p.terms()) {
    Rational f = c;
    for (std::size_t i = 0; i < e.size(); ++i) f *= pow(scales[i], static_cast<unsigned>(e[i]));
    acc.add(e, f);
  }
  return std::move(acc).finish();
}

/// p(A x): variable x_i is replaced by sum_j A(i, j) x_j. A must be invertible.
inline Form linear_change(const Form& p, const RationalMatrix& a) {
  const auto n = static_cast<std::size_t>(p.n_vars());
  if (a.rows() != n || a.cols() != n) throw std::invalid_argument("dimension mismatch: change-of-variables matrix");
  if (determinant(a) == 0) throw std::invalid_argument("singular change-of-variables matrix");
  std::vector<Form> images;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rational> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = a(i, j);
    images.push_back(Form::linear(row));
  }
  std::vector<std::vector<Form>> powers(n);
  Form result(p.n_vars());
  for (const auto& [e, c] : p.terms()) {
    Form term = Form::constant(p.n_vars(), c);
    for (std::size_t i = 0; i < n; ++i) {
      auto& pw = powers[i];
      if (pw.empty()) pw.push_back(Form::constant(p.n_vars(), 1));
      while (static_cast<int>(pw.size()) <= e[i]) pw.push_back(mul(pw.back(), images[i]));
      term = mul(term, pw[e[i]]);
    }
    result = add(result, term);
  }
  return result;
}

/// Thrown when an exact division leaves a remainder.
class NotDivisible : public std::domain_error {
 public:
  NotDivisible(const std::string& what, Exponent leading) : std::domain_error(what), leading_(std::move(leading)) {}
  /// Leading exponent of the remainder.
  const Exponent& remainder_leading_exponent() const { return leading_; }

 private:
  Exponent leading_;
};

namespace detail {
inline bool is_linear(const Form& ell) { return !ell.is_zero() && *ell.degree() == 1; }

inline std::string exponent_text(const Exponent& e) {
  std::string s = "(";
  for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
  return s + ")";
}
}  // namespace detail

/// Exact quotient p / ell for a linear form ell; throws NotDivisible with the
/// leading term of the remainder otherwise.
inline Form divide_by_linear(const Form& p, const Form& ell) {
  detail::require_same_vars(p, ell);
  if (!detail::is_linear(ell)) throw std::invalid_argument("divisor is not a non-zero linear form");
  const auto& [lead_e, lead_c] = *ell.terms().begin();
  const auto var = static_cast<std::size_t>(std::find(lead_e.begin(), lead_e.end(), 1) - lead_e.begin());

  Form::TermMap rem = p.terms();
  FormAccumulator quotient(p.n_vars());
  std::optional<Exponent> first_bad;
  // graded-lex division: the leading term of ell is its largest variable
  while (!rem.empty()) {
    auto it = rem.begin();
    Exponent e = it->first;
    Rational c = it->second;
    if (e[var] == 0) {
      if (!first_bad) first_bad = e;
      rem.erase(it);
      continue;
    }
    Exponent qe = e;
    qe[var] -= 1;
    Rational qc = c / lead_c;
    quotient.add(qe, qc);
    for (const auto& [le, lc] : ell.terms()) {
      Exponent pe = exponent_sum(qe, le);
      auto [pit, inserted] = rem.try_emplace(pe, Rational(0));
      pit->second -= qc * lc;
      if (pit->second == 0) rem.erase(pit);
    }
  }
  if (first_bad)
    throw NotDivisible("not divisible: remainder has leading term with exponent " + detail::exponent_text(*first_bad),
                       *first_bad);
  return std::move(quotient).finish();
}

/// p / ell^2, checked exactly.
inline Form divide_by_linear_square(const Form& p, const Form& ell) {
  return divide_by_linear(divide_by_linear(p, ell), ell);
}

inline bool is_even_form(const Form& p) {
  for (const auto& [e, c] : p.terms())
    for (int v : e)
      if (v % 2 != 0) return false;
  return true;
}

/// binomial(n + d - 1, n - 1): dimension of the space of degree-d forms in n variables.
inline Integer dimension_of_space(int n, int d) {
  if (n < 1 || d < 0) throw std::invalid_argument("dimension_of_space needs n >= 1 and d >= 0");
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n + d - 1), static_cast<unsigned long>(n - 1));
  return r;
}

/// (x1^2 + ... + xn^2)^k.
inline Form sum_of_squares_power(int n_vars, unsigned k) {
  std::vector<std::pair<Exponent, Rational>> terms;
  for (int i = 0; i < n_vars; ++i) {
    Exponent e(n_vars, 0);
    e[i] = 2;
    terms.emplace_back(std::move(e), Rational(1));
  }
  return pow(Form::from_terms(n_vars, terms), k);
}

/// p with variables renamed: variable i of p becomes variable perm[i].
inline Form permute_variables(const Form& p, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != p.n_vars()) throw std::invalid_argument("dimension mismatch: permutation length");
  FormAccumulator acc(p.n_vars());
  for (const auto& [e, c] : p.terms()) {
    Exponent f(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) f[perm[i]] = e[i];
    acc.add(f, c);
  }
  return std::move(acc).finish();
}

}  // namespace sosc
