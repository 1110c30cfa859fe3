#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "sosc/form.hpp"
#include "sosc/serialization.hpp"

namespace sosc {

/// Certified brackets for the extrema of p on the unit sphere and for
/// epsilon(p) = inf / sup.
struct EpsilonEstimate {
  Rational inf_lower, inf_upper;
  Rational sup_lower, sup_upper;
  /// Only meaningful when epsilon_defined (sup_lower > 0).
  Rational epsilon_lower, epsilon_upper;
  bool epsilon_defined = false;
  int depth = 0;
  std::size_t samples = 0;
  /// Widest cell bracket among cells that could still move a bound.
  Rational cell_error;
};

namespace detail {

/// A simplex on the boundary of the cross-polytope |x|_1 = 1 together with
/// a bracket of p(x / |x|) over it.
struct SphereCell {
  std::vector<std::vector<Rational>> vertices;
  Rational lo, hi;
};

/// Coefficients of f(sum_i t_i v_i) in the Bernstein basis of degree d on
/// the standard simplex, indexed like monomials_of_degree(n, d).
inline std::vector<Rational> bernstein_coefficients(const Form& f, const std::vector<std::vector<Rational>>& v, int d) {
  const std::size_t n = v.size();
  RationalMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(j, i) = v[i][j];
  const Form g = linear_change(f, a);
  Integer d_fact;
  mpz_fac_ui(d_fact.get_mpz_t(), static_cast<unsigned long>(d));
  std::vector<Rational> out;
  for (const auto& alpha : monomials_of_degree(static_cast<int>(n), d)) {
    Integer denom = 1;
    for (int k : alpha) {
      Integer f_k;
      mpz_fac_ui(f_k.get_mpz_t(), static_cast<unsigned long>(k));
      denom *= f_k;
    }
    out.push_back(g.coefficient(alpha) * Rational(denom) / Rational(d_fact));
  }
  return out;
}

/// Bracket of |x|^m from a bracket of |x|^2.
inline std::pair<Rational, Rational> norm_power(const Rational& sq_lo, const Rational& sq_hi, int m) {
  if (m % 2 == 0) return {pow(sq_lo, static_cast<unsigned>(m / 2)), pow(sq_hi, static_cast<unsigned>(m / 2))};
  const Rational lo = sqrt_bracket(sq_lo).first, hi = sqrt_bracket(sq_hi).second;
  return {pow(lo, static_cast<unsigned>(m)), pow(hi, static_cast<unsigned>(m))};
}

/// Interval quotient [a, b] / [c, d] with 0 < c <= d.
inline std::pair<Rational, Rational> divide_interval(const Rational& a, const Rational& b, const Rational& c,
                                                     const Rational& d) {
  return {a >= 0 ? a / d : a / c, b >= 0 ? b / c : b / d};
}

/// Bracket of p(x / |x|) over the cell and at each vertex. With even m the
/// cell bracket is the range of ratios of Bernstein coefficients of p and
/// |x|^m, which tightens quadratically under subdivision; when that fails the
/// Bernstein ranges of p and |x|^2 are divided as intervals.
inline void bound_cell(const Form& p, const Form& norm_m, const Form& norm_2, int m, SphereCell& cell,
                       std::vector<std::pair<Rational, Rational>>& vertex_values) {
  const std::size_t n = cell.vertices.size();
  const Rational min_sq = Rational(1) / Rational(static_cast<long>(n));
  vertex_values.clear();
  for (const auto& v : cell.vertices) {
    Rational sq = 0;
    for (const auto& c : v) sq += c * c;
    const Rational val = evaluate(p, v);
    auto [lo, hi] = norm_power(sq, sq, m);
    vertex_values.push_back(divide_interval(val, val, lo, hi));
  }
  const auto bp = bernstein_coefficients(p, cell.vertices, m);
  const Rational p_lo = *std::min_element(bp.begin(), bp.end());
  const Rational p_hi = *std::max_element(bp.begin(), bp.end());
  if (m % 2 == 0) {
    // indices where both coefficients vanish drop out of the quotient
    const auto bq = bernstein_coefficients(norm_m, cell.vertices, m);
    bool usable = true, any = false;
    for (std::size_t k = 0; k < bp.size() && usable; ++k) {
      if (bq[k] == 0) {
        usable = bp[k] == 0;
        continue;
      }
      const Rational r = bp[k] / bq[k];
      if (!any || r < cell.lo) cell.lo = r;
      if (!any || r > cell.hi) cell.hi = r;
      any = true;
    }
    if (usable && any) return;
  }
  const auto bs = bernstein_coefficients(norm_2, cell.vertices, 2);
  const Rational sq_lo = std::max(*std::min_element(bs.begin(), bs.end()), min_sq);
  const Rational sq_hi = *std::max_element(bs.begin(), bs.end());
  auto [lo, hi] = norm_power(sq_lo, sq_hi, m);
  std::tie(cell.lo, cell.hi) = divide_interval(p_lo, p_hi, lo, hi);
}

/// Halves the longest edge (first on ties) `times` times in every child.
inline void split_cell(const SphereCell& cell, int times, std::vector<SphereCell>& out) {
  if (times == 0) {
    out.push_back(cell);
    return;
  }
  const std::size_t n = cell.vertices.size();
  std::size_t bi = 0, bk = 0;
  Rational best = -1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      Rational d = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const Rational diff = cell.vertices[i][j] - cell.vertices[k][j];
        d += diff * diff;
      }
      if (d > best) {
        best = d;
        bi = i;
        bk = k;
      }
    }
  std::vector<Rational> mid(n);
  for (std::size_t j = 0; j < n; ++j) mid[j] = (cell.vertices[bi][j] + cell.vertices[bk][j]) / 2;
  SphereCell a = cell, b = cell;
  a.vertices[bi] = mid;
  b.vertices[bk] = mid;
  split_cell(a, times - 1, out);
  split_cell(b, times - 1, out);
}

}  // namespace detail

/// Brackets inf and sup of p on S^{n-1} by recursive subdivision of the
/// faces of the cross-polytope, radially projected. Vertex values are exact
/// sphere samples; each cell is bounded through Bernstein coefficients. A
/// depth step halves every cell that could still hold an extremum along
/// its n-1 longest edges, so brackets shrink monotonically with depth.
inline EpsilonEstimate sphere_extrema(const Form& p, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  if (depth > 20) throw std::invalid_argument("depth above 20 is out of reach");
  EpsilonEstimate est;
  est.depth = depth;
  const int n = p.n_vars();
  if (p.is_zero()) return est;
  const int m = *p.degree();
  const Form norm_2 = sum_of_squares_power(n, 1);
  const Form norm_m = m % 2 == 0 ? sum_of_squares_power(n, m / 2) : norm_2;

  std::vector<detail::SphereCell> cells;
  for (int mask = 0; mask < (1 << n); ++mask) {
    detail::SphereCell c;
    for (int i = 0; i < n; ++i) {
      std::vector<Rational> v(n);
      v[i] = (mask >> i) & 1 ? -1 : 1;
      c.vertices.push_back(std::move(v));
    }
    cells.push_back(std::move(c));
  }
  std::vector<bool> fresh(cells.size(), true);
  std::vector<std::pair<Rational, Rational>> vals;
  bool first = true;
  for (int level = 0;; ++level) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!fresh[i]) continue;
      const Rational parent_lo = cells[i].lo, parent_hi = cells[i].hi;
      detail::bound_cell(p, norm_m, norm_2, m, cells[i], vals);
      est.samples += vals.size();
      if (level > 0) {
        cells[i].lo = std::max(cells[i].lo, parent_lo);
        cells[i].hi = std::min(cells[i].hi, parent_hi);
      }
      for (const auto& [lo, hi] : vals) {
        if (first || hi < est.inf_upper) est.inf_upper = hi;
        if (first || lo > est.sup_lower) est.sup_lower = lo;
        first = false;
      }
    }
    Rational inf_lower = cells[0].lo, sup_upper = cells[0].hi;
    for (const auto& c : cells) {
      inf_lower = std::min(inf_lower, c.lo);
      sup_upper = std::max(sup_upper, c.hi);
    }
    est.inf_lower = level == 0 ? inf_lower : std::max(est.inf_lower, inf_lower);
    est.sup_upper = level == 0 ? sup_upper : std::min(est.sup_upper, sup_upper);
    // the cells that can still move a bracket
    auto open = [&](const detail::SphereCell& c) { return c.lo < est.inf_upper || c.hi > est.sup_lower; };
    est.cell_error = 0;
    for (const auto& c : cells)
      if (open(c)) est.cell_error = std::max(est.cell_error, Rational(c.hi - c.lo));
    if (level == depth) break;
    std::vector<detail::SphereCell> next;
    std::vector<bool> next_fresh;
    for (const auto& c : cells) {
      if (!open(c) || n == 1) {
        next.push_back(c);
        next_fresh.push_back(false);
        continue;
      }
      detail::split_cell(c, n - 1, next);
      next_fresh.resize(next.size(), true);
    }
    cells = std::move(next);
    fresh = std::move(next_fresh);
  }
  est.inf_lower = std::min(est.inf_lower, est.inf_upper);
  est.sup_upper = std::max(est.sup_upper, est.sup_lower);
  if (est.sup_lower > 0) {
    est.epsilon_defined = true;
    est.epsilon_lower = est.inf_lower >= 0 ? est.inf_lower / est.sup_upper : est.inf_lower / est.sup_lower;
    est.epsilon_upper = est.inf_upper >= 0 ? est.inf_upper / est.sup_lower : est.inf_upper / est.sup_upper;
  }
  return est;
}

/// Smallest N >= 0 with N >= n m (m-1) / (4 ln2 eps) - (n+m)/2, using the
/// lower end of ln 2 in [0.6931471805, 0.6931471806] so the result is never
/// too small.
inline Integer polya_bound(int n, int m, const Rational& epsilon) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("m must be even and at least 2");
  if (epsilon <= 0) throw std::domain_error("epsilon must be positive; the form is not positive definite");
  if (epsilon > 1) throw std::invalid_argument("epsilon cannot exceed 1");
  const Rational ln2_lower = make_rational(Integer(6931471805), Integer(10000000000));
  Rational rhs = Rational(n * m * (m - 1)) / (4 * ln2_lower * epsilon) - make_rational(n + m, 2);
  if (rhs <= 0) return 0;
  Integer q = rhs.get_num() / rhs.get_den();
  if (q * rhs.get_den() != rhs.get_num()) q += 1;
  return q;
}

enum class Strictness { Strict, Nonneg };

inline const char* to_string(Strictness s) { return s == Strictness::Strict ? "strict" : "nonneg"; }

namespace detail {

inline bool coefficients_pass(const Form& f, Strictness s, bool every_monomial, int stride) {
  if (f.is_zero()) return false;
  for (const auto& [e, c] : f.terms())
    if (c < 0 || (s == Strictness::Strict && c == 0)) return false;
  if (s == Strictness::Strict && every_monomial) {
    // every monomial of the degree (of the even sublattice when stride == 2)
    const int d = *f.degree() / stride;
    if (Integer(f.terms().size()) != dimension_of_space(f.n_vars(), d)) return false;
  }
  return true;
}

inline std::optional<int> multiplier_search(const Form& f, const Form& step, int n_max, Strictness s, int stride) {
  Form cur = f;
  for (int k = 0; k <= n_max; ++k) {
    if (coefficients_pass(cur, s, true, stride)) return k;
    if (k < n_max) cur = mul(cur, step);
  }
  return std::nullopt;
}

}  // namespace detail

/// Minimal N <= n_max with every coefficient of (sum x_j)^N f positive
/// (strict: every monomial of the degree present) or non-negative; nullopt
/// when exhausted.
inline std::optional<int> polya_exponent_search(const Form& f, int n_max, Strictness strictness = Strictness::Strict) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  if (f.is_zero()) return std::nullopt;
  const int n = f.n_vars();
  FormAccumulator sum(n);
  for (int i = 0; i < n; ++i) {
    Exponent e(n, 0);
    e[i] = 1;
    sum.add(e, 1);
  }
  return detail::multiplier_search(f, std::move(sum).finish(), n_max, strictness, 1);
}

/// Minimal N <= n_max with (sum x_j^2)^N p having non-negative (nonneg) or
/// all-positive (strict) coefficients; the product is then a positive
/// combination of even monomials, i.e. of squares of monomials.
inline std::optional<int> even_denominator_search(const Form& p, int n_max, Strictness strictness = Strictness::Nonneg) {
  if (!is_even_form(p)) throw std::invalid_argument("even_denominator_search needs an even form");
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  if (p.is_zero()) return std::nullopt;
  return detail::multiplier_search(p, sum_of_squares_power(p.n_vars(), 1), n_max, strictness, 2);
}

enum class PositivityMode { Simplex, EvenSquares };

inline const char* to_string(PositivityMode m) { return m == PositivityMode::Simplex ? "simplex" : "even-squares"; }

struct PolyaReport {
  std::string form_id;
  Form form{1};
  EpsilonEstimate epsilon;
  std::optional<Integer> n_bound;
  std::optional<int> n_measured;
  int n_max = 0;
  PositivityMode mode = PositivityMode::EvenSquares;
  Strictness strictness = Strictness::Nonneg;
};

/// Epsilon bracket, the bound from epsilon_lower (when positive), and the
/// measured minimal exponent. Simplex mode searches (sum x_j)^N p, even
/// mode (sum x_j^2)^N p.
inline PolyaReport polya_report(const std::string& id, const Form& p, PositivityMode mode, int depth, int n_max,
                                std::optional<Strictness> strictness = std::nullopt) {
  PolyaReport r;
  r.form_id = id;
  r.form = p;
  r.mode = mode;
  r.n_max = n_max;
  r.strictness = strictness.value_or(mode == PositivityMode::Simplex ? Strictness::Strict : Strictness::Nonneg);
  r.epsilon = sphere_extrema(p, depth);
  const std::optional<int> m = p.degree();
  if (m && *m >= 2 && *m % 2 == 0 && r.epsilon.epsilon_defined && r.epsilon.epsilon_lower > 0 &&
      r.epsilon.epsilon_lower <= 1)
    r.n_bound = polya_bound(p.n_vars(), *m, r.epsilon.epsilon_lower);
  r.n_measured = mode == PositivityMode::Simplex ? polya_exponent_search(p, n_max, r.strictness)
                                                 : even_denominator_search(p, n_max, r.strictness);
  return r;
}

inline Json to_json(const PolyaReport& r) {
  const auto& e = r.epsilon;
  Json eps = {{"inf_lower", rational_to_json(e.inf_lower)}, {"inf_upper", rational_to_json(e.inf_upper)},
              {"sup_lower", rational_to_json(e.sup_lower)}, {"sup_upper", rational_to_json(e.sup_upper)},
              {"depth", e.depth},
              {"samples", e.samples},
              {"cell_error", rational_to_json(e.cell_error)}};
  if (e.epsilon_defined) {
    eps["epsilon_lower"] = rational_to_json(e.epsilon_lower);
    eps["epsilon_upper"] = rational_to_json(e.epsilon_upper);
  }
  return {{"schema", 1},
          {"form_id", r.form_id},
          {"form", form_to_json(r.form)},
          {"positivity_mode", to_string(r.mode)},
          {"strictness", to_string(r.strictness)},
          {"epsilon", eps},
          {"N_bound", r.n_bound ? Json(r.n_bound->get_str()) : Json(nullptr)},
          {"N_measured", r.n_measured ? Json(*r.n_measured) : Json(nullptr)},
          {"N_max", r.n_max}};
}

}  // namespace sosc
