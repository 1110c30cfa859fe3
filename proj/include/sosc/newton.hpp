#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "sosc/form.hpp"

namespace sosc {

/// Candidate square-root monomials of one degree, graded-lex ordered, no duplicates.
struct MonomialBasis {
  int n_vars = 0;
  int half_degree = 0;
  std::vector<Exponent> monomials;

  std::size_t size() const { return monomials.size(); }
  bool empty() const { return monomials.empty(); }

  friend bool operator==(const MonomialBasis&, const MonomialBasis&) = default;
};

/// Every monomial of the given degree.
inline MonomialBasis full_basis(int n_vars, int half_degree) {
  return MonomialBasis{n_vars, half_degree, monomials_of_degree(n_vars, half_degree)};
}

/// Whether `point` is a convex combination of `vertices`. All vectors are
/// assumed to share one coordinate sum, so the weights automatically sum
/// to one. Decided by an exact phase-one simplex with Bland's rule.
inline bool in_convex_hull(const std::vector<Exponent>& vertices, const Exponent& point) {
  if (vertices.empty()) return false;
  for (const auto& v : vertices)
    if (v == point) return true;
  const std::size_t rows = point.size();
  const std::size_t k = vertices.size();
  // tableau columns: k weights, rows artificials, rhs
  const std::size_t cols = k + rows + 1;
  std::vector<std::vector<Rational>> t(rows, std::vector<Rational>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < k; ++j) t[i][j] = vertices[j][i];
    t[i][k + i] = 1;
    t[i][cols - 1] = point[i];
  }
  std::vector<std::size_t> basic(rows);
  for (std::size_t i = 0; i < rows; ++i) basic[i] = k + i;
  // objective: minimize the sum of artificials; reduced costs over the weights
  auto reduced_cost = [&](std::size_t j) {
    Rational c = (j >= k) ? Rational(1) : Rational(0);
    for (std::size_t i = 0; i < rows; ++i)
      if (basic[i] >= k) c -= t[i][j];
    return c;
  };
  for (int iter = 0; iter < 10000; ++iter) {
    std::optional<std::size_t> enter;
    for (std::size_t j = 0; j < k + rows; ++j) {
      if (std::find(basic.begin(), basic.end(), j) != basic.end()) continue;
      if (reduced_cost(j) < 0) {
        enter = j;
        break;
      }
    }
    if (!enter) break;
    std::optional<std::size_t> leave;
    Rational best;
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][*enter] <= 0) continue;
      Rational ratio = t[i][cols - 1] / t[i][*enter];
      if (!leave || ratio < best || (ratio == best && basic[i] < basic[*leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (!leave) break;  // unbounded cannot happen for a phase-one objective bounded below
    const std::size_t r = *leave;
    Rational inv = 1 / t[r][*enter];
    for (auto& x : t[r]) x *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || t[i][*enter] == 0) continue;
      Rational f = t[i][*enter];
      for (std::size_t j = 0; j < cols; ++j)
        if (t[r][j] != 0) t[i][j] -= f * t[r][j];
    }
    basic[r] = *enter;
  }
  Rational infeasibility = 0;
  for (std::size_t i = 0; i < rows; ++i)
    if (basic[i] >= k) infeasibility += t[i][cols - 1];
  return infeasibility == 0;
}

/// Degree-m/2 monomials whose double lies in the convex hull of supp(p).
inline MonomialBasis half_newton_basis(const Form& p) {
  if (p.is_zero()) throw std::invalid_argument("half_newton_basis of the zero form");
  const int m = *p.degree();
  if (m % 2 != 0) throw std::invalid_argument("odd degree " + std::to_string(m) + " has no square-root basis");
  MonomialBasis basis{p.n_vars(), m / 2, {}};
  const auto support = p.support();
  // axis-aligned bounding box prefilter
  Exponent lo(p.n_vars(), m), hi(p.n_vars(), 0);
  for (const auto& e : support)
    for (int i = 0; i < p.n_vars(); ++i) {
      lo[i] = std::min(lo[i], e[i]);
      hi[i] = std::max(hi[i], e[i]);
    }
  for (auto& beta : monomials_of_degree(p.n_vars(), m / 2)) {
    Exponent twice = exponent_sum(beta, beta);
    bool boxed = true;
    for (int i = 0; i < p.n_vars(); ++i) boxed = boxed && twice[i] >= lo[i] && twice[i] <= hi[i];
    if (boxed && in_convex_hull(support, twice)) basis.monomials.push_back(std::move(beta));
  }
  return basis;
}

/// Drops monomials whose diagonal Gram entry is forced to zero: 2*beta is
/// neither in supp(p) nor a sum of two distinct kept monomials. Iterated to
/// a fixed point. Such monomials cannot occur in any square summand.
inline MonomialBasis prune_diagonally_inconsistent(const Form& p, MonomialBasis basis) {
  for (;;) {
    std::set<Exponent> cross;
    const auto& mons = basis.monomials;
    for (std::size_t i = 0; i < mons.size(); ++i)
      for (std::size_t j = i + 1; j < mons.size(); ++j) cross.insert(exponent_sum(mons[i], mons[j]));
    std::vector<Exponent> kept;
    for (const auto& b : mons) {
      Exponent twice = exponent_sum(b, b);
      if (p.coefficient(twice) != 0 || cross.count(twice)) kept.push_back(b);
    }
    if (kept.size() == mons.size()) return basis;
    basis.monomials = std::move(kept);
  }
}

/// True when every monomial of `required` appears in `basis`.
inline bool basis_contains(const MonomialBasis& basis, const MonomialBasis& required) {
  std::set<Exponent> have(basis.monomials.begin(), basis.monomials.end());
  for (const auto& e : required.monomials)
    if (!have.count(e)) return false;
  return true;
}

}  // namespace sosc
