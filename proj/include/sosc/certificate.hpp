#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sosc/exact_linalg.hpp"
#include "sosc/form.hpp"
#include "sosc/newton.hpp"

namespace sosc {

/// One linear equation of the Gram parameterization: the Gram entries
/// G[i][j] (i <= j) with basis[i] + basis[j] == monomial must sum to the
/// coefficient of that monomial, off-diagonal entries counted twice.
struct GramEquation {
  Exponent monomial;
  std::vector<std::pair<int, int>> entries;
  Rational rhs;
};

struct GramSystem {
  MonomialBasis basis;
  std::vector<GramEquation> equations;
  /// Monomials of p that no pair of basis monomials reaches.
  std::vector<Exponent> unreachable;
};

inline GramSystem gram_system(const Form& p, const MonomialBasis& basis) {
  if (!p.is_zero() && *p.degree() != 2 * basis.half_degree)
    throw std::invalid_argument("basis degree does not match half the form degree");
  GramSystem sys{basis, {}, {}};
  std::map<Exponent, std::size_t, GrlexGreater> index;
  const auto& mons = basis.monomials;
  for (std::size_t i = 0; i < mons.size(); ++i)
    for (std::size_t j = i; j < mons.size(); ++j) index.try_emplace(exponent_sum(mons[i], mons[j]), 0);
  for (auto& [g, pos] : index) {
    pos = sys.equations.size();
    sys.equations.push_back({g, {}, p.coefficient(g)});
  }
  for (std::size_t i = 0; i < mons.size(); ++i)
    for (std::size_t j = i; j < mons.size(); ++j)
      sys.equations[index.at(exponent_sum(mons[i], mons[j]))].entries.emplace_back(static_cast<int>(i),
                                                                                   static_cast<int>(j));
  for (const auto& [e, c] : p.terms())
    if (!index.count(e)) sys.unreachable.push_back(e);
  return sys;
}

/// p = z^T G z with z the basis monomial vector and G exactly PSD.
struct GramCertificate {
  MonomialBasis basis;
  RationalMatrix gram;
};

/// Linear functional on degree-m monomials whose moment matrix over the
/// basis is PSD while its value on p is negative.
struct DualCertificate {
  MonomialBasis basis;
  std::map<Exponent, Rational, GrlexGreater> functional;
};

namespace detail {
inline bool basis_well_formed(const MonomialBasis& basis) {
  std::set<Exponent> seen;
  for (const auto& b : basis.monomials) {
    if (static_cast<int>(b.size()) != basis.n_vars) return false;
    if (total_degree(b) != basis.half_degree) return false;
    for (int v : b)
      if (v < 0) return false;
    if (!seen.insert(b).second) return false;
  }
  return true;
}
}  // namespace detail

/// z^T G z as a form.
inline Form expand_gram(const MonomialBasis& basis, const RationalMatrix& gram) {
  if (gram.rows() != basis.size() || gram.cols() != basis.size())
    throw std::invalid_argument("Gram matrix size does not match basis");
  FormAccumulator acc(basis.n_vars);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j)
      if (gram(i, j) != 0) acc.add(exponent_sum(basis.monomials[i], basis.monomials[j]), gram(i, j));
  return std::move(acc).finish();
}

/// Moment matrix M[i][j] = L(basis[i] + basis[j]); throws if L is undefined there.
inline RationalMatrix moment_matrix(const DualCertificate& dual) {
  const auto& mons = dual.basis.monomials;
  RationalMatrix m(mons.size(), mons.size());
  for (std::size_t i = 0; i < mons.size(); ++i)
    for (std::size_t j = i; j < mons.size(); ++j) {
      auto it = dual.functional.find(exponent_sum(mons[i], mons[j]));
      if (it == dual.functional.end()) throw std::invalid_argument("functional undefined on a basis pair sum");
      m(i, j) = it->second;
      m(j, i) = it->second;
    }
  return m;
}

/// L(p); nullopt when L is undefined on part of supp(p).
inline std::optional<Rational> apply_functional(const DualCertificate& dual, const Form& p) {
  Rational v = 0;
  for (const auto& [e, c] : p.terms()) {
    auto it = dual.functional.find(e);
    if (it == dual.functional.end()) return std::nullopt;
    v += c * it->second;
  }
  return v;
}

inline bool verify_gram_exact(const Form& p, const GramCertificate& cert) {
  if (cert.basis.n_vars != p.n_vars() || !detail::basis_well_formed(cert.basis)) return false;
  if (cert.gram.rows() != cert.basis.size() || cert.gram.cols() != cert.basis.size()) return false;
  if (!cert.gram.is_symmetric()) return false;
  if (!cert.basis.empty() && !p.is_zero() && *p.degree() != 2 * cert.basis.half_degree) return false;
  if (expand_gram(cert.basis, cert.gram) != p) return false;
  return is_psd_exact(cert.gram);
}

/// Checks the moment matrix is PSD, L(p) < 0, and that the basis holds every
/// monomial a square summand of p could use (the half Newton polytope), so
/// the functional separates p from the whole sum-of-squares cone.
inline bool verify_dual_exact(const Form& p, const DualCertificate& dual) {
  if (p.is_zero() || *p.degree() % 2 != 0) return false;
  if (dual.basis.n_vars != p.n_vars() || !detail::basis_well_formed(dual.basis)) return false;
  if (dual.basis.half_degree * 2 != *p.degree()) return false;
  for (const auto& [e, v] : dual.functional)
    if (static_cast<int>(e.size()) != p.n_vars() || total_degree(e) != *p.degree()) return false;
  auto value = apply_functional(dual, p);
  if (!value || *value >= 0) return false;
  RationalMatrix m;
  try {
    m = moment_matrix(dual);
  } catch (const std::invalid_argument&) {
    return false;
  }
  if (!is_psd_exact(m)) return false;
  return basis_contains(dual.basis, half_newton_basis(p));
}

/// weight * root^2 summand of a decomposition.
struct WeightedSquare {
  Rational weight;
  Form root;
};

/// Sum of weight_k * g_k^2 equal to the certified form, from an exact LDL^T
/// of the Gram matrix. Makes no promise about the number of squares beyond
/// rank(G).
inline std::vector<WeightedSquare> extract_squares(const Form& p, const GramCertificate& cert) {
  if (!verify_gram_exact(p, cert)) throw std::invalid_argument("invalid Gram certificate");
  LdltDecomposition f = ldlt_decompose(cert.gram);
  std::vector<WeightedSquare> out;
  const std::size_t n = cert.basis.size();
  for (std::size_t k = 0; k < f.rank; ++k) {
    FormAccumulator root(cert.basis.n_vars);
    for (std::size_t t = k; t < n; ++t)
      if (f.lower(t, k) != 0) root.add(cert.basis.monomials[f.perm[t]], f.lower(t, k));
    out.push_back({f.pivots[k], std::move(root).finish()});
  }
  return out;
}

/// Sum of weight * root^2.
inline Form expand_squares(int n_vars, const std::vector<WeightedSquare>& squares) {
  Form total(n_vars);
  for (const auto& s : squares) total = add(total, scale(mul(s.root, s.root), s.weight));
  return total;
}

}  // namespace sosc
