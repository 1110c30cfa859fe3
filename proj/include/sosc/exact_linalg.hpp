#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sosc/rational.hpp"

namespace sosc {

/// Dense row-major matrix over the rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static RationalMatrix identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static RationalMatrix from_rows(const std::vector<std::vector<Rational>>& rows) {
    if (rows.empty()) return {};
    RationalMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw std::invalid_argument("ragged matrix rows");
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RationalMatrix transpose() const {
    RationalMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool is_symmetric() const {
    if (!is_square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product dimension mismatch");
    RationalMatrix c(a.rows_, b.cols_);
    Rational t;
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Rational& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          if (b(k, j) == 0) continue;
          t = aik * b(k, j);
          c(i, j) += t;
        }
      }
    return c;
  }

  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

inline Rational determinant(RationalMatrix m) {
  if (!m.is_square()) throw std::invalid_argument("determinant of non-square matrix");
  const std::size_t n = m.rows();
  Rational det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && m(piv, k) == 0) ++piv;
    if (piv == n) return 0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      det = -det;
    }
    det *= m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (m(i, k) == 0) continue;
      Rational f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det;
}

struct RowEchelon {
  RationalMatrix reduced;
  std::vector<std::size_t> pivot_cols;
  std::size_t rank() const { return pivot_cols.size(); }
};

/// Reduced row echelon form by exact Gauss-Jordan elimination.
inline RowEchelon rref(RationalMatrix m) {
  RowEchelon out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t piv = row;
    while (piv < m.rows() && m(piv, col) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != row)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(row, j), m(piv, j));
    Rational inv = 1 / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j) m(row, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == 0) continue;
      Rational f = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j)
        if (m(row, j) != 0) m(i, j) -= f * m(row, j);
    }
    out.pivot_cols.push_back(col);
    ++row;
  }
  out.reduced = std::move(m);
  return out;
}

/// Columns form a basis of {x : m x = 0}.
inline RationalMatrix nullspace_basis(const RationalMatrix& m) {
  RowEchelon e = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : e.pivot_cols) is_pivot[c] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (!is_pivot[c]) free_cols.push_back(c);
  RationalMatrix basis(m.cols(), free_cols.size());
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    basis(free_cols[k], k) = 1;
    for (std::size_t r = 0; r < e.pivot_cols.size(); ++r) basis(e.pivot_cols[r], k) = -e.reduced(r, free_cols[k]);
  }
  return basis;
}

/// Exact positive-semidefiniteness by fraction-free symmetric elimination
/// (Bareiss) with diagonal pivoting. A zero diagonal entry is accepted only
/// when its whole remaining row vanishes.
inline bool is_psd_exact(const RationalMatrix& a) {
  if (!a.is_symmetric()) return false;
  const std::size_t n = a.rows();
  Integer lcm = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), a(i, j).get_den_mpz_t());
  std::vector<Integer> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = a(i, j).get_num() * (lcm / a(i, j).get_den());
  auto at = [&](std::size_t i, std::size_t j) -> Integer& { return m[i * n + j]; };

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Integer prev = 1;
  Integer t;
  for (std::size_t k = 0; k < n; ++k) {
    std::optional<std::size_t> pick;
    for (std::size_t s = k; s < n; ++s) {
      std::size_t i = order[s];
      int sign = sgn(at(i, i));
      if (sign < 0) return false;
      if (sign == 0) {
        for (std::size_t u = k; u < n; ++u)
          if (at(i, order[u]) != 0) return false;
      } else if (!pick) {
        pick = s;
      }
    }
    if (!pick) return true;
    std::swap(order[k], order[*pick]);
    const std::size_t p = order[k];
    for (std::size_t s = k + 1; s < n; ++s) {
      std::size_t i = order[s];
      for (std::size_t u = s; u < n; ++u) {
        std::size_t j = order[u];
        t = at(p, p) * at(i, j) - at(i, p) * at(p, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        at(i, j) = t;
        at(j, i) = t;
      }
    }
    prev = at(p, p);
  }
  return true;
}

/// a = P^T L D L^T P with unit lower-triangular L. `perm[k]` is the original
/// index eliminated at step k; `rank` pivots are positive, the rest are zero.
struct LdltDecomposition {
  std::vector<std::size_t> perm;
  RationalMatrix lower;
  std::vector<Rational> pivots;
  std::size_t rank = 0;
  bool psd = false;
};

inline LdltDecomposition ldlt_decompose(const RationalMatrix& a) {
  LdltDecomposition out;
  if (!a.is_symmetric()) return out;
  const std::size_t n = a.rows();
  RationalMatrix s = a;
  out.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.perm[i] = i;
  out.lower = RationalMatrix(n, n);
  out.pivots.assign(n, Rational(0));
  auto& ord = out.perm;
  for (std::size_t k = 0; k < n; ++k) {
    std::optional<std::size_t> pick;
    for (std::size_t t = k; t < n; ++t) {
      std::size_t i = ord[t];
      if (s(i, i) < 0) return out;
      if (s(i, i) == 0) {
        for (std::size_t u = k; u < n; ++u)
          if (s(i, ord[u]) != 0) return out;
      } else if (!pick) {
        pick = t;
      }
    }
    if (!pick) {
      for (std::size_t t = k; t < n; ++t) out.lower(t, t) = 1;
      break;
    }
    std::swap(ord[k], ord[*pick]);
    // swap already-computed multipliers along with the ordering
    for (std::size_t c = 0; c < k; ++c) std::swap(out.lower(k, c), out.lower(*pick, c));
    const std::size_t p = ord[k];
    const Rational d = s(p, p);
    out.pivots[k] = d;
    out.lower(k, k) = 1;
    ++out.rank;
    for (std::size_t t = k + 1; t < n; ++t) {
      std::size_t i = ord[t];
      if (s(i, p) == 0) continue;
      Rational l = s(i, p) / d;
      out.lower(t, k) = l;
      for (std::size_t u = t; u < n; ++u) {
        std::size_t j = ord[u];
        if (s(p, j) == 0) continue;
        s(i, j) -= l * s(p, j);
        if (i != j) s(j, i) = s(i, j);
      }
    }
  }
  out.psd = true;
  return out;
}

/// Rows of a linear system that are independent, plus whether the dropped
/// rows are consistent with the kept ones.
struct IndependentRows {
  std::vector<std::size_t> kept;
  bool consistent = true;
};

/// Greedy selection of linearly independent rows of [a | b] in order.
inline IndependentRows select_independent_rows(const RationalMatrix& a, const std::vector<Rational>& b) {
  IndependentRows out;
  const std::size_t cols = a.cols();
  // echelon basis rows (augmented), each with a pivot column
  std::vector<std::vector<Rational>> basis;
  std::vector<std::size_t> pivots;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::vector<Rational> v(cols + 1);
    for (std::size_t j = 0; j < cols; ++j) v[j] = a(r, j);
    v[cols] = b[r];
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Rational f = v[pivots[k]];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= cols; ++j)
        if (basis[k][j] != 0) v[j] -= f * basis[k][j];
    }
    std::size_t piv = cols;
    for (std::size_t j = 0; j < cols; ++j)
      if (v[j] != 0) {
        piv = j;
        break;
      }
    if (piv == cols) {
      if (v[cols] != 0) out.consistent = false;
      continue;
    }
    Rational inv = 1 / v[piv];
    for (auto& x : v) x *= inv;
    // keep basis fully reduced in its pivot columns
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Rational f = basis[k][piv];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= cols; ++j)
        if (v[j] != 0) basis[k][j] -= f * v[j];
    }
    basis.push_back(std::move(v));
    pivots.push_back(piv);
    out.kept.push_back(r);
  }
  return out;
}

/// Exact Euclidean projection onto {x : a x = b} for a with full row rank.
/// The normal-equation matrix a a^T is factored once and reused.
class AffineProjector {
 public:
  AffineProjector(RationalMatrix a, std::vector<Rational> b) : a_(std::move(a)), b_(std::move(b)) {
    const std::size_t m = a_.rows();
    // sparse row supports speed up the Gram products for block-structured systems
    support_.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < a_.cols(); ++j)
        if (a_(i, j) != 0) support_[i].push_back(j);
    RationalMatrix g(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = i; k < m; ++k) {
        Rational s = 0;
        const auto& si = support_[i];
        const auto& sk = support_[k];
        std::size_t x = 0, y = 0;
        while (x < si.size() && y < sk.size()) {
          if (si[x] < sk[y]) {
            ++x;
          } else if (sk[y] < si[x]) {
            ++y;
          } else {
            s += a_(i, si[x]) * a_(k, sk[y]);
            ++x;
            ++y;
          }
        }
        g(i, k) = s;
        g(k, i) = s;
      }
    factor(std::move(g));
  }

  std::size_t dimension() const { return a_.cols(); }

  std::vector<Rational> project(const std::vector<Rational>& x) const {
    const std::size_t m = a_.rows();
    std::vector<Rational> r(m);
    for (std::size_t i = 0; i < m; ++i) {
      Rational s = -b_[i];
      for (auto j : support_[i]) s += a_(i, j) * x[j];
      r[i] = s;
    }
    std::vector<Rational> w = solve(std::move(r));
    std::vector<Rational> out = x;
    for (std::size_t i = 0; i < m; ++i) {
      if (w[i] == 0) continue;
      for (auto j : support_[i]) out[j] -= a_(i, j) * w[i];
    }
    return out;
  }

 private:
  // LU without pivoting is safe: a a^T is symmetric positive definite.
  void factor(RationalMatrix g) {
    const std::size_t m = g.rows();
    for (std::size_t k = 0; k < m; ++k) {
      if (g(k, k) == 0) throw std::invalid_argument("constraint rows are not independent");
      for (std::size_t i = k + 1; i < m; ++i) {
        if (g(i, k) == 0) continue;
        g(i, k) /= g(k, k);
        for (std::size_t j = k + 1; j < m; ++j)
          if (g(k, j) != 0) g(i, j) -= g(i, k) * g(k, j);
      }
    }
    lu_ = std::move(g);
  }

  std::vector<Rational> solve(std::vector<Rational> r) const {
    const std::size_t m = lu_.rows();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < i; ++k)
        if (lu_(i, k) != 0 && r[k] != 0) r[i] -= lu_(i, k) * r[k];
    for (std::size_t ii = m; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < m; ++k)
        if (lu_(ii, k) != 0 && r[k] != 0) r[ii] -= lu_(ii, k) * r[k];
      r[ii] /= lu_(ii, ii);
    }
    return r;
  }

  RationalMatrix a_;
  std::vector<Rational> b_;
  std::vector<std::vector<std::size_t>> support_;
  RationalMatrix lu_;
};

/// LLL reduction of linearly independent integer rows, exact Gram-Schmidt.
inline void lll_reduce(std::vector<std::vector<Integer>>& b, const Rational& delta = Rational(99, 100)) {
  const std::size_t n = b.size();
  if (n < 2) return;
  std::vector<std::vector<Rational>> mu(n, std::vector<Rational>(n));
  std::vector<Rational> big_b(n);
  std::vector<std::vector<Rational>> star(n);
  for (std::size_t i = 0; i < n; ++i) {
    star[i].assign(b[i].begin(), b[i].end());
    for (std::size_t j = 0; j < i; ++j) {
      Rational s = 0;
      for (std::size_t t = 0; t < b[i].size(); ++t) s += b[i][t] * star[j][t];
      mu[i][j] = s / big_b[j];
      for (std::size_t t = 0; t < b[i].size(); ++t) star[i][t] -= mu[i][j] * star[j][t];
    }
    big_b[i] = 0;
    for (const auto& v : star[i]) big_b[i] += v * v;
    if (big_b[i] == 0) throw std::invalid_argument("lll_reduce needs independent rows");
  }
  auto size_reduce = [&](std::size_t k, std::size_t l) {
    Rational twice = 2 * mu[k][l];
    if (abs(twice) <= 1) return;
    Rational shifted = mu[k][l] + Rational(1, 2);
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
    for (std::size_t t = 0; t < b[k].size(); ++t) b[k][t] -= q * b[l][t];
    mu[k][l] -= q;
    for (std::size_t j = 0; j < l; ++j) mu[k][j] -= q * mu[l][j];
  };
  std::size_t k = 1;
  while (k < n) {
    size_reduce(k, k - 1);
    if (big_b[k] < (delta - mu[k][k - 1] * mu[k][k - 1]) * big_b[k - 1]) {
      const Rational m = mu[k][k - 1];
      const Rational bn = big_b[k] + m * m * big_b[k - 1];
      mu[k][k - 1] = m * big_b[k - 1] / bn;
      big_b[k] = big_b[k - 1] * big_b[k] / bn;
      big_b[k - 1] = bn;
      std::swap(b[k], b[k - 1]);
      for (std::size_t j = 0; j + 1 < k; ++j) std::swap(mu[k][j], mu[k - 1][j]);
      for (std::size_t i = k + 1; i < n; ++i) {
        const Rational t = mu[i][k];
        mu[i][k] = mu[i][k - 1] - m * t;
        mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k];
      }
      if (k > 1) --k;
    } else {
      for (std::size_t l = k - 1; l-- > 0;) size_reduce(k, l);
      ++k;
    }
  }
}

}  // namespace sosc
