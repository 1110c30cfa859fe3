#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "sosc/certificate.hpp"
#include "sosc/exact_linalg.hpp"
#include "sosc/form.hpp"
#include "sosc/newton.hpp"
#include "sosc/sdp.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace sosc {

enum class BasisMode { Newton, Full };

struct SosOptions {
  SdpOptions sdp;
  /// Smallest relative eigenvalue margin at which a numeric Gram matrix is
  /// rounded directly; below it the face is reduced first.
  double margin_threshold = 1e-7;
  /// Rounding denominators 2^bits tried in order.
  std::vector<unsigned> denominator_bits = {10, 16, 24, 32};
  BasisMode basis_mode = BasisMode::Newton;
  /// Look for a negative value on a small integer grid before any SDP.
  bool sample_fast_path = true;
  int max_facial_rounds = 4;
  /// Total SDP solves allowed in the face search.
  int max_face_solves = 16;
  /// Negative margins above -boundary_band still get a facial-reduction attempt.
  double boundary_band = 1e-5;
  /// Restrict the Gram matrix by rational zeros of p found on a small
  /// integer grid plus the hints below (each is checked exactly).
  bool use_rational_zeros = true;
  std::vector<std::vector<Rational>> zero_hints;
  /// Largest denominator accepted when snapping a numeric kernel to rationals.
  std::int64_t kernel_max_denominator = 1 << 12;
  /// Re-solve the dual in extended precision when double precision leaves
  /// the verdict open, for bases up to this size (0 disables it).
  std::size_t extended_precision_max_basis = 64;
  SdpOptions extended_sdp{1e-24, 1e-24, 200, 0.95};
  std::vector<unsigned> extended_denominator_bits = {32, 48, 64, 80, 96};
};

enum class SosStatus { Feasible, Infeasible, Undecided };

inline const char* to_string(SosStatus s) {
  switch (s) {
    case SosStatus::Feasible:
      return "Feasible";
    case SosStatus::Infeasible:
      return "Infeasible";
    case SosStatus::Undecided:
      return "Undecided";
  }
  return "?";
}

struct SosDiagnostics {
  int sdp_iterations = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  /// Optimal smallest-eigenvalue margin of the last SDP, relative to the
  /// largest coefficient of the form.
  double margin = 0;
  int facial_rounds = 0;
  unsigned denominator_bits = 0;
  std::size_t basis_size = 0;
  std::string route;
};

struct SosVerdict {
  SosStatus status = SosStatus::Undecided;
  std::optional<GramCertificate> certificate;
  std::optional<DualCertificate> dual;
  SosDiagnostics diagnostics;
};

/// Uniform-measure moment of x^e on the unit sphere:
/// prod (e_i - 1)!! / prod_{k < m/2} (n + 2k) when every e_i is even, else 0.
inline Rational sphere_moment(const Exponent& e) {
  Integer num = 1;
  int m = 0;
  for (int v : e) {
    if (v % 2 != 0) return 0;
    for (int k = v - 1; k > 1; k -= 2) num *= k;
    m += v;
  }
  Integer den = 1;
  const int n = static_cast<int>(e.size());
  for (int k = 0; k < m / 2; ++k) den *= n + 2 * k;
  return make_rational(num, den);
}

/// Working scalar of the extended-precision dual solve: 113-bit mantissa.
using ExtendedFloat = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<113, boost::multiprecision::digit_base_2>, boost::multiprecision::et_off>;

namespace detail {

inline std::size_t svec_index(std::size_t k, std::size_t l, std::size_t r) {
  if (k > l) std::swap(k, l);
  return k * r - k * (k - 1) / 2 + (l - k);
}

/// The Gram system restricted to a face {G = W H W^T}: one svec row per
/// independent equation.
struct FaceSystem {
  RationalMatrix face;  // n x r
  std::size_t dim = 0;  // r
  RationalMatrix rows;  // independent equations over svec(H)
  std::vector<Rational> rhs;
  bool consistent = true;
};

inline FaceSystem build_face_system(const GramSystem& sys, const RationalMatrix& face) {
  FaceSystem fs;
  fs.face = face;
  const std::size_t n = face.rows();
  const std::size_t r = face.cols();
  fs.dim = r;
  const std::size_t nsvec = r * (r + 1) / 2;
  const bool identity = (face == RationalMatrix::identity(n));
  RationalMatrix all(sys.equations.size(), nsvec);
  std::vector<Rational> rhs;
  for (std::size_t q = 0; q < sys.equations.size(); ++q) {
    const auto& eq = sys.equations[q];
    rhs.push_back(eq.rhs);
    if (identity) {
      for (auto [i, j] : eq.entries) all(q, svec_index(i, j, r)) += (i == j) ? 1 : 2;
      continue;
    }
    // W^T A W with A the 0/1 pattern of this equation
    RationalMatrix reduced(r, r);
    for (auto [i, j] : eq.entries)
      for (std::size_t k = 0; k < r; ++k) {
        const Rational& wik = face(i, k);
        const Rational& wjk = face(j, k);
        if (wik == 0 && wjk == 0) continue;
        for (std::size_t l = k; l < r; ++l) {
          Rational v = wik * face(j, l);
          if (i != j) v += wjk * face(i, l);
          if (v != 0) reduced(k, l) += v;
        }
      }
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t l = k; l < r; ++l)
        if (reduced(k, l) != 0) all(q, svec_index(k, l, r)) = (k == l) ? reduced(k, l) : Rational(2 * reduced(k, l));
  }
  IndependentRows ind = select_independent_rows(all, rhs);
  fs.consistent = ind.consistent;
  fs.rows = RationalMatrix(ind.kept.size(), nsvec);
  for (std::size_t q = 0; q < ind.kept.size(); ++q) {
    for (std::size_t c = 0; c < nsvec; ++c) fs.rows(q, c) = all(ind.kept[q], c);
    fs.rhs.push_back(rhs[ind.kept[q]]);
  }
  return fs;
}

template <class T>
T rational_to(const Rational& q) {
  if constexpr (std::is_same_v<T, double>) {
    return q.get_d();
  } else {
    return T(q.get_num().get_str()) / T(q.get_den().get_str());
  }
}

/// Exact value of a working-precision number, to 106 bits.
template <class T>
Rational rational_from(const T& v) {
  const double hi = static_cast<double>(v);
  if constexpr (std::is_same_v<T, double>) {
    return Rational(hi);
  } else {
    const double lo = static_cast<double>(T(v - T(hi)));
    return Rational(hi) + Rational(lo);
  }
}

/// max t  s.t.  rows . svec(H) + t * rows . svec(I) = rhs / scale,  H - tI PSD
template <class T = double>
BasicSdpProblem<T> margin_problem(const FaceSystem& fs, double scale) {
  using Matrix = typename BasicSdpProblem<T>::Matrix;
  using Vector = typename BasicSdpProblem<T>::Vector;
  BasicSdpProblem<T> p;
  const auto r = static_cast<int>(fs.dim);
  const auto m = static_cast<Eigen::Index>(fs.rows.rows());
  const Rational exact_scale(scale);
  p.dim = r;
  p.constraints.resize(m);
  p.rhs.resize(m);
  p.free_cols = Matrix::Zero(m, 1);
  for (Eigen::Index q = 0; q < m; ++q) {
    Rational trace = 0;
    for (int k = 0; k < r; ++k)
      for (int l = k; l < r; ++l) {
        const Rational& c = fs.rows(q, svec_index(k, l, fs.dim));
        if (c == 0) continue;
        if (k == l) {
          p.constraints[q].push_back({k, l, rational_to<T>(c)});
          trace += c;
        } else {
          p.constraints[q].push_back({k, l, rational_to<T>(Rational(c / 2))});
        }
      }
    p.rhs(q) = rational_to<T>(Rational(fs.rhs[q] / exact_scale));
    p.free_cols(q, 0) = rational_to<T>(trace);
  }
  p.cost = Matrix::Zero(r, r);
  p.free_cost = Vector::Constant(1, T(-1));
  return p;
}

inline double coefficient_scale(const Form& p) {
  double s = 0;
  for (const auto& [e, c] : p.terms()) s = std::max(s, std::abs(to_double(c)));
  return s > 0 ? s : 1.0;
}

inline RationalMatrix unsvec(const std::vector<Rational>& h, std::size_t r) {
  RationalMatrix m(r, r);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t l = k; l < r; ++l) {
      m(k, l) = h[svec_index(k, l, r)];
      m(l, k) = m(k, l);
    }
  return m;
}

/// Rounds H to each denominator, projects exactly onto the face equations
/// and returns the first exactly PSD result.
inline std::optional<RationalMatrix> round_on_face(const FaceSystem& fs, const AffineProjector& proj,
                                                  const Eigen::MatrixXd& h, const std::vector<unsigned>& bits,
                                                  unsigned* used_bits) {
  const std::size_t r = fs.dim;
  for (unsigned b : bits) {
    Integer den = Integer(1) << b;
    std::vector<Rational> v(r * (r + 1) / 2);
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t l = k; l < r; ++l)
        v[svec_index(k, l, r)] = round_to_denominator(0.5 * (h(k, l) + h(l, k)), den);
    RationalMatrix hr = unsvec(proj.project(v), r);
    if (is_psd_exact(hr)) {
      if (used_bits) *used_bits = b;
      return hr;
    }
  }
  return std::nullopt;
}

/// Gauss-Jordan with column pivoting on numeric rows, then each entry
/// snapped to the simplest rational within tol. Returns the snapped rows.
inline std::optional<RationalMatrix> snap_row_space(Eigen::MatrixXd rows, double tol, std::int64_t max_den) {
  const auto k = rows.rows();
  const auto r = rows.cols();
  std::vector<bool> used(r, false);
  for (Eigen::Index row = 0; row < k; ++row) {
    Eigen::Index pc = -1;
    double best = 0;
    for (Eigen::Index c = 0; c < r; ++c)
      if (!used[c] && std::abs(rows(row, c)) > best) {
        best = std::abs(rows(row, c));
        pc = c;
      }
    if (pc < 0 || best < 1e-12) return std::nullopt;
    used[pc] = true;
    rows.row(row) /= rows(row, pc);
    for (Eigen::Index o = 0; o < k; ++o)
      if (o != row) rows.row(o) -= rows(o, pc) * rows.row(row);
  }
  RationalMatrix out(k, r);
  for (Eigen::Index row = 0; row < k; ++row)
    for (Eigen::Index c = 0; c < r; ++c) {
      double v = rows(row, c);
      if (std::abs(v) < tol) continue;
      auto q = simplest_rational(v, tol * std::max(1.0, std::abs(v)), max_den);
      if (!q) return std::nullopt;
      out(row, c) = *q;
    }
  return out;
}

/// Short integer vectors orthogonal to a numeric kernel (r x k), from LLL on
/// [I | K / accuracy]. Their span is the largest rational face missing the
/// kernel, which still works when the kernel itself is irrational.
inline std::optional<RationalMatrix> relation_face(const Eigen::MatrixXd& kernel, double accuracy) {
  const auto r = kernel.rows();
  const auto k = kernel.cols();
  const double s = 1.0 / accuracy;
  std::vector<std::vector<Integer>> rows(r, std::vector<Integer>(r + k));
  for (Eigen::Index i = 0; i < r; ++i) {
    rows[i][i] = 1;
    for (Eigen::Index j = 0; j < k; ++j) rows[i][r + j] = integer_from_double(std::nearbyint(s * kernel(i, j)));
  }
  lll_reduce(rows);
  std::vector<std::pair<double, Eigen::VectorXd>> found;
  for (const auto& row : rows) {
    Eigen::VectorXd a(r);
    for (Eigen::Index i = 0; i < r; ++i) a(i) = row[i].get_d();
    if ((kernel.transpose() * a).norm() <= 10 * accuracy * a.norm()) found.emplace_back(a.norm(), a);
  }
  if (found.empty()) return std::nullopt;
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  if (found.size() > static_cast<std::size_t>(r - k)) found.resize(r - k);
  RationalMatrix w(r, found.size());
  for (std::size_t c = 0; c < found.size(); ++c)
    for (Eigen::Index i = 0; i < r; ++i) w(i, c) = Rational(found[c].second(i));
  return w;
}

/// Candidate rational bases (r x r') of the range of a numerically singular
/// PSD matrix H, most convincing eigenvalue gap first. Either the kernel or
/// the range is snapped, whichever has fewer vectors, falling back to the
/// other.
inline std::vector<RationalMatrix> face_candidates(const Eigen::MatrixXd& h, std::int64_t max_den) {
  std::vector<RationalMatrix> out;
  const auto r = h.rows();
  if (r == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((0.5 * (h + h.transpose())).eval());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev(r - 1);
  if (!(top > 0)) return out;
  std::vector<std::pair<double, Eigen::Index>> gaps;
  for (Eigen::Index i = 0; i + 1 < r; ++i) {
    if (ev(i) > 1e-2 * top) break;
    double ratio = ev(i + 1) / std::max(ev(i), 1e-16 * top);
    if (ratio >= 1e2) gaps.emplace_back(ratio, i + 1);
  }
  std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (gaps.size() > 4) gaps.resize(4);
  for (auto [ratio, k] : gaps) {
    const double accuracy = std::clamp(std::sqrt(std::max(ev(k - 1), 1e-16 * top) / ev(k)), 1e-12, 1e-2);
    if (auto w = relation_face(es.eigenvectors().leftCols(k), accuracy)) out.push_back(std::move(*w));
    // eigenvector error scales like sqrt(lambda_small / lambda_gap), but the
    // iterate itself may be less accurate, so looser tolerances follow
    const double eig_tol = std::clamp(10 * std::sqrt(std::max(ev(k - 1), 1e-16 * top) / ev(k)), 1e-10, 1e-3);
    for (double tol : {eig_tol, 1e-6, 1e-5, 1e-4, 1e-3}) {
      if (tol < eig_tol) continue;
      auto from_kernel = [&]() -> std::optional<RationalMatrix> {
        auto kernel = snap_row_space(es.eigenvectors().leftCols(k).transpose(), tol, max_den);
        if (!kernel) return std::nullopt;
        RationalMatrix c = nullspace_basis(*kernel);
        if (c.cols() != static_cast<std::size_t>(r - k)) return std::nullopt;
        return c;
      };
      auto from_range = [&]() -> std::optional<RationalMatrix> {
        auto range = snap_row_space(es.eigenvectors().rightCols(r - k).transpose(), tol, max_den);
        if (!range) return std::nullopt;
        return range->transpose();
      };
      auto keep = [&](RationalMatrix c) {
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
      };
      if (auto c = k <= r - k ? from_kernel() : from_range()) {
        keep(std::move(*c));
        break;
      }
      if (auto c = k <= r - k ? from_range() : from_kernel()) {
        keep(std::move(*c));
        break;
      }
    }
  }
  return out;
}

/// Integer points (first non-zero coordinate positive) in a small box.
inline std::vector<std::vector<Rational>> zero_search_points(int n) {
  const int radius = n <= 3 ? 6 : n == 4 ? 2 : 1;
  std::vector<std::vector<Rational>> pts;
  std::vector<int> cur(n, -radius);
  for (;;) {
    int lead = 0;
    for (int v : cur)
      if (v != 0) {
        lead = v;
        break;
      }
    if (lead > 0) pts.emplace_back(cur.begin(), cur.end());
    int i = 0;
    while (i < n && cur[i] == radius) cur[i++] = -radius;
    if (i == n) break;
    ++cur[i];
  }
  return pts;
}

/// Every PSD Gram matrix G of p satisfies G z(x0) = 0 at a real zero x0,
/// so known rational zeros cut the face exactly. Returns the complement
/// basis (possibly with zero columns) or nullopt when no zero is known.
inline std::optional<RationalMatrix> zero_face(const Form& p, const MonomialBasis& basis,
                                               const std::vector<std::vector<Rational>>& hints) {
  std::vector<std::vector<Rational>> rows;
  auto consider = [&](const std::vector<Rational>& x) {
    if (static_cast<int>(x.size()) != p.n_vars()) return;
    bool nonzero = false;
    for (const auto& v : x) nonzero = nonzero || v != 0;
    if (!nonzero || evaluate(p, x) != 0) return;
    std::vector<Rational> z;
    bool any = false;
    for (const auto& b : basis.monomials) {
      Rational v = 1;
      for (std::size_t i = 0; i < b.size(); ++i) v *= pow(x[i], static_cast<unsigned>(b[i]));
      any = any || v != 0;
      z.push_back(std::move(v));
    }
    if (any) rows.push_back(std::move(z));
  };
  for (const auto& x : zero_search_points(p.n_vars())) consider(x);
  for (const auto& x : hints) consider(x);
  if (rows.empty()) return std::nullopt;
  RationalMatrix k(rows.size(), basis.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) k(i, j) = rows[i][j];
  return nullspace_basis(k);
}

inline GramCertificate pad_certificate(const GramCertificate& cert, const MonomialBasis& target) {
  GramCertificate out{target, RationalMatrix(target.size(), target.size())};
  std::map<Exponent, std::size_t> pos;
  for (std::size_t i = 0; i < target.size(); ++i) pos[target.monomials[i]] = i;
  for (std::size_t i = 0; i < cert.basis.size(); ++i)
    for (std::size_t j = 0; j < cert.basis.size(); ++j)
      out.gram(pos.at(cert.basis.monomials[i]), pos.at(cert.basis.monomials[j])) = cert.gram(i, j);
  return out;
}

inline std::vector<std::vector<Rational>> sample_points(int n) {
  std::vector<std::vector<Rational>> pts;
  int radius = n <= 3 ? 2 : (n <= 6 ? 1 : 0);
  if (radius == 0) return pts;
  std::vector<int> cur(n, -radius);
  for (;;) {
    pts.emplace_back(cur.begin(), cur.end());
    int i = 0;
    while (i < n && cur[i] == radius) cur[i++] = -radius;
    if (i == n) break;
    ++cur[i];
  }
  return pts;
}

}  // namespace detail

/// Numeric outcome of the max-margin Gram SDP.
enum class NumericStatus { PrimalInterior, PrimalBoundary, DualRay, Inconclusive };

inline const char* to_string(NumericStatus s) {
  switch (s) {
    case NumericStatus::PrimalInterior:
      return "primal-interior";
    case NumericStatus::PrimalBoundary:
      return "primal-boundary";
    case NumericStatus::DualRay:
      return "dual-ray";
    case NumericStatus::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct NumericGramSolution {
  NumericStatus status = NumericStatus::Inconclusive;
  /// Gram matrix over the basis, in the form's own units.
  Eigen::MatrixXd gram;
  /// Normalized separating functional (trace of its moment matrix is 1).
  std::map<Exponent, double, GrlexGreater> functional;
  /// Optimal smallest eigenvalue of the Gram matrix relative to the largest coefficient.
  double margin = 0;
  SdpSolution raw;
};

/// Solves  max t  s.t.  z^T G z = p,  G - tI PSD  over the system's basis.
/// t > 0 exhibits an interior Gram matrix; t < 0 yields a separating
/// functional from the dual. The empty system is answered with a 0x0 Gram.
inline NumericGramSolution sdp_feasibility(const GramSystem& sys, const SosOptions& opt = {}) {
  NumericGramSolution out;
  const std::size_t n = sys.basis.size();
  if (sys.equations.empty()) {
    bool zero = sys.unreachable.empty();
    out.status = zero ? NumericStatus::PrimalInterior : NumericStatus::Inconclusive;
    out.gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    return out;
  }
  double scale = 0;
  for (const auto& eq : sys.equations) scale = std::max(scale, std::abs(to_double(eq.rhs)));
  if (scale == 0) scale = 1;
  detail::FaceSystem fs = detail::build_face_system(sys, RationalMatrix::identity(n));
  SdpProblem prob = detail::margin_problem(fs, scale);
  out.raw = solve_sdp(prob, opt.sdp);
  const double t = out.raw.free_vars.size() ? out.raw.free_vars(0) : 0.0;
  out.margin = t;
  out.gram = scale * (out.raw.primal + t * Eigen::MatrixXd::Identity(n, n));
  for (std::size_t q = 0; q < sys.equations.size(); ++q) out.functional[sys.equations[q].monomial] = 0;
  // kept rows are a subset of the equations in order; identity face keeps them all
  Eigen::Index q = 0;
  for (const auto& eq : sys.equations) out.functional[eq.monomial] = -out.raw.dual(q++);
  if (out.raw.status == SdpStatus::NumericalBreakdown && out.raw.iterations < 3) return out;
  if (!sys.unreachable.empty())
    out.status = NumericStatus::DualRay;
  else if (t > opt.margin_threshold)
    out.status = NumericStatus::PrimalInterior;
  else if (t < -opt.margin_threshold)
    out.status = NumericStatus::DualRay;
  else if (std::abs(t) <= opt.margin_threshold)
    out.status = NumericStatus::PrimalBoundary;
  return out;
}

/// Rounds a numeric Gram matrix to a rational one that satisfies the
/// Gram equations exactly (exact least-squares projection) and checks it is
/// exactly PSD, escalating through the denominator schedule.
inline std::optional<GramCertificate> round_gram_to_rational(const Eigen::MatrixXd& gram, const GramSystem& sys,
                                                             const std::vector<unsigned>& denominator_bits,
                                                             unsigned* used_bits = nullptr) {
  if (!sys.unreachable.empty()) return std::nullopt;
  const std::size_t n = sys.basis.size();
  if (n == 0) return GramCertificate{sys.basis, RationalMatrix()};
  detail::FaceSystem fs = detail::build_face_system(sys, RationalMatrix::identity(n));
  if (!fs.consistent) return std::nullopt;
  AffineProjector proj(fs.rows, fs.rhs);
  auto g = detail::round_on_face(fs, proj, gram, denominator_bits, used_bits);
  if (!g) return std::nullopt;
  return GramCertificate{sys.basis, *g};
}

namespace detail {

inline std::optional<DualCertificate> point_evaluation_dual(const Form& p, const MonomialBasis& full) {
  const int m = *p.degree();
  for (const auto& pt : sample_points(p.n_vars())) {
    if (evaluate(p, pt) >= 0) continue;
    DualCertificate d{full, {}};
    for (const auto& g : monomials_of_degree(p.n_vars(), m)) {
      Rational v = 1;
      for (std::size_t i = 0; i < g.size(); ++i) v *= pow(pt[i], static_cast<unsigned>(g[i]));
      d.functional[g] = v;
    }
    if (verify_dual_exact(p, d)) return d;
  }
  return std::nullopt;
}

/// Blends the numeric functional with the sphere-moment functional (whose
/// moment matrix is positive definite) to gain an interior margin, then
/// rounds and verifies exactly. The blend is done in exact arithmetic so a
/// high-precision functional keeps its digits.
inline std::optional<DualCertificate> round_dual(const Form& p, const GramSystem& sys,
                                                 const std::map<Exponent, Rational, GrlexGreater>& numeric,
                                                 const std::vector<unsigned>& bits, unsigned* used_bits) {
  std::map<Exponent, Rational, GrlexGreater> center;
  Rational trace = 0;
  for (const auto& b : sys.basis.monomials) trace += sphere_moment(exponent_sum(b, b));
  for (const auto& eq : sys.equations) center[eq.monomial] = sphere_moment(eq.monomial) / trace;
  Rational value = 0, center_value = 0;
  for (const auto& eq : sys.equations) {
    value += eq.rhs * numeric.at(eq.monomial);
    center_value += eq.rhs * center.at(eq.monomial);
  }
  if (!(value < 0)) return std::nullopt;
  for (const char* frac_text : {"1/2", "4/5", "1/5", "1/20"}) {
    const Rational frac = parse_rational(frac_text);
    Rational weight = center_value > 0 ? Rational(frac * (-value) / center_value) : Rational(1);
    std::map<Exponent, Rational, GrlexGreater> blended;
    Rational top = 0;
    for (const auto& [e, v] : numeric) {
      Rational w = v + weight * center.at(e);
      top = std::max(top, abs(w));
      blended.emplace(e, std::move(w));
    }
    if (top == 0) continue;
    for (unsigned b : bits) {
      Integer den = Integer(1) << b;
      DualCertificate d{sys.basis, {}};
      for (const auto& [e, v] : blended) d.functional[e] = round_to_denominator(Rational(v / top), den);
      if (verify_dual_exact(p, d)) {
        if (used_bits) *used_bits = b;
        return d;
      }
    }
  }
  return std::nullopt;
}

inline std::map<Exponent, Rational, GrlexGreater> exact_functional(
    const std::map<Exponent, double, GrlexGreater>& numeric) {
  std::map<Exponent, Rational, GrlexGreater> out;
  for (const auto& [e, v] : numeric) out.emplace(e, Rational(v));
  return out;
}

/// Separating functional from the margin SDP solved in extended precision.
/// Returns the exact values of the numeric functional when the optimal
/// margin is negative.
template <class T>
std::optional<std::map<Exponent, Rational, GrlexGreater>> extended_precision_functional(const GramSystem& sys,
                                                                                       const SosOptions& opt,
                                                                                       int* iterations) {
  double scale = 0;
  for (const auto& eq : sys.equations) scale = std::max(scale, std::abs(to_double(eq.rhs)));
  if (scale == 0) return std::nullopt;
  FaceSystem fs = build_face_system(sys, RationalMatrix::identity(sys.basis.size()));
  if (!fs.consistent) return std::nullopt;
  BasicSdpSolution<T> s = solve_sdp(margin_problem<T>(fs, scale), opt.extended_sdp);
  if (iterations) *iterations += s.iterations;
  if (s.free_vars.size() == 0 || !(s.free_vars(0) < T(0))) return std::nullopt;
  // on the identity face every equation is kept, in order
  std::map<Exponent, Rational, GrlexGreater> out;
  for (std::size_t q = 0; q < sys.equations.size(); ++q)
    out.emplace(sys.equations[q].monomial, q < static_cast<std::size_t>(s.dual.size()) ? rational_from(T(-s.dual(q))) : Rational(0));
  return out;
}

}  // namespace detail

namespace detail {

/// Depth-first search over faces: solve the margin SDP on the current face,
/// round when the margin is positive, otherwise try each candidate
/// sub-face. Bounded by a total number of SDP solves.
struct FaceSearch {
  const Form& p;
  const GramSystem& sys;
  const SosOptions& opt;
  double scale;
  int budget;
  SosDiagnostics& diag;
  bool root_infeasible = false;
  bool interior = false;

  std::optional<GramCertificate> run(const FaceSystem& fs, int depth) {
    if (budget-- <= 0 || fs.dim == 0) return std::nullopt;
    SdpSolution s = solve_sdp(margin_problem(fs, scale), opt.sdp);
    diag.sdp_iterations += s.iterations;
    diag.primal_residual = s.primal_residual;
    diag.dual_residual = s.dual_residual;
    diag.facial_rounds = std::max(diag.facial_rounds, depth);
    if (s.status == SdpStatus::NumericalBreakdown && s.iterations < 3) return std::nullopt;
    const double t = s.free_vars(0);
    if (depth == 0) diag.margin = t;
    // slightly negative margins are usually a boundary face seen through solver noise
    if (t < -opt.boundary_band) {
      if (depth == 0) root_infeasible = true;
      return std::nullopt;
    }
    if (t > opt.margin_threshold) {
      const auto r = static_cast<Eigen::Index>(fs.dim);
      Eigen::MatrixXd h = scale * (s.primal + t * Eigen::MatrixXd::Identity(r, r));
      AffineProjector proj(fs.rows, fs.rhs);
      unsigned bits = 0;
      if (auto hr = round_on_face(fs, proj, h, opt.denominator_bits, &bits)) {
        GramCertificate cert{sys.basis, fs.face * *hr * fs.face.transpose()};
        if (verify_gram_exact(p, cert)) {
          diag.denominator_bits = bits;
          diag.margin = t;
          interior = fs.dim == sys.basis.size();
          return cert;
        }
      }
    }
    if (depth >= opt.max_facial_rounds) return std::nullopt;
    for (const auto& c : face_candidates(s.primal, opt.kernel_max_denominator)) {
      FaceSystem next = build_face_system(sys, fs.face * c);
      if (!next.consistent || next.dim == 0) continue;
      if (auto cert = run(next, depth + 1)) return cert;
      if (budget <= 0) break;
    }
    return std::nullopt;
  }
};

}  // namespace detail

/// Decides membership of p in the sum-of-squares cone. Feasible and
/// Infeasible verdicts carry exactly verified certificates; Undecided
/// carries only numeric diagnostics.
inline SosVerdict check_sos(const Form& p, const SosOptions& opt = {}) {
  SosVerdict v;
  if (p.is_zero()) {
    v.status = SosStatus::Feasible;
    v.certificate = GramCertificate{MonomialBasis{p.n_vars(), 0, {}}, RationalMatrix()};
    v.diagnostics.route = "zero form";
    return v;
  }
  const int m = *p.degree();
  if (m % 2 != 0) throw std::invalid_argument("check_sos needs an even degree, got " + std::to_string(m));
  const MonomialBasis full = full_basis(p.n_vars(), m / 2);

  if (opt.sample_fast_path) {
    if (auto d = detail::point_evaluation_dual(p, full)) {
      v.status = SosStatus::Infeasible;
      v.dual = std::move(*d);
      v.diagnostics.route = "negative sample";
      v.diagnostics.basis_size = full.size();
      return v;
    }
  }

  if (auto sq = square_factor(p); sq && sq->first > 0) {
    const Form& q = sq->second;
    MonomialBasis basis{p.n_vars(), m / 2, q.support()};
    RationalMatrix g(basis.size(), basis.size());
    std::size_t i = 0;
    for (const auto& [ei, ci] : q.terms()) {
      std::size_t j = 0;
      for (const auto& [ej, cj] : q.terms()) g(i, j++) = sq->first * ci * cj;
      ++i;
    }
    GramCertificate cert{basis, g};
    if (verify_gram_exact(p, cert)) {
      v.status = SosStatus::Feasible;
      v.diagnostics.route = "exact square";
      v.diagnostics.basis_size = basis.size();
      v.certificate = opt.basis_mode == BasisMode::Full ? detail::pad_certificate(cert, full) : std::move(cert);
      return v;
    }
  }

  bool primal_says_infeasible = false;
  {
    MonomialBasis basis = opt.basis_mode == BasisMode::Newton ? half_newton_basis(p) : full;
    basis = prune_diagonally_inconsistent(p, basis);
    v.diagnostics.basis_size = basis.size();
    GramSystem sys = gram_system(p, basis);
    RationalMatrix face = RationalMatrix::identity(basis.size());
    if (opt.use_rational_zeros)
      if (auto z = detail::zero_face(p, basis, opt.zero_hints)) face = std::move(*z);
    if (!sys.unreachable.empty() || basis.empty() || face.cols() == 0) {
      primal_says_infeasible = true;
    } else {
      detail::FaceSearch search{p, sys, opt, detail::coefficient_scale(p), opt.max_face_solves, v.diagnostics};
      detail::FaceSystem fs = detail::build_face_system(sys, face);
      std::optional<GramCertificate> cert;
      if (fs.consistent) cert = search.run(fs, 0);
      if (cert) {
        v.status = SosStatus::Feasible;
        v.diagnostics.route = cert->basis.size() == basis.size() && search.interior ? "interior Gram" : "reduced-face Gram";
        v.certificate = opt.basis_mode == BasisMode::Full ? detail::pad_certificate(*cert, full) : std::move(*cert);
        return v;
      }
      primal_says_infeasible = !fs.consistent || search.root_infeasible;
    }
  }

  // separating functional over the half Newton basis, or every monomial when
  // part of supp(p) is out of reach of the basis
  {
    GramSystem sys = gram_system(p, half_newton_basis(p));
    if (!sys.unreachable.empty()) sys = gram_system(p, full);
    NumericGramSolution ns = sdp_feasibility(sys, opt);
    v.diagnostics.sdp_iterations += ns.raw.iterations;
    if (!primal_says_infeasible) v.diagnostics.margin = ns.margin;
    unsigned bits = 0;
    if (ns.margin < 0) {
      if (auto d = detail::round_dual(p, sys, detail::exact_functional(ns.functional), opt.denominator_bits, &bits)) {
        v.status = SosStatus::Infeasible;
        v.dual = std::move(*d);
        v.diagnostics.denominator_bits = bits;
        v.diagnostics.route = "separating functional";
        return v;
      }
    }
  }
  if (opt.extended_precision_max_basis > 0) {
    GramSystem sys = gram_system(p, half_newton_basis(p));
    if (!sys.unreachable.empty()) sys = gram_system(p, full);
    if (sys.basis.size() <= opt.extended_precision_max_basis) {
      if (auto fun = detail::extended_precision_functional<ExtendedFloat>(sys, opt, &v.diagnostics.sdp_iterations)) {
        unsigned bits = 0;
        if (auto d = detail::round_dual(p, sys, *fun, opt.extended_denominator_bits, &bits)) {
          v.status = SosStatus::Infeasible;
          v.dual = std::move(*d);
          v.diagnostics.denominator_bits = bits;
          v.diagnostics.route = "separating functional (extended precision)";
          return v;
        }
      }
    }
  }
  v.diagnostics.route = primal_says_infeasible ? "dual rounding failed" : "rounding failed";
  return v;
}

}  // namespace sosc
