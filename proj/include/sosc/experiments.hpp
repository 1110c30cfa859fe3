#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sosc/catalog.hpp"
#include "sosc/form.hpp"
#include "sosc/form_io.hpp"
#include "sosc/serialization.hpp"
#include "sosc/sos.hpp"

namespace sosc {

/// Receives every verdict an experiment produces, with a label and the
/// form it was computed for.
using CertificateSink = std::function<void(const std::string& label, const Form& form, const SosVerdict& verdict)>;

struct ExperimentContext {
  SosOptions options;
  CertificateSink sink;
};

/// Rational zeros of p on the small integer grid used by check_sos.
inline std::vector<std::vector<Rational>> rational_zeros(const Form& p) {
  std::vector<std::vector<Rational>> out;
  if (p.is_zero()) return out;
  for (const auto& x : detail::zero_search_points(p.n_vars()))
    if (evaluate(p, x) == 0) out.push_back(x);
  return out;
}

/// Zeros of p(s1 x1, ..., sn xn) from zeros of p.
inline std::vector<std::vector<Rational>> scaled_zeros(const std::vector<std::vector<Rational>>& zeros,
                                                       const std::vector<Rational>& scales) {
  std::vector<std::vector<Rational>> out;
  for (const auto& z : zeros) {
    std::vector<Rational> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] / scales[i];
    out.push_back(std::move(y));
  }
  return out;
}

inline SosVerdict run_check(const ExperimentContext& ctx, const std::string& label, const Form& p,
                            const std::vector<std::vector<Rational>>& hints = {}) {
  SosOptions opt = ctx.options;
  opt.zero_hints.insert(opt.zero_hints.end(), hints.begin(), hints.end());
  SosVerdict v = check_sos(p, opt);
  if (ctx.sink) ctx.sink(label, p, v);
  return v;
}

// ---------------------------------------------------------------- lambda scan

struct LambdaProbe {
  Rational lambda;
  SosStatus status;
  /// Set when this probe replaced an Undecided one at a perturbed lambda.
  bool retry = false;
};

struct LambdaScanResult {
  std::string form_key;
  std::string multiplier;
  std::vector<LambdaProbe> history;
  Rational lambda_lo, lambda_hi;
  Rational tolerance;
  /// Endpoints resolved to Feasible at lo and Infeasible at hi.
  bool straddles = false;
  /// Every probe that moved the bracket was certificate-backed and no probe
  /// stayed Undecided after its retries.
  bool honest = true;
  std::string message;
};

/// multiplier * p(x1, lambda x2, ..., lambda xn)
inline Form lambda_family(const Form& p, const Form& multiplier, const Rational& lambda) {
  std::vector<Rational> s(p.n_vars(), lambda);
  s[0] = 1;
  return mul(multiplier, scale_variables(p, s));
}

/// Bisection on lambda for the sos status of multiplier * p(x, l y, l z, ...)
/// until the bracket is at most `tolerance` wide. Undecided probes are
/// retried at lambda + tol/4, then lambda - tol/4.
inline LambdaScanResult lambda_scan(const Form& p, const Form& multiplier, const Rational& lo, const Rational& hi,
                                    const Rational& tolerance, const ExperimentContext& ctx,
                                    const std::string& key = "") {
  if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (!(lo < hi)) throw std::invalid_argument("lambda range must satisfy lo < hi");
  if (lo == 0) throw std::invalid_argument("lambda = 0 makes the substitution singular");
  LambdaScanResult res;
  res.form_key = key;
  res.multiplier = to_string(multiplier);
  res.tolerance = tolerance;
  const auto base_zeros = rational_zeros(p);
  auto probe = [&](const Rational& l, bool retry) {
    std::vector<Rational> s(p.n_vars(), l);
    s[0] = 1;
    auto v = run_check(ctx, key + " lambda=" + l.get_str(), lambda_family(p, multiplier, l), scaled_zeros(base_zeros, s));
    res.history.push_back({l, v.status, retry});
    return v.status;
  };
  // resolve a probe, retrying Undecided at perturbed lambda
  auto resolve = [&](const Rational& l) -> std::pair<SosStatus, Rational> {
    SosStatus st = probe(l, false);
    if (st != SosStatus::Undecided) return {st, l};
    for (const Rational& alt : {Rational(l + tolerance / 4), Rational(l - tolerance / 4)}) {
      if (alt <= 0) continue;
      st = probe(alt, true);
      if (st != SosStatus::Undecided) return {st, alt};
    }
    return {SosStatus::Undecided, l};
  };
  auto [s_lo, l_lo] = resolve(lo);
  auto [s_hi, l_hi] = resolve(hi);
  res.lambda_lo = l_lo;
  res.lambda_hi = l_hi;
  if (s_lo != SosStatus::Feasible || s_hi != SosStatus::Infeasible || !(l_lo < l_hi)) {
    res.straddles = false;
    res.honest = s_lo != SosStatus::Undecided && s_hi != SosStatus::Undecided;
    res.message = std::string("range endpoints do not straddle a transition: ") + to_string(s_lo) + " at " +
                  l_lo.get_str() + ", " + to_string(s_hi) + " at " + l_hi.get_str();
    return res;
  }
  res.straddles = true;
  while (res.lambda_hi - res.lambda_lo > tolerance) {
    Rational mid = (res.lambda_lo + res.lambda_hi) / 2;
    auto [st, used] = resolve(mid);
    if (st == SosStatus::Undecided || !(res.lambda_lo < used && used < res.lambda_hi)) {
      res.honest = false;
      res.message = "probe near " + mid.get_str() + " stayed Undecided; bracket left unchanged";
      break;
    }
    if (st == SosStatus::Feasible)
      res.lambda_lo = used;
    else
      res.lambda_hi = used;
  }
  return res;
}

inline Json to_json(const LambdaScanResult& r) {
  Json hist = Json::array();
  for (const auto& h : r.history)
    hist.push_back({{"lambda", rational_to_json(h.lambda)}, {"status", to_string(h.status)}, {"retry", h.retry}});
  return {{"schema", 1},
          {"experiment", "lambda_scan"},
          {"form_key", r.form_key},
          {"multiplier", r.multiplier},
          {"tolerance", rational_to_json(r.tolerance)},
          {"boundary_bracket", Json::array({rational_to_json(r.lambda_lo), rational_to_json(r.lambda_hi)})},
          {"straddles", r.straddles},
          {"honest", r.honest},
          {"message", r.message},
          {"history", hist}};
}

// ------------------------------------------------------------- triangle grid

/// 2(a^2b^2 + a^2c^2 + b^2c^2) - (a^4 + b^4 + c^4)
inline Rational triangle_quartic(const Rational& a, const Rational& b, const Rational& c) {
  Rational a2 = a * a, b2 = b * b, c2 = c * c;
  return 2 * (a2 * b2 + a2 * c2 + b2 * c2) - (a2 * a2 + b2 * b2 + c2 * c2);
}

/// (a+b+c)(a+b-c)(b+c-a)(c+a-b)
inline Rational triangle_factored(const Rational& a, const Rational& b, const Rational& c) {
  return (a + b + c) * (a + b - c) * (b + c - a) * (c + a - b);
}

inline int sign(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

/// a^2 x^2 + b^2 y^2 + c^2 z^2
inline Form diagonal_multiplier(const Rational& a, const Rational& b, const Rational& c) {
  return Form::from_terms(3, {{{2, 0, 0}, a * a}, {{0, 2, 0}, b * b}, {{0, 0, 2}, c * c}});
}

struct TriangleCell {
  Rational a, b, c;
  SosStatus status = SosStatus::Undecided;
  int quartic_sign = 0;
  int factored_sign = 0;
  /// |condition| below the margin: reported but not scored.
  bool boundary = false;
  /// status matches the condition (Feasible iff condition >= 0)
  bool agree = false;
};

struct TriangleGridResult {
  std::string family;
  Rational margin;
  std::vector<TriangleCell> cells;

  std::size_t scored() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.boundary; }));
  }
  std::size_t agreeing() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.boundary && c.agree; }));
  }
  bool signs_identical() const {
    return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.quartic_sign == c.factored_sign; });
  }
};

/// Values of a grid axis from "lo:hi:step" (inclusive) or "v1,v2,...".
inline std::vector<Rational> parse_grid_axis(const std::string& spec) {
  std::vector<Rational> out;
  if (spec.find(':') != std::string::npos) {
    auto p1 = spec.find(':');
    auto p2 = spec.find(':', p1 + 1);
    if (p2 == std::string::npos) throw std::invalid_argument("grid spec needs lo:hi:step");
    Rational lo = parse_rational(spec.substr(0, p1));
    Rational hi = parse_rational(spec.substr(p1 + 1, p2 - p1 - 1));
    Rational step = parse_rational(spec.substr(p2 + 1));
    if (!(step > 0)) throw std::invalid_argument("grid step must be positive");
    for (Rational v = lo; v <= hi; v += step) out.push_back(v);
  } else {
    std::size_t start = 0;
    while (start <= spec.size()) {
      auto comma = spec.find(',', start);
      std::string tok = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!tok.empty()) out.push_back(parse_rational(tok));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  for (const auto& v : out)
    if (!(v > 0)) throw std::invalid_argument("grid values must be positive");
  return out;
}

/// check_sos((a^2x^2 + b^2y^2 + c^2z^2) * family) over every triple of axis
/// values, compared with the sign of the triangle condition.
inline TriangleGridResult triangle_grid(const std::string& family_key, const Form& family,
                                        const std::vector<Rational>& axis, const Rational& margin,
                                        const ExperimentContext& ctx) {
  TriangleGridResult res;
  res.family = family_key;
  res.margin = margin;
  const auto zeros = rational_zeros(family);
  for (const auto& a : axis)
    for (const auto& b : axis)
      for (const auto& c : axis) {
        TriangleCell cell{a, b, c};
        Rational q = triangle_quartic(a, b, c);
        cell.quartic_sign = sign(q);
        cell.factored_sign = sign(triangle_factored(a, b, c));
        cell.boundary = abs(q) < margin;
        auto v = run_check(ctx, family_key + " (" + a.get_str() + "," + b.get_str() + "," + c.get_str() + ")",
                           mul(diagonal_multiplier(a, b, c), family), zeros);
        cell.status = v.status;
        cell.agree = (cell.quartic_sign >= 0 && v.status == SosStatus::Feasible) ||
                     (cell.quartic_sign < 0 && v.status == SosStatus::Infeasible);
        res.cells.push_back(cell);
      }
  return res;
}

inline Json to_json(const TriangleGridResult& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"a", rational_to_json(c.a)},
                     {"b", rational_to_json(c.b)},
                     {"c", rational_to_json(c.c)},
                     {"status", to_string(c.status)},
                     {"quartic_sign", c.quartic_sign},
                     {"factored_sign", c.factored_sign},
                     {"boundary", c.boundary},
                     {"agree", c.agree}});
  return {{"schema", 1},         {"experiment", "triangle_grid"}, {"family", r.family},
          {"margin", rational_to_json(r.margin)}, {"scored", r.scored()},       {"agreeing", r.agreeing()},
          {"signs_identical", r.signs_identical()}, {"cells", cells}};
}

inline std::string triangle_csv(const TriangleGridResult& r) {
  std::string out = "family,a,b,c,status,quartic_sign,factored_sign,boundary,agree\n";
  for (const auto& c : r.cells)
    out += r.family + "," + c.a.get_str() + "," + c.b.get_str() + "," + c.c.get_str() + "," + to_string(c.status) +
           "," + std::to_string(c.quartic_sign) + "," + std::to_string(c.factored_sign) + "," +
           (c.boundary ? "1" : "0") + "," + (c.agree ? "1" : "0") + "\n";
  return out;
}

// -------------------------------------------------------- denominator search

struct DenominatorSearchResult {
  std::string form_key;
  std::vector<std::pair<int, SosStatus>> tried;
  std::optional<int> minimal_n;
  int n_max = 0;
};

/// Smallest N <= n_max with (sum x_j^2)^N p sos.
inline DenominatorSearchResult denominator_search(const Form& p, int n_max, const ExperimentContext& ctx,
                                                  const std::string& key = "") {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  DenominatorSearchResult res;
  res.form_key = key;
  res.n_max = n_max;
  const auto zeros = rational_zeros(p);
  Form cur = p;
  const Form step = sum_of_squares_power(p.n_vars(), 1);
  for (int n = 0; n <= n_max; ++n) {
    auto v = run_check(ctx, key + " N=" + std::to_string(n), cur, zeros);
    res.tried.emplace_back(n, v.status);
    if (v.status == SosStatus::Feasible) {
      res.minimal_n = n;
      break;
    }
    cur = mul(cur, step);
  }
  return res;
}

inline Json to_json(const DenominatorSearchResult& r) {
  Json tried = Json::array();
  for (const auto& [n, st] : r.tried) tried.push_back({{"N", n}, {"status", to_string(st)}});
  return {{"schema", 1},
          {"experiment", "denominator_search"},
          {"form_key", r.form_key},
          {"N_max", r.n_max},
          {"minimal_N", r.minimal_n ? Json(*r.minimal_n) : Json(nullptr)},
          {"tried", tried}};
}

// ------------------------------------------------------- degeneration trace

struct TracePoint {
  Rational r;
  SosStatus status;
};

/// Status of h(x1, x2/r, ..., xn/r) * p per r.
inline std::vector<TracePoint> degeneration_trace(const Form& h, const Form& p, const std::vector<Rational>& r_values,
                                                  const ExperimentContext& ctx, const std::string& key = "") {
  if (h.n_vars() != p.n_vars()) throw std::invalid_argument("h and p must have the same number of variables");
  std::vector<TracePoint> out;
  const auto zeros = rational_zeros(p);
  for (const auto& r : r_values) {
    if (!(r > 0)) throw std::invalid_argument("r must be positive");
    std::vector<Rational> s(h.n_vars(), 1 / r);
    s[0] = 1;
    Form f = mul(scale_variables(h, s), p);
    auto v = run_check(ctx, key + " r=" + r.get_str(), f, zeros);
    out.push_back({r, v.status});
  }
  return out;
}

inline Json to_json(const std::vector<TracePoint>& trace, const std::string& key) {
  Json pts = Json::array();
  for (const auto& t : trace) pts.push_back({{"r", rational_to_json(t.r)}, {"status", to_string(t.status)}});
  return {{"schema", 1}, {"experiment", "degeneration_trace"}, {"key", key}, {"trace", pts}};
}

// ------------------------------------------------------------ Stengle powers

struct StenglePowerEntry {
  std::string label;
  int exponent;
  SosStatus expected;
  SosStatus status;
};

/// p^(2s+1) for each s (expected Infeasible) and p^2 (expected Feasible).
inline std::vector<StenglePowerEntry> stengle_power_check(const std::vector<int>& s_values, const ExperimentContext& ctx) {
  std::vector<StenglePowerEntry> out;
  const Form p = stengle();
  for (int s : s_values) {
    if (s < 0 || s > 1) throw std::invalid_argument("only s in {0, 1} is within reach");
    const int e = 2 * s + 1;
    auto v = run_check(ctx, "STENGLE^" + std::to_string(e), pow(p, static_cast<unsigned>(e)));
    out.push_back({"p^" + std::to_string(e), e, SosStatus::Infeasible, v.status});
  }
  auto v = run_check(ctx, "STENGLE^2", pow(p, 2));
  out.push_back({"p^2", 2, SosStatus::Feasible, v.status});
  return out;
}

inline Json to_json(const std::vector<StenglePowerEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries)
    arr.push_back({{"label", e.label},
                   {"exponent", e.exponent},
                   {"expected", to_string(e.expected)},
                   {"status", to_string(e.status)}});
  return {{"schema", 1}, {"experiment", "stengle_power_check"}, {"entries", arr}};
}

}  // namespace sosc
