#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sosc/sosc.hpp"

namespace sosc::testing {

// ------------------------------------------------------------------ generators

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Rational rational(int lo, int hi, int max_den = 4) {
    return make_rational(integer(lo, hi), integer(1, max_den));
  }

  Rational nonzero_rational(int lo, int hi, int max_den = 4) {
    for (;;) {
      Rational q = rational(lo, hi, max_den);
      if (q != 0) return q;
    }
  }

  /// Random form of degree d with integer coefficients in [lo, hi].
  Form form(int n, int d, int lo = -3, int hi = 3, double density = 0.7) {
    std::bernoulli_distribution keep(density);
    std::vector<std::pair<Exponent, Rational>> terms;
    for (const auto& e : monomials_of_degree(n, d))
      if (keep(rng_)) terms.emplace_back(e, Rational(integer(lo, hi)));
    return Form::from_terms(n, terms);
  }

  Form nonzero_form(int n, int d, int lo = -3, int hi = 3, double density = 0.7) {
    for (;;) {
      Form f = form(n, d, lo, hi, density);
      if (!f.is_zero()) return f;
    }
  }

  Form linear(int n, int lo = -3, int hi = 3) {
    for (;;) {
      std::vector<Rational> c(n);
      for (auto& v : c) v = integer(lo, hi);
      Form f = Form::linear(c);
      if (!f.is_zero()) return f;
    }
  }

  std::vector<Rational> point(int n, int lo = -5, int hi = 5, int max_den = 5) {
    std::vector<Rational> v(n);
    for (auto& x : v) x = rational(lo, hi, max_den);
    return v;
  }

  RationalMatrix invertible(int n, int lo = -2, int hi = 2) {
    for (;;) {
      RationalMatrix a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = integer(lo, hi);
      if (determinant(a) != 0) return a;
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Random binary sextic; the case mix covers indefinite forms, interior and
/// boundary psd forms, rational and irrational double roots.
inline Form binary_sextic(Gen& g, int trial) {
  auto f2 = [](const std::string& s) { return parse_form(s, 2); };
  Form p(2);
  switch (trial % 5) {
    case 0:
      p = g.nonzero_form(2, 6, -5, 5, 1.0);
      break;
    case 1:
      for (int i = 0; i < 2; ++i) {
        Form h = g.nonzero_form(2, 3, -3, 3);
        p = add(p, mul(h, h));
      }
      break;
    case 2: {
      Form ell = g.linear(2, -3, 3);
      Form h1 = g.nonzero_form(2, 2, -3, 3), h2 = g.nonzero_form(2, 2, -3, 3);
      p = mul(mul(ell, ell), add(mul(h1, h1), mul(h2, h2)));
      break;
    }
    case 3: {
      Form c = g.nonzero_form(2, 3, -3, 3);
      Rational eps = make_rational(g.integer(1, 4), 100);
      const bool plus = g.integer(0, 1) == 1;
      p = add(mul(c, c), scale(f2(g.integer(0, 1) ? "x^6" : "x^3*y^3"), plus ? eps : Rational(-eps)));
      break;
    }
    default: {
      const Rational b = g.integer(-4, 4), c = g.integer(-3, 3);
      Form quad = add(f2("x^2"), add(scale(f2("x*y"), b), scale(f2("y^2"), c)));
      p = mul(mul(quad, quad), g.integer(0, 1) ? f2("x^2 + y^2") : f2("x^2 - x*y + y^2"));
      break;
    }
  }
  return p.is_zero() ? f2("x^6 - y^6") : p;
}

/// Random even ternary sextic: positive pure powers, mixed coefficients allowed negative.
inline Form even_sextic(Gen& g) {
  std::vector<std::pair<Exponent, Rational>> terms;
  for (const auto& a : monomials_of_degree(3, 3)) {
    Exponent e{2 * a[0], 2 * a[1], 2 * a[2]};
    const bool pure = a[0] == 3 || a[1] == 3 || a[2] == 3;
    terms.emplace_back(e, pure ? Rational(g.integer(2, 5)) : Rational(g.integer(-1, 3)));
  }
  return Form::from_terms(3, terms);
}

/// Sum of 2 to 4 squares of random ternary quadratics.
inline Form sos_quartic(Gen& g) {
  const int k = g.integer(2, 4);
  Form q(3);
  for (int i = 0; i < k; ++i) {
    Form h = g.nonzero_form(3, 2, -2, 2);
    q = add(q, mul(h, h));
  }
  return q;
}

/// Smallest N <= n_max with every coefficient of step^N f passing `ok`, by
/// plain repeated multiplication.
template <class Ok>
std::optional<int> expansion_oracle(Form f, const Form& step, int n_max, Ok ok) {
  for (int n = 0; n <= n_max; ++n) {
    bool pass = true;
    for (const auto& e : monomials_of_degree(f.n_vars(), *f.degree()))
      if (!ok(f.coefficient(e))) pass = false;
    if (pass) return n;
    f = mul(f, step);
  }
  return std::nullopt;
}

// ------------------------------------------------------- independent checker

/// Certificate checker that shares nothing with the library beyond GMP: it
/// reads the JSON itself, expands with its own term map, tests PSD by a
/// plain symmetric elimination and excludes monomials from the dual basis
/// only when a small integer direction separates them from the support.
namespace checker {

using Mono = std::vector<int>;
using Poly = std::map<Mono, mpq_class>;

inline mpq_class read_q(const nlohmann::json& j) {
  mpz_class num(j.at(0).get<std::string>()), den(j.at(1).get<std::string>());
  if (den <= 0) throw std::invalid_argument("non-positive denominator");
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

inline Poly read_poly(const nlohmann::json& form) {
  Poly p;
  for (const auto& t : form.at("terms")) {
    mpq_class c = read_q(t.at("coefficient"));
    if (c != 0) p[t.at("exponent").get<Mono>()] += c;
  }
  for (auto it = p.begin(); it != p.end();) it = it->second == 0 ? p.erase(it) : std::next(it);
  return p;
}

inline Mono plus(const Mono& a, const Mono& b) {
  Mono c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline bool psd(std::vector<std::vector<mpq_class>> a) {
  const std::size_t n = a.size();
  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t k = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      if (a[i][i] < 0) return false;
      if (a[i][i] > 0 && k == n) k = i;
    }
    if (k == n) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (!done[i] && !done[j] && a[i][j] != 0) return false;
      return true;
    }
    done[k] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i] || a[i][k] == 0) continue;
      mpq_class f = a[i][k] / a[k][k];
      for (std::size_t j = 0; j < n; ++j)
        if (!done[j]) a[i][j] -= f * a[k][j];
    }
  }
  return true;
}

inline void directions(int n, int bound, Mono& cur, std::vector<Mono>& out) {
  if (static_cast<int>(cur.size()) == n) {
    for (int v : cur)
      if (v != 0) {
        out.push_back(cur);
        return;
      }
    return;
  }
  for (int v = -bound; v <= bound; ++v) {
    cur.push_back(v);
    directions(n, bound, cur, out);
    cur.pop_back();
  }
}

/// True when some integer direction w puts w.(2b) strictly above every w.a.
inline bool separated(const Mono& b, const std::vector<Mono>& support, const std::vector<Mono>& dirs) {
  for (const auto& w : dirs) {
    long long top = 0;
    bool first = true;
    for (const auto& a : support) {
      long long s = 0;
      for (std::size_t i = 0; i < w.size(); ++i) s += static_cast<long long>(w[i]) * a[i];
      if (first || s > top) top = s;
      first = false;
    }
    long long t = 0;
    for (std::size_t i = 0; i < w.size(); ++i) t += 2LL * w[i] * b[i];
    if (t > top) return true;
  }
  return false;
}

inline std::vector<Mono> all_monomials(int n, int d) {
  if (n == 1) return {Mono{d}};
  std::vector<Mono> out;
  for (int a = d; a >= 0; --a)
    for (auto rest : all_monomials(n - 1, d - a)) {
      rest.insert(rest.begin(), a);
      out.push_back(rest);
    }
  return out;
}

struct Result {
  bool ok = false;
  std::string kind;
  std::string reason;
};

inline Result check(const nlohmann::json& j) {
  Result r;
  try {
    r.kind = j.at("kind").get<std::string>();
    const int n = j.at("form").at("n_vars").get<int>();
    Poly p = read_poly(j.at("form"));
    std::vector<Mono> basis;
    for (const auto& m : j.at("basis").at("monomials")) basis.push_back(m.get<Mono>());
    for (const auto& b : basis)
      if (static_cast<int>(b.size()) != n) return {false, r.kind, "basis monomial has wrong length"};
    const std::size_t k = basis.size();
    if (r.kind == "gram") {
      const auto& flat = j.at("gram");
      if (flat.size() != k * k) return {false, r.kind, "gram size"};
      std::vector<std::vector<mpq_class>> g(k, std::vector<mpq_class>(k));
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) g[a][b] = read_q(flat[a * k + b]);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          if (g[a][b] != g[b][a]) return {false, r.kind, "gram not symmetric"};
      Poly e;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          if (g[a][b] != 0) e[plus(basis[a], basis[b])] += g[a][b];
      for (auto it = e.begin(); it != e.end();) it = it->second == 0 ? e.erase(it) : std::next(it);
      if (e != p) return {false, r.kind, "expansion differs from the form"};
      if (!psd(g)) return {false, r.kind, "gram not PSD"};
      r.ok = true;
      return r;
    }
    if (r.kind == "dual") {
      if (p.empty()) return {false, r.kind, "zero form"};
      const int m = [&] {
        int s = 0;
        for (int v : p.begin()->first) s += v;
        return s;
      }();
      if (m % 2 != 0) return {false, r.kind, "odd degree"};
      std::map<Mono, mpq_class> L;
      for (const auto& item : j.at("functional")) L[item.at("monomial").get<Mono>()] = read_q(item.at("value"));
      mpq_class value = 0;
      for (const auto& [e, c] : p) {
        auto it = L.find(e);
        if (it == L.end()) return {false, r.kind, "functional undefined on the form"};
        value += c * it->second;
      }
      if (value >= 0) return {false, r.kind, "functional not negative on the form"};
      std::vector<std::vector<mpq_class>> mm(k, std::vector<mpq_class>(k));
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
          auto it = L.find(plus(basis[a], basis[b]));
          if (it == L.end()) return {false, r.kind, "functional undefined on the basis"};
          mm[a][b] = it->second;
        }
      if (!psd(mm)) return {false, r.kind, "moment matrix not PSD"};
      std::vector<Mono> support;
      for (const auto& [e, c] : p) support.push_back(e);
      std::vector<Mono> dirs;
      Mono cur;
      directions(n, n <= 3 ? 4 : 2, cur, dirs);
      std::map<Mono, bool> in_basis;
      for (const auto& b : basis) in_basis[b] = true;
      for (const auto& b : all_monomials(n, m / 2))
        if (!in_basis.count(b) && !separated(b, support, dirs)) return {false, r.kind, "basis misses a possible square term"};
      r.ok = true;
      return r;
    }
    return {false, r.kind, "unknown kind"};
  } catch (const std::exception& e) {
    return {false, r.kind, e.what()};
  }
}

inline Result check_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {false, "", "cannot open " + path};
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    return {false, "", e.what()};
  }
  return check(j);
}

}  // namespace checker

/// Serializes the verdict's certificate to `path` and checks it back from the file.
inline checker::Result round_trip(const Form& p, const SosVerdict& v, const std::string& path) {
  if (v.status == SosStatus::Undecided) return {false, "", "undecided"};
  Json j = v.status == SosStatus::Feasible ? to_json(p, *v.certificate) : to_json(p, *v.dual);
  write_json_file(path, j);
  return checker::check_file(path);
}

// ------------------------------------------------------ binary psd oracle

/// Real-root analysis of f(t, 1) with exact rational arithmetic.
namespace roots {

using UPoly = std::vector<mpq_class>;  // coefficient of t^i at index i

inline void trim(UPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline UPoly derivative(const UPoly& a) {
  UPoly d;
  for (std::size_t i = 1; i < a.size(); ++i) d.push_back(a[i] * static_cast<long>(i));
  trim(d);
  return d;
}

inline std::pair<UPoly, UPoly> divmod(UPoly a, const UPoly& b) {
  UPoly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0);
  trim(a);
  while (!a.empty() && a.size() >= b.size()) {
    const std::size_t s = a.size() - b.size();
    mpq_class f = a.back() / b.back();
    q[s] = f;
    for (std::size_t i = 0; i < b.size(); ++i) a[s + i] -= f * b[i];
    trim(a);
  }
  trim(q);
  return {q, a};
}

inline UPoly gcd(UPoly a, UPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    mpq_class lc = a.back();
    for (auto& c : a) c /= lc;
  }
  return a;
}

/// Number of distinct real roots, by a Sturm sequence evaluated at -inf and +inf.
inline int real_root_count(const UPoly& f) {
  if (f.size() <= 1) return 0;
  std::vector<UPoly> seq{f, derivative(f)};
  while (seq.back().size() > 1) {
    auto r = divmod(seq[seq.size() - 2], seq.back()).second;
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    seq.push_back(r);
  }
  auto changes = [&](bool plus_inf) {
    int count = 0, last = 0;
    for (const auto& s : seq) {
      int sg = sgn(s.back());
      if (!plus_inf && (s.size() - 1) % 2 == 1) sg = -sg;
      if (sg == 0) continue;
      if (last != 0 && sg != last) ++count;
      last = sg;
    }
    return count;
  };
  return changes(false) - changes(true);
}

/// Whether the binary form c_6 x^6 + ... (index = power of x) is nonnegative on R^2.
/// Uses Yun's square-free split: f >= 0 iff the product of its odd-multiplicity
/// factors has no real root and f has a positive leading coefficient.
inline bool binary_psd(const Form& p) {
  if (p.n_vars() != 2) throw std::invalid_argument("binary form expected");
  if (p.is_zero()) return true;
  if (*p.degree() % 2 != 0) return false;
  UPoly f(*p.degree() + 1);
  for (const auto& [e, c] : p.terms()) f[e[0]] = c;
  trim(f);
  // f(t, 1) of odd degree changes sign; the top coefficient is f(1, 0).
  if ((f.size() - 1) % 2 != 0) return false;
  if (f.back() < 0) return false;
  UPoly odd{mpq_class(1)};
  UPoly a = gcd(f, derivative(f));
  UPoly b = divmod(f, a).first;
  UPoly c = derivative(f).empty() ? UPoly{} : divmod(derivative(f), a).first;
  int mult = 1;
  while (b.size() > 1) {
    UPoly db = derivative(b);
    UPoly d = c;
    for (std::size_t i = 0; i < std::max(d.size(), db.size()); ++i) {
      if (i >= d.size()) d.push_back(0);
      d[i] -= i < db.size() ? db[i] : mpq_class(0);
    }
    trim(d);
    UPoly factor = gcd(b, d);
    if (mult % 2 == 1 && factor.size() > 1) {
      UPoly prod(odd.size() + factor.size() - 1);
      for (std::size_t i = 0; i < odd.size(); ++i)
        for (std::size_t j = 0; j < factor.size(); ++j) prod[i + j] += odd[i] * factor[j];
      odd = prod;
    }
    b = divmod(b, factor).first;
    c = d.empty() ? UPoly{} : divmod(d, factor).first;
    ++mult;
  }
  return real_root_count(odd) == 0;
}

}  // namespace roots

}  // namespace sosc::testing
