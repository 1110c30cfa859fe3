#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sosc/form.hpp"
#include "sosc/form_io.hpp"

namespace sosc {

/// x^4 y^2 + x^2 y^4 + z^6 - 3 x^2 y^2 z^2
inline Form motzkin() {
  return Form::from_terms(3, {{{4, 2, 0}, 1}, {{2, 4, 0}, 1}, {{0, 0, 6}, 1}, {{2, 2, 2}, -3}});
}

/// x^6 + y^6 + z^6 - (x^4y^2 + x^2y^4 + x^4z^2 + x^2z^4 + y^4z^2 + y^2z^4) + 3x^2y^2z^2
inline Form robinson() {
  return Form::from_terms(3, {{{6, 0, 0}, 1},
                              {{0, 6, 0}, 1},
                              {{0, 0, 6}, 1},
                              {{4, 2, 0}, -1},
                              {{2, 4, 0}, -1},
                              {{4, 0, 2}, -1},
                              {{2, 0, 4}, -1},
                              {{0, 4, 2}, -1},
                              {{0, 2, 4}, -1},
                              {{2, 2, 2}, 3}});
}

/// x^4 y^2 + y^4 z^2 + z^4 x^2 - 3 x^2 y^2 z^2
inline Form choi_lam() {
  return Form::from_terms(3, {{{4, 2, 0}, 1}, {{0, 4, 2}, 1}, {{2, 0, 4}, 1}, {{2, 2, 2}, -3}});
}

/// x^3 z^3 + (y^2 z - x^3 - z^2 x)^2, expanded.
inline Form stengle() {
  return Form::from_terms(3, {{{6, 0, 0}, 1},
                              {{4, 0, 2}, 2},
                              {{3, 2, 1}, -2},
                              {{3, 0, 3}, 1},
                              {{2, 0, 4}, 1},
                              {{1, 2, 3}, -2},
                              {{0, 4, 2}, 1}});
}

/// p(x, z, y)
inline Form swap_yz(const Form& p) {
  if (p.n_vars() != 3) throw std::invalid_argument("swap_yz needs a ternary form");
  return permute_variables(p, {0, 2, 1});
}

/// floor((m - 2)^2 / 8), the degree of the ternary multiplier in Hilbert's
/// construction.
inline int hilbert_degree_bound(int m) {
  if (m % 2 != 0) throw std::invalid_argument("hilbert_degree_bound needs an even degree");
  if (m < 4) throw std::invalid_argument("hilbert_degree_bound needs degree at least 4");
  return (m - 2) * (m - 2) / 8;
}

/// Euler's four-square identity with the quaternion product a * b:
///   c1 = a1b1 - a2b2 - a3b3 - a4b4
///   c2 = a1b2 + a2b1 + a3b4 - a4b3
///   c3 = a1b3 - a2b4 + a3b1 + a4b2
///   c4 = a1b4 + a2b3 - a3b2 + a4b1
/// so that c1^2 + ... + c4^2 = (a1^2 + ... + a4^2)(b1^2 + ... + b4^2).
inline std::array<Form, 4> four_square_compose(const std::array<Form, 4>& a, const std::array<Form, 4>& b) {
  auto common_degree = [](const std::array<Form, 4>& v, const char* name) {
    std::optional<int> d;
    for (const auto& f : v) {
      if (f.n_vars() != v[0].n_vars()) throw std::invalid_argument(std::string("dimension mismatch within ") + name);
      if (f.is_zero()) continue;
      if (d && *f.degree() != *d) throw std::invalid_argument(std::string("degree mismatch within ") + name);
      d = f.degree();
    }
  };
  common_degree(a, "a");
  common_degree(b, "b");
  if (a[0].n_vars() != b[0].n_vars()) throw std::invalid_argument("dimension mismatch between a and b");
  auto p = [&](int i, int j) { return mul(a[i], b[j]); };
  return {p(0, 0) - p(1, 1) - p(2, 2) - p(3, 3), p(0, 1) + p(1, 0) + p(2, 3) - p(3, 2),
          p(0, 2) - p(1, 3) + p(2, 0) + p(3, 1), p(0, 3) + p(1, 2) - p(2, 1) + p(3, 0)};
}

enum class KnownStatus { PsdNotSos, Sos, Psd };

inline const char* to_string(KnownStatus s) {
  switch (s) {
    case KnownStatus::PsdNotSos:
      return "psd_not_sos";
    case KnownStatus::Sos:
      return "sos";
    case KnownStatus::Psd:
      return "psd";
  }
  return "?";
}

struct NamedForm {
  std::string key;
  std::string name;
  Form form;
  std::string provenance;
  KnownStatus known_status;
  std::string citation;
};

/// The named forms, keyed M, R, S, STENGLE plus the products used as
/// positive controls.
inline const std::vector<NamedForm>& catalog() {
  static const std::vector<NamedForm> forms = [] {
    std::vector<NamedForm> v;
    v.push_back({"M", "Motzkin", motzkin(), "Motzkin 1967", KnownStatus::PsdNotSos, "Motzkin 1967"});
    v.push_back({"R", "Robinson", robinson(), "Robinson 1973", KnownStatus::PsdNotSos, "Robinson 1973"});
    v.push_back({"S", "Choi-Lam", choi_lam(), "Choi-Lam 1977", KnownStatus::PsdNotSos, "Choi-Lam 1977"});
    v.push_back({"STENGLE", "Stengle", stengle(), "Stengle 1979", KnownStatus::PsdNotSos, "Stengle 1979"});
    v.push_back({"SS", "Choi-Lam product S(x,y,z)S(x,z,y)", mul(choi_lam(), swap_yz(choi_lam())), "Choi-Lam 1977",
                 KnownStatus::Sos, "Choi-Lam 1977"});
    v.push_back({"QM", "(x^2+y^2+z^2) M", mul(sum_of_squares_power(3, 1), motzkin()), "Motzkin multiplier",
                 KnownStatus::Sos, "Choi-Lam-Reznick 1995"});
    return v;
  }();
  return forms;
}

inline std::optional<NamedForm> find_named_form(const std::string& key) {
  for (const auto& f : catalog())
    if (f.key == key) return f;
  return std::nullopt;
}

}  // namespace sosc
