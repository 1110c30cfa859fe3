#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "sosc/certificate.hpp"
#include "sosc/form.hpp"
#include "sosc/form_io.hpp"

namespace sosc {

using Json = nlohmann::json;

inline constexpr int kCertificateSchema = 1;

/// ["num", "den"] with both integers as decimal strings.
inline Json rational_to_json(const Rational& q) {
  return Json::array({q.get_num().get_str(), q.get_den().get_str()});
}

inline Rational rational_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
    throw std::invalid_argument("rational must be a [num, den] pair of strings");
  Integer num(j[0].get<std::string>());
  Integer den(j[1].get<std::string>());
  if (den <= 0) throw std::invalid_argument("rational denominator must be positive");
  Rational q = make_rational(num, den);
  if (q.get_den() != den) throw std::invalid_argument("rational not in lowest terms");
  return q;
}

inline Json form_to_json(const Form& p) {
  Json terms = Json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back({{"exponent", e}, {"coefficient", rational_to_json(c)}});
  return {{"n_vars", p.n_vars()}, {"text", to_string(p)}, {"terms", terms}};
}

inline Form form_from_json(const Json& j) {
  const int n = j.at("n_vars").get<int>();
  FormAccumulator acc(n);
  for (const auto& t : j.at("terms")) {
    auto e = t.at("exponent").get<Exponent>();
    if (static_cast<int>(e.size()) != n) throw std::invalid_argument("exponent length differs from n_vars");
    acc.add(e, rational_from_json(t.at("coefficient")));
  }
  return std::move(acc).finish();
}

inline Json basis_to_json(const MonomialBasis& b) {
  return {{"n_vars", b.n_vars}, {"half_degree", b.half_degree}, {"monomials", b.monomials}};
}

inline MonomialBasis basis_from_json(const Json& j) {
  return MonomialBasis{j.at("n_vars").get<int>(), j.at("half_degree").get<int>(),
                       j.at("monomials").get<std::vector<Exponent>>()};
}

/// {schema, kind: "gram", form, basis, gram: row-major [num, den] pairs}
inline Json to_json(const Form& p, const GramCertificate& cert) {
  Json gram = Json::array();
  for (std::size_t i = 0; i < cert.gram.rows(); ++i)
    for (std::size_t j = 0; j < cert.gram.cols(); ++j) gram.push_back(rational_to_json(cert.gram(i, j)));
  return {{"schema", kCertificateSchema}, {"kind", "gram"},         {"form", form_to_json(p)},
          {"basis", basis_to_json(cert.basis)}, {"gram", gram}};
}

/// {schema, kind: "dual", form, basis, functional: [{monomial, value}]}
inline Json to_json(const Form& p, const DualCertificate& dual) {
  Json fun = Json::array();
  for (const auto& [e, v] : dual.functional) fun.push_back({{"monomial", e}, {"value", rational_to_json(v)}});
  return {{"schema", kCertificateSchema}, {"kind", "dual"},          {"form", form_to_json(p)},
          {"basis", basis_to_json(dual.basis)}, {"functional", fun}};
}

struct LoadedCertificate {
  Form form;
  std::variant<GramCertificate, DualCertificate> certificate;
};

inline LoadedCertificate certificate_from_json(const Json& j) {
  if (j.at("schema").get<int>() != kCertificateSchema) throw std::invalid_argument("unsupported certificate schema");
  Form p = form_from_json(j.at("form"));
  MonomialBasis basis = basis_from_json(j.at("basis"));
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gram") {
    const auto& flat = j.at("gram");
    const std::size_t n = basis.size();
    if (flat.size() != n * n) throw std::invalid_argument("gram entry count does not match basis size");
    RationalMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) g(i, k) = rational_from_json(flat[i * n + k]);
    return {p, GramCertificate{basis, g}};
  }
  if (kind == "dual") {
    DualCertificate d{basis, {}};
    for (const auto& item : j.at("functional"))
      d.functional[item.at("monomial").get<Exponent>()] = rational_from_json(item.at("value"));
    return {p, d};
  }
  throw std::invalid_argument("unknown certificate kind '" + kind + "'");
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return Json::parse(in);
}

}  // namespace sosc
