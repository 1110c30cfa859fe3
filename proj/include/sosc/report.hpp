#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sosc/catalog.hpp"
#include "sosc/experiments.hpp"
#include "sosc/polya.hpp"
#include "sosc/serialization.hpp"

namespace sosc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A config value: a scalar or a list of scalars, kept as text.
struct ConfigValue {
  std::vector<std::string> items;
  bool is_list = false;

  const std::string& scalar(const std::string& key) const {
    if (is_list || items.size() != 1) throw ConfigError("'" + key + "' must be a single value");
    return items.front();
  }
};

struct ConfigSection {
  std::string name;
  std::map<std::string, ConfigValue> values;
  int line = 0;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second.scalar(key);
  }

  std::string require(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("section [" + name + "] is missing '" + key + "'");
    return it->second.scalar(key);
  }

  std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback = {}) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second.items;
  }
};

struct ReportConfig {
  std::map<std::string, ConfigValue> globals;
  std::vector<ConfigSection> experiments;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string unquote(const std::string& s, int line) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '"') {
    if (t.back() != '"') throw ConfigError("line " + std::to_string(line) + ": unterminated string");
    return t.substr(1, t.size() - 2);
  }
  if (!t.empty() && t.front() == '"') throw ConfigError("line " + std::to_string(line) + ": unterminated string");
  return t;
}

inline std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

inline ConfigValue parse_value(const std::string& raw, int line) {
  ConfigValue v;
  std::string t = trim(raw);
  if (t.empty()) throw ConfigError("line " + std::to_string(line) + ": missing value");
  if (t.front() == '[') {
    if (t.back() != ']') throw ConfigError("line " + std::to_string(line) + ": unterminated list");
    v.is_list = true;
    std::string body = t.substr(1, t.size() - 2);
    std::string cur;
    bool in_string = false;
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!trim(cur).empty()) v.items.push_back(unquote(cur, line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (in_string) throw ConfigError("line " + std::to_string(line) + ": unterminated string");
    if (!trim(cur).empty()) v.items.push_back(unquote(cur, line));
    return v;
  }
  v.items.push_back(unquote(t, line));
  return v;
}

}  // namespace detail

/// TOML-style subset: `key = value` lines, `[name]` sections (one per
/// experiment, with a `kind` key), `#` comments, quoted strings and
/// single-line lists.
inline ReportConfig parse_report_config(std::istream& in) {
  ReportConfig cfg;
  std::string raw;
  int line = 0;
  ConfigSection* current = nullptr;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(line) + ": malformed section header");
      std::string name = detail::trim(s.substr(1, s.size() - 2));
      if (name.empty()) throw ConfigError("line " + std::to_string(line) + ": empty section name");
      for (const auto& e : cfg.experiments)
        if (e.name == name) throw ConfigError("line " + std::to_string(line) + ": duplicate section [" + name + "]");
      cfg.experiments.push_back({name, {}, line});
      current = &cfg.experiments.back();
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    std::string key = detail::trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
    auto& target = current ? current->values : cfg.globals;
    if (target.count(key)) throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    target[key] = detail::parse_value(s.substr(eq + 1), line);
  }
  return cfg;
}

inline ReportConfig parse_report_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  return parse_report_config(in);
}

/// Catalog key (upper-case identifier) or form text.
inline std::pair<std::string, Form> resolve_form(const std::string& spec, int n_vars = 0) {
  bool key_like = !spec.empty();
  for (char c : spec)
    if (!(std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      key_like = false;
  if (key_like) {
    auto f = find_named_form(spec);
    if (!f) throw ConfigError("unknown form key '" + spec + "'");
    return {spec, f->form};
  }
  return {spec, parse_form(spec, n_vars > 0 ? n_vars : infer_n_vars(spec))};
}

struct ReportOutcome {
  std::vector<std::string> files;
  std::size_t certificates = 0;
  std::size_t verification_failures = 0;
  std::size_t undecided = 0;
  Json summary = Json::object();

  int exit_code() const { return verification_failures == 0 ? 0 : 1; }
};

/// Writes every certificate to `dir` and re-verifies it from the file.
class CertificateArchive {
 public:
  explicit CertificateArchive(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void operator()(const std::string& label, const Form& p, const SosVerdict& v) {
    if (v.status == SosStatus::Undecided) {
      ++undecided;
      return;
    }
    Json j = v.status == SosStatus::Feasible ? to_json(p, *v.certificate) : to_json(p, *v.dual);
    j["label"] = label;
    std::filesystem::create_directories(dir_);
    char name[32];
    std::snprintf(name, sizeof name, "cert_%05zu.json", ++count);
    auto path = (dir_ / name).string();
    write_json_file(path, j);
    if (!reverify(path, p)) {
      ++failures;
      failed.push_back(label);
    }
  }

  static bool reverify(const std::string& path, const Form& expected) {
    try {
      LoadedCertificate loaded = certificate_from_json(read_json_file(path));
      if (!(loaded.form == expected)) return false;
      if (auto* g = std::get_if<GramCertificate>(&loaded.certificate)) return verify_gram_exact(loaded.form, *g);
      return verify_dual_exact(loaded.form, std::get<DualCertificate>(loaded.certificate));
    } catch (const std::exception&) {
      return false;
    }
  }

  std::size_t count = 0;
  std::size_t failures = 0;
  std::size_t undecided = 0;
  std::vector<std::string> failed;

 private:
  std::filesystem::path dir_;
};

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' must be an integer, got '" + s + "'");
  }
}

inline Rational parse_config_rational(const std::string& s, const std::string& key) {
  try {
    return parse_rational(s);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' must be a rational, got '" + s + "'");
  }
}

inline std::string lambda_csv(const LambdaScanResult& r) {
  std::string out = "form,lambda,status,retry\n";
  for (const auto& h : r.history)
    out += r.form_key + "," + h.lambda.get_str() + "," + to_string(h.status) + "," + (h.retry ? "1" : "0") + "\n";
  return out;
}

}  // namespace detail

/// Checks every section before running anything so that config errors
/// surface without partial output.
inline void validate_report_config(const ReportConfig& cfg) {
  static const std::map<std::string, std::vector<std::string>> kKeys = {
      {"lambda_scan", {"kind", "forms", "multiplier", "lo", "hi", "tolerance"}},
      {"triangle_grid", {"kind", "families", "grid", "margin"}},
      {"denominator_search", {"kind", "forms", "n_max"}},
      {"degeneration", {"kind", "h", "p", "r"}},
      {"stengle_powers", {"kind", "s"}},
      {"check_sos", {"kind", "forms"}},
      {"polya", {"kind", "forms", "mode", "depth", "n_max"}}};
  for (const auto& [k, v] : cfg.globals)
    if (k != "output_dir") throw ConfigError("unknown top-level key '" + k + "'");
  for (const auto& sec : cfg.experiments) {
    std::string kind = sec.require("kind");
    auto it = kKeys.find(kind);
    if (it == kKeys.end()) throw ConfigError("section [" + sec.name + "]: unknown experiment kind '" + kind + "'");
    for (const auto& [k, v] : sec.values)
      if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
        throw ConfigError("section [" + sec.name + "]: unknown key '" + k + "'");
    for (const char* key : {"forms", "families"})
      for (const auto& f : sec.list(key)) resolve_form(f);
    if (kind == "degeneration") {
      auto p = resolve_form(sec.require("p")).second;
      resolve_form(sec.require("h"), p.n_vars());
    }
  }
}

/// Runs the experiments of `cfg`, writing JSON (and CSV where tabular)
/// under output_dir plus a report.json summary.
inline ReportOutcome run_report(const ReportConfig& cfg, const std::string& output_override = "",
                                const SosOptions& options = {}) {
  validate_report_config(cfg);
  std::string out_dir = output_override;
  if (out_dir.empty()) {
    auto it = cfg.globals.find("output_dir");
    out_dir = it == cfg.globals.end() ? "report" : it->second.scalar("output_dir");
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  ReportOutcome outcome;
  CertificateArchive archive(fs::path(out_dir) / "certificates");
  ExperimentContext ctx{options, std::ref(archive)};
  Json experiments = Json::array();
  auto emit = [&](const std::string& stem, const Json& j, const std::string& csv = "") {
    std::string path = (fs::path(out_dir) / (stem + ".json")).string();
    write_json_file(path, j);
    outcome.files.push_back(path);
    if (!csv.empty()) {
      std::string cpath = (fs::path(out_dir) / (stem + ".csv")).string();
      detail::write_text_file(cpath, csv);
      outcome.files.push_back(cpath);
    }
  };

  for (const auto& sec : cfg.experiments) {
    const std::string kind = sec.require("kind");
    Json entry = {{"name", sec.name}, {"kind", kind}, {"outputs", Json::array()}};
    const std::size_t first_file = outcome.files.size();
    if (kind == "lambda_scan") {
      Form mult = parse_form(sec.get("multiplier", "x^2+y^2+z^2"), 3);
      Rational lo = detail::parse_config_rational(sec.get("lo", "1"), "lo");
      Rational hi = detail::parse_config_rational(sec.get("hi", "4"), "hi");
      Rational tol = detail::parse_config_rational(sec.get("tolerance", "1/64"), "tolerance");
      for (const auto& spec : sec.list("forms", {"M", "R", "S"})) {
        auto [key, p] = resolve_form(spec);
        auto r = lambda_scan(p, mult, lo, hi, tol, ctx, key);
        emit(sec.name + "_" + key, to_json(r), detail::lambda_csv(r));
      }
    } else if (kind == "triangle_grid") {
      auto axis = parse_grid_axis(sec.get("grid", "1/2:3:1/2"));
      Rational margin = detail::parse_config_rational(sec.get("margin", "1/100"), "margin");
      for (const auto& spec : sec.list("families", {"M", "R", "S"})) {
        auto [key, p] = resolve_form(spec);
        auto r = triangle_grid(key, p, axis, margin, ctx);
        emit(sec.name + "_" + key, to_json(r), triangle_csv(r));
      }
    } else if (kind == "denominator_search") {
      int n_max = detail::parse_int(sec.get("n_max", "2"), "n_max");
      for (const auto& spec : sec.list("forms")) {
        auto [key, p] = resolve_form(spec);
        emit(sec.name + "_" + key, to_json(denominator_search(p, n_max, ctx, key)));
      }
    } else if (kind == "degeneration") {
      auto [pkey, p] = resolve_form(sec.require("p"));
      auto [hkey, h] = resolve_form(sec.require("h"), p.n_vars());
      std::vector<Rational> rs;
      for (const auto& r : sec.list("r", {"1", "2", "4", "8"})) rs.push_back(detail::parse_config_rational(r, "r"));
      auto trace = degeneration_trace(h, p, rs, ctx, sec.name);
      emit(sec.name, to_json(trace, hkey + " * " + pkey));
    } else if (kind == "stengle_powers") {
      std::vector<int> s;
      for (const auto& v : sec.list("s", {"0"})) s.push_back(detail::parse_int(v, "s"));
      emit(sec.name, to_json(stengle_power_check(s, ctx)));
    } else if (kind == "check_sos") {
      Json arr = Json::array();
      for (const auto& spec : sec.list("forms")) {
        auto [key, p] = resolve_form(spec);
        auto v = run_check(ctx, key, p);
        arr.push_back({{"form", key}, {"status", to_string(v.status)}, {"route", v.diagnostics.route}});
      }
      emit(sec.name, {{"schema", 1}, {"experiment", "check_sos"}, {"results", arr}});
    } else if (kind == "polya") {
      std::string mode_s = sec.get("mode", "even");
      if (mode_s != "even" && mode_s != "simplex") throw ConfigError("mode must be 'even' or 'simplex'");
      auto mode = mode_s == "even" ? PositivityMode::EvenSquares : PositivityMode::Simplex;
      int depth = detail::parse_int(sec.get("depth", "6"), "depth");
      int n_max = detail::parse_int(sec.get("n_max", "8"), "n_max");
      Json arr = Json::array();
      for (const auto& spec : sec.list("forms")) {
        auto [key, p] = resolve_form(spec);
        arr.push_back(to_json(polya_report(key, p, mode, depth, n_max)));
      }
      emit(sec.name, {{"schema", 1}, {"experiment", "polya"}, {"reports", arr}});
    }
    for (std::size_t i = first_file; i < outcome.files.size(); ++i) entry["outputs"].push_back(outcome.files[i]);
    experiments.push_back(entry);
  }
  outcome.certificates = archive.count;
  outcome.verification_failures = archive.failures;
  outcome.undecided = archive.undecided;
  outcome.summary = {{"schema", 1},
                     {"experiments", experiments},
                     {"certificates", archive.count},
                     {"verification_failures", archive.failures},
                     {"failed_labels", archive.failed},
                     {"undecided", archive.undecided}};
  std::string path = (fs::path(out_dir) / "report.json").string();
  write_json_file(path, outcome.summary);
  outcome.files.push_back(path);
  return outcome;
}

}  // namespace sosc
