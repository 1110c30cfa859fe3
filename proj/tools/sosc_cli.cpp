#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sosc/sosc.hpp"

namespace {

using namespace sosc;

constexpr int kOk = 0;
constexpr int kVerificationFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Catalog key, file containing form text, or form text itself.
std::pair<std::string, Form> load_form(const std::string& spec, int vars) {
  if (auto f = find_named_form(spec)) return {spec, f->form};
  std::string text = spec;
  std::string label = spec;
  if (std::filesystem::is_regular_file(spec)) {
    text = read_text(spec);
    label = std::filesystem::path(spec).stem().string();
  }
  try {
    return {label, parse_form(text, vars > 0 ? vars : infer_n_vars(text))};
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("cannot parse form: ") + e.what());
  }
}

Rational parse_q(const std::string& text, const char* what) {
  try {
    return parse_rational(text);
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid rational for ") + what + ": '" + text + "'");
  }
}

std::vector<Rational> parse_q_list(const std::string& text, const char* what) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(parse_q(tok, what));
  if (out.empty()) throw UsageError(std::string("empty list for ") + what);
  return out;
}

void write_or_print(const Json& j, const std::string& path) {
  if (path.empty())
    std::cout << j.dump(1) << '\n';
  else
    write_json_file(path, j);
}

/// Re-verifies the certificate of a verdict from its serialized JSON.
bool reverify(const Form& p, const SosVerdict& v) {
  if (v.status == SosStatus::Undecided) return false;
  Json j = v.status == SosStatus::Feasible ? to_json(p, *v.certificate) : to_json(p, *v.dual);
  LoadedCertificate loaded = certificate_from_json(Json::parse(j.dump()));
  if (auto* g = std::get_if<GramCertificate>(&loaded.certificate)) return verify_gram_exact(loaded.form, *g);
  return verify_dual_exact(loaded.form, std::get<DualCertificate>(loaded.certificate));
}

/// Counts verdicts whose certificate does not re-verify.
struct VerifyingSink {
  int failures = 0;
  void operator()(const std::string& label, const Form& p, const SosVerdict& v) {
    if (v.status != SosStatus::Undecided && !reverify(p, v)) {
      ++failures;
      std::cerr << "certificate failed to verify: " << label << '\n';
    }
  }
};

int cmd_check(const std::string& spec, int vars, bool json, const std::string& basis_mode, const std::string& out) {
  auto [label, p] = load_form(spec, vars);
  SosOptions opt;
  if (basis_mode == "full") opt.basis_mode = BasisMode::Full;
  SosVerdict v = check_sos(p, opt);
  const bool ok = reverify(p, v);
  if (json || !out.empty()) {
    Json j;
    if (v.status == SosStatus::Feasible)
      j = to_json(p, *v.certificate);
    else if (v.status == SosStatus::Infeasible)
      j = to_json(p, *v.dual);
    else
      j = {{"schema", kCertificateSchema}, {"kind", "undecided"}, {"form", form_to_json(p)}};
    j["status"] = to_string(v.status);
    j["route"] = v.diagnostics.route;
    write_or_print(j, out);
  }
  if (!json) {
    std::cout << label << ": " << to_string(v.status) << '\n'
              << "  form        " << to_string(p) << '\n'
              << "  route       " << v.diagnostics.route << '\n'
              << "  basis size  " << v.diagnostics.basis_size << '\n'
              << "  margin      " << v.diagnostics.margin << '\n'
              << "  sdp iters   " << v.diagnostics.sdp_iterations << '\n';
    if (v.status != SosStatus::Undecided) std::cout << "  verified    " << (ok ? "yes" : "NO") << '\n';
    if (v.status == SosStatus::Feasible) {
      auto squares = extract_squares(p, *v.certificate);
      std::cout << "  squares     " << squares.size() << '\n';
      for (const auto& s : squares) std::cout << "    " << to_string(s.weight) << " * (" << to_string(s.root) << ")^2\n";
    }
  }
  return ok ? kOk : kVerificationFailure;
}

int cmd_lambda(const std::string& form, const std::string& tol, const std::string& lo, const std::string& hi,
               const std::string& multiplier, const std::string& out) {
  auto [key, p] = load_form(form, 3);
  if (p.n_vars() != 3) throw UsageError("lambda-scan needs a ternary form");
  Form mult = parse_form(multiplier, 3);
  VerifyingSink sink;
  ExperimentContext ctx{SosOptions{}, std::ref(sink)};
  LambdaScanResult r;
  try {
    r = lambda_scan(p, mult, parse_q(lo, "--lo"), parse_q(hi, "--hi"), parse_q(tol, "--tol"), ctx, key);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (const auto& h : r.history)
    std::cout << "  lambda = " << h.lambda.get_str() << "  " << to_string(h.status) << (h.retry ? "  (retry)" : "")
              << '\n';
  if (r.straddles)
    std::cout << key << ": boundary in [" << r.lambda_lo.get_str() << ", " << r.lambda_hi.get_str() << "]"
              << (r.honest ? "" : "  (bracket not fully resolved)") << '\n';
  else
    std::cout << key << ": " << r.message << '\n';
  if (!out.empty()) write_json_file(out, to_json(r));
  return sink.failures == 0 ? kOk : kVerificationFailure;
}

int cmd_triangle(const std::string& family, const std::string& grid, const std::string& margin,
                 const std::string& csv, const std::string& out) {
  auto [key, p] = load_form(family, 3);
  std::vector<Rational> axis;
  try {
    axis = parse_grid_axis(grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  VerifyingSink sink;
  ExperimentContext ctx{SosOptions{}, std::ref(sink)};
  auto r = triangle_grid(key, p, axis, parse_q(margin, "--margin"), ctx);
  std::size_t undecided = 0;
  for (const auto& c : r.cells) undecided += c.status == SosStatus::Undecided;
  std::cout << key << ": " << r.cells.size() << " cells, " << r.scored() << " scored, " << r.agreeing()
            << " agree, " << undecided << " undecided, condition signs "
            << (r.signs_identical() ? "identical" : "DIFFER") << '\n';
  for (const auto& c : r.cells)
    if (!c.agree)
      std::cout << "  (" << c.a.get_str() << ", " << c.b.get_str() << ", " << c.c.get_str() << ") "
                << to_string(c.status) << " condition sign " << c.quartic_sign << (c.boundary ? " [boundary]" : "")
                << '\n';
  if (!csv.empty()) {
    std::ofstream f(csv);
    f << triangle_csv(r);
  }
  if (!out.empty()) write_json_file(out, to_json(r));
  return sink.failures == 0 ? kOk : kVerificationFailure;
}

int cmd_denominator(const std::string& form, int nmax, int vars, const std::string& out) {
  auto [key, p] = load_form(form, vars);
  VerifyingSink sink;
  ExperimentContext ctx{SosOptions{}, std::ref(sink)};
  auto r = denominator_search(p, nmax, ctx, key);
  for (const auto& [n, st] : r.tried) std::cout << "  N = " << n << "  " << to_string(st) << '\n';
  if (r.minimal_n)
    std::cout << key << ": minimal N = " << *r.minimal_n << '\n';
  else
    std::cout << key << ": exhausted at N_max = " << nmax << '\n';
  if (!out.empty()) write_json_file(out, to_json(r));
  return sink.failures == 0 ? kOk : kVerificationFailure;
}

int cmd_degeneration(const std::string& h_spec, const std::string& p_spec, const std::string& r_list, int vars,
                     const std::string& out) {
  auto [pkey, p] = load_form(p_spec, vars);
  auto [hkey, h] = load_form(h_spec, p.n_vars());
  if (h.n_vars() != p.n_vars()) throw UsageError("h and p must have the same number of variables");
  VerifyingSink sink;
  ExperimentContext ctx{SosOptions{}, std::ref(sink)};
  auto trace = degeneration_trace(h, p, parse_q_list(r_list, "--r"), ctx, hkey + "*" + pkey);
  for (const auto& t : trace) std::cout << "  r = " << t.r.get_str() << "  " << to_string(t.status) << '\n';
  if (!out.empty()) write_json_file(out, to_json(trace, hkey + " * " + pkey));
  return sink.failures == 0 ? kOk : kVerificationFailure;
}

int cmd_polya(const std::string& form, const std::string& mode, int depth, int nmax, int vars,
              const std::string& out) {
  auto [key, p] = load_form(form, vars);
  auto m = mode == "simplex" ? PositivityMode::Simplex : PositivityMode::EvenSquares;
  PolyaReport r;
  try {
    r = polya_report(key, p, m, depth, nmax);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto& e = r.epsilon;
  std::printf("%-12s %-24s %-10s %-10s\n", "form", "epsilon bracket", "N_bound", "N_measured");
  std::string eps = e.epsilon_defined ? "[" + std::to_string(to_double(e.epsilon_lower)) + ", " +
                                            std::to_string(to_double(e.epsilon_upper)) + "]"
                                      : "undefined";
  std::printf("%-12s %-24s %-10s %-10s\n", key.c_str(), eps.c_str(),
              r.n_bound ? r.n_bound->get_str().c_str() : "-",
              r.n_measured ? std::to_string(*r.n_measured).c_str() : "exhausted");
  if (!out.empty()) write_json_file(out, to_json(r));
  return kOk;
}

int cmd_catalog() {
  std::printf("%-8s %-36s %-7s %-12s %s\n", "key", "name", "degree", "status", "citation");
  for (const auto& f : catalog())
    std::printf("%-8s %-36s %-7d %-12s %s\n", f.key.c_str(), f.name.c_str(), *f.form.degree(),
                to_string(f.known_status), f.citation.c_str());
  return kOk;
}

int cmd_report(const std::string& config, const std::string& out) {
  ReportConfig cfg;
  try {
    cfg = parse_report_config_file(config);
    validate_report_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  }
  ReportOutcome r = run_report(cfg, out);
  for (const auto& f : r.files) std::cout << "wrote " << f << '\n';
  std::cout << r.certificates << " certificates, " << r.verification_failures << " verification failures, "
            << r.undecided << " undecided\n";
  return r.exit_code();
}

int cmd_verify(const std::string& path) {
  LoadedCertificate c = certificate_from_json(read_json_file(path));
  bool ok = std::holds_alternative<GramCertificate>(c.certificate)
                ? verify_gram_exact(c.form, std::get<GramCertificate>(c.certificate))
                : verify_dual_exact(c.form, std::get<DualCertificate>(c.certificate));
  std::cout << path << ": " << (std::holds_alternative<GramCertificate>(c.certificate) ? "sos" : "not sos")
            << " certificate " << (ok ? "verified" : "REJECTED") << '\n';
  return ok ? kOk : kVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sum-of-squares certification toolkit"};
  app.require_subcommand(1);

  std::string form, file_out, basis = "newton";
  int vars = 0;
  bool json = false;
  auto* check = app.add_subcommand("check-sos", "decide whether a form is a sum of squares");
  check->add_option("form", form, "catalog key, file, or form text")->required();
  check->add_option("--vars", vars, "number of variables (inferred by default)");
  check->add_flag("--json", json, "print the certificate as JSON");
  check->add_option("--basis", basis, "monomial basis")->check(CLI::IsMember({"newton", "full"}));
  check->add_option("--out", file_out, "write the certificate JSON to this file");

  std::string tol = "1/64", lo = "1", hi = "4", multiplier = "x^2+y^2+z^2";
  auto* lambda = app.add_subcommand("lambda-scan", "bisect the sos boundary of multiplier * p(x, l y, l z)");
  lambda->add_option("--form", form, "M, R, S, file or form text")->required();
  lambda->add_option("--tol", tol, "bracket width");
  lambda->add_option("--lo", lo, "lower end of the lambda range");
  lambda->add_option("--hi", hi, "upper end of the lambda range");
  lambda->add_option("--multiplier", multiplier, "multiplier form");
  lambda->add_option("--json", file_out, "write the result JSON to this file");

  std::string grid = "1/2:7/2:1/2", margin = "1/100", csv;
  auto* triangle = app.add_subcommand("triangle-grid", "compare sos status with the triangle condition");
  triangle->add_option("--family", form, "M, R or S")->required();
  triangle->add_option("--grid", grid, "axis values, lo:hi:step or a comma list");
  triangle->add_option("--margin", margin, "cells with |condition| below this are not scored");
  triangle->add_option("--csv", csv, "write cells as CSV");
  triangle->add_option("--json", file_out, "write the result JSON to this file");

  int nmax = 3;
  auto* denom = app.add_subcommand("denominator-search", "smallest N with (sum x_j^2)^N p sos");
  denom->add_option("--form", form, "catalog key, file or form text")->required();
  denom->add_option("--nmax", nmax, "largest N tried")->check(CLI::NonNegativeNumber);
  denom->add_option("--vars", vars, "number of variables (inferred by default)");
  denom->add_option("--json", file_out, "write the result JSON to this file");

  std::string h_spec, r_list = "1,2,4,8";
  auto* degen = app.add_subcommand("degeneration", "status of h(x1, x2/r, ..., xn/r) p per r");
  degen->set_help_flag("--help", "Print this help message and exit");
  degen->add_option("--h", h_spec, "multiplier h (file, key or text)")->required();
  degen->add_option("--p", form, "form p (file, key or text)")->required();
  degen->add_option("--r", r_list, "comma-separated positive rationals");
  degen->add_option("--vars", vars, "number of variables (inferred by default)");
  degen->add_option("--json", file_out, "write the trace JSON to this file");

  std::string mode = "even";
  int depth = 6;
  int polya_nmax = 12;
  auto* polya = app.add_subcommand("polya", "epsilon bracket, exponent bound and measured exponent");
  polya->add_option("--form", form, "file, key or form text")->required();
  polya->add_option("--mode", mode, "positivity mode")->check(CLI::IsMember({"simplex", "even"}));
  polya->add_option("--depth", depth, "sphere subdivision depth")->check(CLI::Range(0, 20));
  polya->add_option("--nmax", polya_nmax, "largest exponent tried")->check(CLI::NonNegativeNumber);
  polya->add_option("--vars", vars, "number of variables (inferred by default)");
  polya->add_option("--json", file_out, "write the report JSON to this file");

  auto* cat = app.add_subcommand("catalog", "named forms");
  auto* cat_list = cat->add_subcommand("list", "print keys, degrees and known statuses");
  cat->require_subcommand(1);

  std::string config, out_dir;
  auto* report = app.add_subcommand("report", "run the experiments listed in a config file");
  report->add_option("--config", config, "config file")->required();
  report->add_option("--out", out_dir, "output directory (overrides output_dir)");

  std::string cert_path;
  auto* verify = app.add_subcommand("verify", "re-verify a certificate JSON file");
  verify->add_option("certificate", cert_path, "certificate file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*check) return cmd_check(form, vars, json, basis, file_out);
    if (*lambda) return cmd_lambda(form, tol, lo, hi, multiplier, file_out);
    if (*triangle) return cmd_triangle(form, grid, margin, csv, file_out);
    if (*denom) return cmd_denominator(form, nmax, vars, file_out);
    if (*degen) return cmd_degeneration(h_spec, form, r_list, vars, file_out);
    if (*polya) return cmd_polya(form, mode, depth, polya_nmax, vars, file_out);
    if (*cat_list) return cmd_catalog();
    if (*report) return cmd_report(config, out_dir);
    if (*verify) return cmd_verify(cert_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerificationFailure;
  }
  return kUsageError;
}
