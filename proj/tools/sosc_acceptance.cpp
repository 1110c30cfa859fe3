// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Usage: sosc_acceptance [--skip-slow] [--out DIR]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "support.hpp"

using namespace sosc;
namespace fs = std::filesystem;
using sosc::testing::Gen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Writes every certificate and re-verifies it with the independent checker.
struct Ledger {
  fs::path dir;
  std::size_t written = 0;
  std::size_t failures = 0;
  std::vector<std::string> failed;

  bool record(const std::string& label, const Form& p, const SosVerdict& v) {
    if (v.status == SosStatus::Undecided) return false;
    char name[40];
    std::snprintf(name, sizeof name, "cert_%06zu.json", ++written);
    auto r = sosc::testing::round_trip(p, v, (dir / name).string());
    if (!r.ok) {
      ++failures;
      failed.push_back(label + ": " + r.reason);
    }
    return r.ok;
  }

  CertificateSink sink() {
    return [this](const std::string& label, const Form& p, const SosVerdict& v) { record(label, p, v); };
  }
};

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << title << " -- " << detail << std::endl;
}

void info(const std::string& title, const std::string& detail) {
  std::cout << "INFO  " << title << " -- " << detail << std::endl;
}

std::string fmt(double s) {
  std::ostringstream o;
  o.precision(3);
  o << s << "s";
  return o.str();
}

SosVerdict timed_check(Ledger& ledger, const std::string& label, const Form& p, double& secs,
                       const SosOptions& opt = {}) {
  auto t0 = Clock::now();
  SosVerdict v = check_sos(p, opt);
  secs = seconds_since(t0);
  ledger.record(label, p, v);
  return v;
}

void criterion_1(Ledger& ledger) {
  bool ok = true;
  std::string detail;
  for (const auto& key : {"M", "R", "S", "STENGLE"}) {
    const Form p = find_named_form(key)->form;
    double secs = 0;
    auto v = timed_check(ledger, key, p, secs);
    const bool good = v.status == SosStatus::Infeasible && v.dual && verify_dual_exact(p, *v.dual) && secs < 10;
    ok = ok && good;
    detail += std::string(key) + "=" + to_string(v.status) + " " + fmt(secs) + "; ";
  }
  report(1, "non-sos classics Infeasible with exact duals, each < 10 s", ok, detail);
}

void criterion_2(Ledger& ledger) {
  ExperimentContext ctx;
  ctx.sink = ledger.sink();
  const Form q = sum_of_squares_power(3, 1);
  const Rational tol = make_rational(1, 64);
  bool ok = true;
  std::string detail;
  for (const auto& key : {"M", "R", "S"}) {
    const Form p = find_named_form(key)->form;
    auto t0 = Clock::now();
    auto r = lambda_scan(p, q, 1, 4, tol, ctx, key);
    const double secs = seconds_since(t0);
    auto at2 = run_check(ctx, std::string(key) + " lambda=2", lambda_family(p, q, 2), rational_zeros(p)).status;
    auto at33 = run_check(ctx, std::string(key) + " lambda=33/16", lambda_family(p, q, make_rational(33, 16)),
                          scaled_zeros(rational_zeros(p), {1, make_rational(33, 16), make_rational(33, 16)}))
                    .status;
    const bool good = r.straddles && r.honest && r.lambda_lo <= 2 && 2 <= r.lambda_hi &&
                      r.lambda_hi - r.lambda_lo <= tol && at2 == SosStatus::Feasible &&
                      at33 == SosStatus::Infeasible && secs < 300;
    ok = ok && good;
    detail += std::string(key) + " [" + r.lambda_lo.get_str() + ", " + r.lambda_hi.get_str() + "] " + fmt(secs) +
              " l=2:" + to_string(at2) + " l=33/16:" + to_string(at33) + "; ";
  }
  report(2, "lambda boundary at 2 within 1/64, exact probes at 2 and 33/16", ok, detail);
}

void criterion_3(Ledger& ledger) {
  ExperimentContext ctx;
  ctx.sink = ledger.sink();
  const auto axis = parse_grid_axis("1/2:7/2:1/2");
  bool ok = true;
  std::string detail;
  for (const auto& key : {"M", "R", "S"}) {
    auto r = triangle_grid(key, find_named_form(key)->form, axis, make_rational(1, 100), ctx);
    const bool good = r.scored() >= 200 && r.agreeing() == r.scored() && r.signs_identical();
    ok = ok && good;
    detail += std::string(key) + " " + std::to_string(r.agreeing()) + "/" + std::to_string(r.scored()) +
              (r.signs_identical() ? " signs identical" : " SIGN MISMATCH") + "; ";
  }
  report(3, "triangle condition agrees on every scored cell", ok, detail);
}

void criterion_4(Ledger& ledger) {
  SosOptions opt;
  opt.basis_mode = BasisMode::Full;
  const Form p = mul(choi_lam(), swap_yz(choi_lam()));
  double secs = 0;
  auto v = timed_check(ledger, "SS", p, secs, opt);
  const std::size_t basis = v.certificate ? v.certificate->basis.size() : 0;
  const bool ok = v.status == SosStatus::Feasible && verify_gram_exact(p, *v.certificate) && basis == 28 && secs < 60;
  report(4, "Choi-Lam product Feasible on the 28-monomial basis, < 60 s", ok,
         std::string(to_string(v.status)) + " basis " + std::to_string(basis) + " " + fmt(secs));
}

void criterion_5(Ledger& ledger, bool skip_slow) {
  double s2 = 0, s3 = 0;
  auto v2 = timed_check(ledger, "STENGLE^2", pow(stengle(), 2), s2);
  std::string detail = std::string("p^2 ") + to_string(v2.status) + " " + fmt(s2);
  bool ok = v2.status == SosStatus::Feasible;
  if (skip_slow) {
    detail += "; p^3 skipped";
    ok = false;
  } else {
    auto v3 = timed_check(ledger, "STENGLE^3", pow(stengle(), 3), s3);
    ok = ok && v3.status == SosStatus::Infeasible && v3.dual && s3 < 1800;
    detail += std::string("; p^3 ") + to_string(v3.status) + " " + fmt(s3) + " (" + v3.diagnostics.route + ")";
  }
  report(5, "Stengle powers: p^2 Feasible, p^3 Infeasible", ok, detail);
}

void criterion_6(Ledger& ledger) {
  Gen g(2024);
  int peeled = 0, divisible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Form q = sosc::testing::sos_quartic(g);
    Form ell = g.linear(3, -2, 2);
    Form p = mul(mul(ell, ell), q);
    auto v = check_sos(p);
    ledger.record("peel " + std::to_string(trial), p, v);
    if (v.status != SosStatus::Feasible) continue;
    ++peeled;
    bool all = true;
    for (const auto& s : extract_squares(p, *v.certificate)) {
      try {
        divide_by_linear(s.root, ell);
      } catch (const NotDivisible&) {
        all = false;
      }
    }
    divisible += all;
  }
  Gen h(77);
  std::vector<Form> bases{motzkin(), robinson(), choi_lam(), swap_yz(choi_lam())};
  while (bases.size() < 10) {
    Form f = h.nonzero_form(3, 4, -3, 3);
    if (check_sos(f).status == SosStatus::Infeasible) bases.push_back(f);
  }
  int kept = 0;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    Form ell = h.linear(3, -2, 2);
    Form p = mul(mul(ell, ell), bases[i]);
    auto v = check_sos(p);
    ledger.record("peel infeasible " + std::to_string(i), p, v);
    kept += v.status == SosStatus::Infeasible;
  }
  report(6, "peeling: l^2 q Feasible with l | every square; l^2 p stays Infeasible",
         peeled == 50 && divisible == 50 && kept == 10,
         std::to_string(peeled) + "/50 Feasible, " + std::to_string(divisible) + "/50 divisible, " +
             std::to_string(kept) + "/10 Infeasible");
}

void criterion_7(Ledger& ledger) {
  Gen g(606);
  int agree = 0, psd = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Form p = sosc::testing::binary_sextic(g, trial);
    const bool expected = sosc::testing::roots::binary_psd(p);
    psd += expected;
    auto v = check_sos(p);
    ledger.record("binary " + std::to_string(trial), p, v);
    agree += v.status == (expected ? SosStatus::Feasible : SosStatus::Infeasible);
  }
  report(7, "binary sextics: sos status equals real-root psd status", agree == 100,
         std::to_string(agree) + "/100 agree (" + std::to_string(psd) + " psd)");
}

void criterion_8() {
  const Integer bound = polya_bound(3, 6, make_rational(1, 3));
  const Form f = parse_form("x^2 - x*y + y^2", 2);
  auto searched = polya_exponent_search(f, 10, Strictness::Strict);
  auto oracle = sosc::testing::expansion_oracle(f, parse_form("x + y", 2), 10, [](const Rational& c) { return c > 0; });
  Gen g(1234);
  int tested = 0, within = 0;
  for (int trial = 0; trial < 60 && tested < 10; ++trial) {
    Form p = sosc::testing::even_sextic(g);
    auto e = sphere_extrema(p, 4);
    if (!e.epsilon_defined || !(e.epsilon_lower > 0)) continue;
    ++tested;
    Integer b = polya_bound(3, 6, e.epsilon_lower);
    const int cap = b > 40 ? 40 : static_cast<int>(b.get_si());
    auto n = even_denominator_search(p, cap);
    within += n && Integer(*n) <= b;
  }
  const bool ok = bound == 93 && searched == 3 && oracle == 3 && tested == 10 && within == 10;
  report(8, "Polya bound 93, exponent search 3, even pd sextics within bound", ok,
         "bound=" + bound.get_str() + " search=" + (searched ? std::to_string(*searched) : "none") +
             " oracle=" + (oracle ? std::to_string(*oracle) : "none") + " within=" + std::to_string(within) + "/" +
             std::to_string(tested));
}

void criterion_9() {
  Gen g(4444);
  int ok = 0;
  auto sum_sq = [](const std::array<Form, 4>& v) {
    Form s = mul(v[0], v[0]);
    for (int i = 1; i < 4; ++i) s = add(s, mul(v[i], v[i]));
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(1, 4);
    const int da = g.integer(0, 3), db = g.integer(0, 3);
    std::array<Form, 4> a{Form(n), Form(n), Form(n), Form(n)}, b = a;
    for (auto& f : a) f = g.form(n, da, -4, 4);
    for (auto& f : b) f = g.form(n, db, -4, 4);
    ok += sum_sq(four_square_compose(a, b)) == mul(sum_sq(a), sum_sq(b));
  }
  report(9, "four-square identity on random quadruples", ok == 100, std::to_string(ok) + "/100");
}

void trace_consistency(Ledger& ledger) {
  ExperimentContext ctx;
  ctx.sink = ledger.sink();
  const Form h = sum_of_squares_power(3, 1);
  const std::vector<Rational> rs{1, 2, 4, 8};
  auto trace = degeneration_trace(h, motzkin(), rs, ctx, "M");
  bool match_r = true, match_inv = true;
  std::string detail, inv_detail;
  for (const auto& pt : trace) {
    auto at_r = run_check(ctx, "M lambda=" + pt.r.get_str(), lambda_family(motzkin(), h, pt.r)).status;
    auto at_inv = run_check(ctx, "M lambda=1/" + pt.r.get_str(), lambda_family(motzkin(), h, 1 / pt.r)).status;
    match_r = match_r && at_r == pt.status && pt.status != SosStatus::Undecided;
    match_inv = match_inv && at_inv == pt.status;
    detail += "r=" + pt.r.get_str() + ":" + to_string(pt.status) + "/" + to_string(at_r) + " ";
    inv_detail += "r=" + pt.r.get_str() + ":" + to_string(pt.status) + "/" + to_string(at_inv) + " ";
  }
  report(11, "degeneration trace matches lambda scan at lambda = r (M)", match_r, detail);
  info("trace vs lambda = 1/r", inv_detail + (match_inv ? "(matches)" : "(differs)"));
}

}  // namespace

int main(int argc, char** argv) {
  bool skip_slow = false;
  fs::path out = fs::temp_directory_path() / "sosc_acceptance";
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--skip-slow")
      skip_slow = true;
    else if (a == "--out" && i + 1 < argc)
      out = argv[++i];
    else {
      std::cerr << "usage: sosc_acceptance [--skip-slow] [--out DIR]\n";
      return 2;
    }
  }
  fs::remove_all(out);
  fs::create_directories(out);
  Ledger ledger;
  ledger.dir = out;
  auto t0 = Clock::now();

  criterion_1(ledger);
  criterion_2(ledger);
  criterion_3(ledger);
  criterion_4(ledger);
  criterion_5(ledger, skip_slow);
  criterion_6(ledger);
  criterion_7(ledger);
  criterion_8();
  criterion_9();
  trace_consistency(ledger);

  std::string detail = std::to_string(ledger.written) + " certificates re-verified from " + out.string();
  for (const auto& f : ledger.failed) detail += "; " + f;
  report(10, "every serialized certificate re-verifies independently", ledger.written > 0 && ledger.failures == 0,
         std::to_string(ledger.failures) + " failures, " + detail);

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << " in " << fmt(seconds_since(t0))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
