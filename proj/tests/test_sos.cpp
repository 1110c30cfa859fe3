#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "support.hpp"

using namespace sosc;
using sosc::testing::Gen;
namespace checker = sosc::testing::checker;

namespace {

Form f2(const std::string& s) { return parse_form(s, 2); }
Form f3(const std::string& s) { return parse_form(s, 3); }

class SosTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("sosc_sos_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  /// check_sos plus a file round trip through the independent checker.
  SosVerdict checked(const Form& p, const SosOptions& opt = {}) {
    SosVerdict v = check_sos(p, opt);
    if (v.status != SosStatus::Undecided) {
      auto path = (dir_ / ("cert_" + std::to_string(++count_) + ".json")).string();
      auto r = sosc::testing::round_trip(p, v, path);
      EXPECT_TRUE(r.ok) << to_string(p) << ": " << r.reason;
    }
    return v;
  }

  std::filesystem::path dir_;
  int count_ = 0;
};

std::set<Exponent> as_set(const MonomialBasis& b) { return {b.monomials.begin(), b.monomials.end()}; }

}  // namespace

// -------------------------------------------------------------- Newton basis

TEST(HalfNewtonBasis, Motzkin) {
  auto b = half_newton_basis(motzkin());
  EXPECT_EQ(as_set(b), (std::set<Exponent>{{2, 1, 0}, {1, 2, 0}, {1, 1, 1}, {0, 0, 3}}));
  EXPECT_EQ(b.half_degree, 3);
  // Every other cubic is cut off by a small integer direction.
  std::vector<checker::Mono> support, dirs;
  const Form m = motzkin();
  for (const auto& [e, c] : m.terms()) support.push_back(e);
  checker::Mono cur;
  checker::directions(3, 4, cur, dirs);
  for (const auto& e : monomials_of_degree(3, 3))
    if (!as_set(b).count(e)) {
      EXPECT_TRUE(checker::separated(e, support, dirs));
    }
}

TEST(HalfNewtonBasis, Examples) {
  EXPECT_EQ(as_set(half_newton_basis(f2("(x^2 + y^2)^2"))), (std::set<Exponent>{{2, 0}, {1, 1}, {0, 2}}));
  EXPECT_EQ(half_newton_basis(parse_form("x^6", 1)).monomials, (std::vector<Exponent>{{3}}));
  EXPECT_THROW(half_newton_basis(f3("x^3")), std::invalid_argument);
}

TEST(HalfNewtonBasis, GradedLexOrderedWithoutDuplicates) {
  for (const auto& nf : catalog()) {
    auto b = half_newton_basis(nf.form);
    for (std::size_t i = 1; i < b.size(); ++i) EXPECT_TRUE(GrlexGreater{}(b.monomials[i - 1], b.monomials[i]));
    for (const auto& e : b.monomials) EXPECT_EQ(total_degree(e), b.half_degree);
  }
}

// --------------------------------------------------------------- Gram system

TEST(GramSystem, SingleEntry) {
  auto sys = gram_system(f2("x^2*y^2"), MonomialBasis{2, 2, {{1, 1}}});
  ASSERT_EQ(sys.equations.size(), 1u);
  EXPECT_EQ(sys.equations[0].monomial, (Exponent{2, 2}));
  EXPECT_EQ(sys.equations[0].rhs, 1);
  EXPECT_EQ(sys.equations[0].entries, (std::vector<std::pair<int, int>>{{0, 0}}));
}

TEST(GramSystem, BinaryQuartic) {
  auto sys = gram_system(f2("x^4 + y^4"), full_basis(2, 2));
  ASSERT_EQ(sys.basis.monomials, (std::vector<Exponent>{{2, 0}, {1, 1}, {0, 2}}));
  std::map<Exponent, std::pair<std::vector<std::pair<int, int>>, Rational>> eq;
  for (const auto& e : sys.equations) eq[e.monomial] = {e.entries, e.rhs};
  using P = std::vector<std::pair<int, int>>;
  EXPECT_EQ(eq.at({4, 0}), std::make_pair(P{{0, 0}}, Rational(1)));
  EXPECT_EQ(eq.at({3, 1}), std::make_pair(P{{0, 1}}, Rational(0)));
  EXPECT_EQ(eq.at({2, 2}), std::make_pair(P{{0, 2}, {1, 1}}, Rational(0)));
  EXPECT_EQ(eq.at({1, 3}), std::make_pair(P{{1, 2}}, Rational(0)));
  EXPECT_EQ(eq.at({0, 4}), std::make_pair(P{{2, 2}}, Rational(1)));
  EXPECT_TRUE(sys.unreachable.empty());
}

TEST(GramSystem, ZeroForm) {
  auto sys = gram_system(Form(3), full_basis(3, 2));
  EXPECT_FALSE(sys.equations.empty());
  for (const auto& e : sys.equations) EXPECT_EQ(e.rhs, 0);
}

TEST(GramSystem, UnreachableMonomials) {
  auto sys = gram_system(f2("x^4 + x^3*y + y^4"), MonomialBasis{2, 2, {{2, 0}, {0, 2}}});
  EXPECT_EQ(sys.unreachable, (std::vector<Exponent>{{3, 1}}));
}

// ------------------------------------------------------------------ numerics

TEST(SdpFeasibility, PerfectSquareInterior) {
  auto sys = gram_system(f2("(x^2 + y^2)^2"), full_basis(2, 2));
  auto sol = sdp_feasibility(sys);
  EXPECT_EQ(sol.status, NumericStatus::PrimalInterior);
  EXPECT_NEAR(sol.gram(0, 0), 1, 1e-6);
  EXPECT_NEAR(sol.gram(2, 2), 1, 1e-6);
  EXPECT_NEAR(sol.gram(0, 1), 0, 1e-6);
  EXPECT_NEAR(2 * sol.gram(0, 2) + sol.gram(1, 1), 2, 1e-6);
}

TEST(SdpFeasibility, MotzkinDualRay) {
  auto sys = gram_system(motzkin(), half_newton_basis(motzkin()));
  auto sol = sdp_feasibility(sys);
  EXPECT_EQ(sol.status, NumericStatus::DualRay);
  EXPECT_LT(sol.margin, 0);
}

TEST(SdpFeasibility, EmptySystem) {
  GramSystem sys{MonomialBasis{3, 0, {}}, {}, {}};
  auto sol = sdp_feasibility(sys);
  EXPECT_EQ(sol.status, NumericStatus::PrimalInterior);
  EXPECT_EQ(sol.gram.rows(), 0);
}

TEST(RoundGram, PerfectSquare) {
  auto sys = gram_system(f2("(x^2 + y^2)^2"), full_basis(2, 2));
  auto sol = sdp_feasibility(sys);
  unsigned bits = 0;
  auto cert = round_gram_to_rational(sol.gram, sys, SosOptions{}.denominator_bits, &bits);
  ASSERT_TRUE(cert);
  EXPECT_TRUE(verify_gram_exact(f2("(x^2 + y^2)^2"), *cert));
  EXPECT_LE(bits, 16u);
}

TEST(RoundGram, MotzkinMultiple) {
  Form qm = mul(sum_of_squares_power(3, 1), motzkin());
  auto v = check_sos(qm);
  ASSERT_EQ(v.status, SosStatus::Feasible);
  EXPECT_TRUE(verify_gram_exact(qm, *v.certificate));
}

TEST(RoundGram, FarFromPsdFails) {
  auto sys = gram_system(f2("(x^2 + y^2)^2"), full_basis(2, 2));
  Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(3, 3);
  bad(1, 1) = -50;
  EXPECT_FALSE(round_gram_to_rational(bad, sys, {10}));
}

// -------------------------------------------------------------- verification

TEST(VerifyGram, SingleSquare) {
  GramCertificate cert{MonomialBasis{2, 2, {{1, 1}}}, RationalMatrix::from_rows({{1}})};
  EXPECT_TRUE(verify_gram_exact(f2("x^2*y^2"), cert));
}

TEST(VerifyGram, TamperedEntry) {
  Form p = f2("(x^2 + y^2)^2");
  auto v = check_sos(p);
  ASSERT_EQ(v.status, SosStatus::Feasible);
  GramCertificate cert = *v.certificate;
  ASSERT_TRUE(verify_gram_exact(p, cert));
  cert.gram(0, 0) += make_rational(1, 1000);
  EXPECT_FALSE(verify_gram_exact(p, cert));
}

TEST(VerifyGram, NegativePivot) {
  Form p = f2("x^4 - x^2*y^2 + y^4");
  MonomialBasis b = full_basis(2, 2);
  GramCertificate indefinite{b, RationalMatrix::from_rows({{1, 0, 0}, {0, -1, 0}, {0, 0, 1}})};
  EXPECT_EQ(expand_gram(b, indefinite.gram), p);
  EXPECT_FALSE(verify_gram_exact(p, indefinite));
  GramCertificate good{b, RationalMatrix::from_rows({{1, 0, make_rational(-1, 2)}, {0, 0, 0}, {make_rational(-1, 2), 0, 1}})};
  EXPECT_TRUE(verify_gram_exact(p, good));
}

TEST(VerifyGram, StructuralRejections) {
  Form p = f2("x^2*y^2");
  EXPECT_FALSE(verify_gram_exact(p, GramCertificate{MonomialBasis{2, 2, {{1, 1}, {1, 1}}}, RationalMatrix::identity(2)}));
  EXPECT_FALSE(verify_gram_exact(p, GramCertificate{MonomialBasis{2, 2, {{1, 1}}}, RationalMatrix::identity(2)}));
  EXPECT_FALSE(verify_gram_exact(p, GramCertificate{MonomialBasis{2, 2, {{1, 1}, {2, 0}}},
                                                    RationalMatrix::from_rows({{1, 1}, {0, 0}})}));
}

TEST(VerifyDual, MotzkinFunctional) {
  auto v = check_sos(motzkin());
  ASSERT_EQ(v.status, SosStatus::Infeasible);
  ASSERT_TRUE(v.dual);
  EXPECT_TRUE(verify_dual_exact(motzkin(), *v.dual));
  EXPECT_LT(*apply_functional(*v.dual, motzkin()), 0);

  DualCertificate flipped = *v.dual;
  for (auto& [e, val] : flipped.functional) val = -val;
  EXPECT_FALSE(verify_dual_exact(motzkin(), flipped));

  DualCertificate broken = *v.dual;
  broken.functional[{0, 0, 6}] = -1;
  EXPECT_LT(*apply_functional(broken, motzkin()), 0);
  EXPECT_FALSE(verify_dual_exact(motzkin(), broken));
}

TEST(VerifyDual, BasisMustCoverNewtonPolytope) {
  auto v = check_sos(motzkin());
  ASSERT_TRUE(v.dual);
  DualCertificate shrunk = *v.dual;
  shrunk.basis.monomials.erase(std::find(shrunk.basis.monomials.begin(), shrunk.basis.monomials.end(), Exponent{1, 1, 1}));
  EXPECT_FALSE(verify_dual_exact(motzkin(), shrunk));
}

// ------------------------------------------------------------------ check_sos

TEST_F(SosTest, Examples) {
  EXPECT_EQ(checked(mul(sum_of_squares_power(3, 1), motzkin())).status, SosStatus::Feasible);
  EXPECT_EQ(checked(motzkin()).status, SosStatus::Infeasible);
  EXPECT_EQ(checked(mul(choi_lam(), swap_yz(choi_lam()))).status, SosStatus::Feasible);
}

TEST_F(SosTest, DegenerateInputs) {
  auto zero = checked(Form(3));
  EXPECT_EQ(zero.status, SosStatus::Feasible);
  EXPECT_EQ(zero.certificate->basis.size(), 0u);
  EXPECT_THROW(check_sos(f3("x^3 + y^3")), std::invalid_argument);
  auto neg = checked(f2("x^2 - y^2"));
  EXPECT_EQ(neg.status, SosStatus::Infeasible);
  EXPECT_EQ(neg.diagnostics.route, "negative sample");
  EXPECT_EQ(checked(f2("x^3*y")).status, SosStatus::Infeasible);
  EXPECT_EQ(checked(f2("x^2*y^2")).status, SosStatus::Feasible);
}

TEST_F(SosTest, BoundaryForms) {
  EXPECT_EQ(checked(f3("(x - y)^2*(x^2 + y^2 + z^2)^2")).status, SosStatus::Feasible);
  EXPECT_EQ(checked(f2("x^2*(x - y)^2*(x - 2*y)^2")).status, SosStatus::Feasible);
  EXPECT_EQ(checked(mul(f3("x^2"), motzkin())).status, SosStatus::Infeasible);
}

TEST(ExtractSquares, Examples) {
  GramCertificate one{MonomialBasis{2, 2, {{1, 1}}}, RationalMatrix::from_rows({{1}})};
  auto sq = extract_squares(f2("x^2*y^2"), one);
  ASSERT_EQ(sq.size(), 1u);
  EXPECT_EQ(sq[0].weight, 1);
  EXPECT_EQ(sq[0].root, f2("x*y"));

  Form p = f2("x^4 + 2*x^2*y^2 + y^4");
  auto v = check_sos(p);
  ASSERT_EQ(v.status, SosStatus::Feasible);
  auto s2 = extract_squares(p, *v.certificate);
  ASSERT_EQ(s2.size(), 1u);
  EXPECT_EQ(scale(mul(s2[0].root, s2[0].root), s2[0].weight), p);

  Form qm = mul(sum_of_squares_power(3, 1), motzkin());
  auto vq = check_sos(qm);
  ASSERT_EQ(vq.status, SosStatus::Feasible);
  auto s3 = extract_squares(qm, *vq.certificate);
  EXPECT_EQ(expand_squares(3, s3), qm);
  for (const auto& s : s3) EXPECT_GT(s.weight, 0);
}

TEST(ExtractSquares, RejectsInvalidCertificate) {
  GramCertificate bad{MonomialBasis{2, 2, {{1, 1}}}, RationalMatrix::from_rows({{2}})};
  EXPECT_THROW(extract_squares(f2("x^2*y^2"), bad), std::invalid_argument);
}

TEST(Serialization, RoundTrip) {
  Form qm = mul(sum_of_squares_power(3, 1), motzkin());
  auto v = check_sos(qm);
  ASSERT_TRUE(v.certificate);
  auto loaded = certificate_from_json(Json::parse(to_json(qm, *v.certificate).dump()));
  EXPECT_EQ(loaded.form, qm);
  auto* g = std::get_if<GramCertificate>(&loaded.certificate);
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->basis, v.certificate->basis);
  EXPECT_EQ(g->gram, v.certificate->gram);

  auto vm = check_sos(motzkin());
  ASSERT_TRUE(vm.dual);
  auto ld = certificate_from_json(Json::parse(to_json(motzkin(), *vm.dual).dump()));
  auto* d = std::get_if<DualCertificate>(&ld.certificate);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->functional, vm.dual->functional);
  EXPECT_TRUE(verify_dual_exact(ld.form, *d));
}

TEST(Serialization, RejectsMalformed) {
  Json j = to_json(f2("x^2*y^2"), GramCertificate{MonomialBasis{2, 2, {{1, 1}}}, RationalMatrix::from_rows({{1}})});
  Json a = j;
  a["schema"] = 99;
  EXPECT_THROW(certificate_from_json(a), std::invalid_argument);
  Json b = j;
  b["gram"][0] = Json::array({"2", "4"});
  EXPECT_THROW(certificate_from_json(b), std::invalid_argument);
  Json c = j;
  c["kind"] = "other";
  EXPECT_THROW(certificate_from_json(c), std::invalid_argument);
}

TEST(IndependentChecker, AgreesOnHandBuiltCertificates) {
  Form p = f2("x^4 - x^2*y^2 + y^4");
  MonomialBasis b = full_basis(2, 2);
  auto good = to_json(p, GramCertificate{b, RationalMatrix::from_rows({{1, 0, make_rational(-1, 2)},
                                                                       {0, 0, 0},
                                                                       {make_rational(-1, 2), 0, 1}})});
  auto bad = to_json(p, GramCertificate{b, RationalMatrix::from_rows({{1, 0, 0}, {0, -1, 0}, {0, 0, 1}})});
  EXPECT_TRUE(checker::check(good).ok);
  EXPECT_FALSE(checker::check(bad).ok);
  auto psd_edge = RationalMatrix::from_rows({{0, 0}, {0, 1}});
  EXPECT_TRUE(checker::check(to_json(f2("y^2"), GramCertificate{full_basis(2, 1), psd_edge})).ok);
  auto zero_diag = RationalMatrix::from_rows({{0, 1}, {1, 1}});
  EXPECT_FALSE(checker::check(to_json(f2("2*x*y + y^2"), GramCertificate{full_basis(2, 1), zero_diag})).ok);
}

// ---------------------------------------------------------------- properties

TEST_F(SosTest, PeelingOnRandomSquares) {
  Gen g(2024);
  for (int trial = 0; trial < 50; ++trial) {
    Form q = sosc::testing::sos_quartic(g);
    Form ell = g.linear(3, -2, 2);
    Form p = mul(mul(ell, ell), q);
    auto v = checked(p);
    ASSERT_EQ(v.status, SosStatus::Feasible) << "trial " << trial << ": " << to_string(p);
    for (const auto& s : extract_squares(p, *v.certificate))
      EXPECT_NO_THROW(divide_by_linear(s.root, ell)) << "trial " << trial << ": " << to_string(s.root);
  }
}

TEST_F(SosTest, PeelingPreservesInfeasibility) {
  Gen g(77);
  std::vector<Form> bases{motzkin(), robinson(), choi_lam(), swap_yz(choi_lam())};
  while (bases.size() < 10) {
    Form f = g.nonzero_form(3, 4, -3, 3);
    auto v = check_sos(f);
    if (v.status == SosStatus::Infeasible) bases.push_back(f);
  }
  for (std::size_t i = 0; i < bases.size(); ++i) {
    EXPECT_EQ(check_sos(bases[i]).status, SosStatus::Infeasible);
    Form ell = g.linear(3, -2, 2);
    auto v = checked(mul(mul(ell, ell), bases[i]));
    EXPECT_EQ(v.status, SosStatus::Infeasible) << i << ": " << to_string(bases[i]) << " with " << to_string(ell);
  }
}

TEST_F(SosTest, InvariantUnderLinearChange) {
  Gen g(31);
  std::vector<Form> forms{motzkin(), choi_lam(), mul(sum_of_squares_power(3, 1), motzkin()), f3("x^4 + y^4 + z^4"),
                          f3("x^4 - 2*y^2*z^2")};
  for (const auto& p : forms) {
    const SosStatus base = check_sos(p).status;
    ASSERT_NE(base, SosStatus::Undecided);
    for (int trial = 0; trial < 2; ++trial) {
      auto a = g.invertible(3, -1, 1);
      auto v = checked(linear_change(p, a));
      EXPECT_EQ(v.status, base) << to_string(p);
    }
  }
}

TEST_F(SosTest, BasisReductionIsSafe) {
  for (const auto& nf : catalog()) {
    SosOptions full;
    full.basis_mode = BasisMode::Full;
    auto a = checked(nf.form);
    auto b = checked(nf.form, full);
    EXPECT_NE(a.status, SosStatus::Undecided) << nf.key;
    EXPECT_EQ(a.status, b.status) << nf.key;
    EXPECT_EQ(a.status, nf.known_status == KnownStatus::Sos ? SosStatus::Feasible : SosStatus::Infeasible) << nf.key;
  }
}

TEST(BinaryOracle, KnownCases) {
  using sosc::testing::roots::binary_psd;
  EXPECT_TRUE(binary_psd(f2("x^6")));
  EXPECT_TRUE(binary_psd(f2("y^6")));
  EXPECT_FALSE(binary_psd(f2("x^5*y")));
  EXPECT_FALSE(binary_psd(f2("x^3*y^3")));
  EXPECT_TRUE(binary_psd(f2("(x - y)^2*y^4")));
  EXPECT_FALSE(binary_psd(f2("(x - y)^3*y^3")));
  EXPECT_TRUE(binary_psd(f2("(x^2 - 2*y^2)^2*(x^2 + y^2)")));
  EXPECT_FALSE(binary_psd(f2("(x^2 - 2*y^2)^2*(x^2 + y^2) - 1/1000*x^3*y^3")));
  EXPECT_TRUE(binary_psd(f2("x^6 - x^3*y^3 + y^6")));
  EXPECT_FALSE(binary_psd(f2("x^6 - 3*x^4*y^2 + y^6")));
}

TEST_F(SosTest, BinarySexticsMatchRootOracle) {
  Gen g(606);
  int psd = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Form p = sosc::testing::binary_sextic(g, trial);
    const bool expected = sosc::testing::roots::binary_psd(p);
    psd += expected;
    auto v = checked(p);
    EXPECT_EQ(v.status, expected ? SosStatus::Feasible : SosStatus::Infeasible)
        << "trial " << trial << ": " << to_string(p) << " route " << v.diagnostics.route;
  }
  EXPECT_GT(psd, 30);
  EXPECT_LT(psd, 90);
}
