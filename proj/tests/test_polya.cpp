#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace sosc;
using sosc::testing::Gen;

namespace {

Form f2(const std::string& s) { return parse_form(s, 2); }
Form f3(const std::string& s) { return parse_form(s, 3); }

/// Exact points of the unit sphere: (2s, 2t, 1 - s^2 - t^2) / (1 + s^2 + t^2).
std::vector<std::vector<Rational>> rational_sphere_points(int steps) {
  std::vector<std::vector<Rational>> out;
  for (int i = -steps; i <= steps; ++i)
    for (int j = -steps; j <= steps; ++j) {
      Rational s = make_rational(i, 2), t = make_rational(j, 2);
      Rational d = 1 + s * s + t * t;
      out.push_back({2 * s / d, 2 * t / d, (1 - s * s - t * t) / d});
    }
  out.push_back({0, 0, -1});
  return out;
}

}  // namespace

TEST(SphereExtrema, SumOfSquaresIsConstant) {
  for (int depth : {0, 2, 4}) {
    auto e = sphere_extrema(sum_of_squares_power(3, 1), depth);
    EXPECT_EQ(e.inf_lower, 1);
    EXPECT_EQ(e.inf_upper, 1);
    EXPECT_EQ(e.sup_lower, 1);
    EXPECT_EQ(e.sup_upper, 1);
    ASSERT_TRUE(e.epsilon_defined);
    EXPECT_EQ(e.epsilon_lower, 1);
    EXPECT_EQ(e.epsilon_upper, 1);
  }
}

TEST(SphereExtrema, QuarticPowersConvergeToOneThird) {
  Form p = f3("x^4 + y^4 + z^4");
  Rational prev_width = -1;
  for (int depth : {2, 4, 6}) {
    auto e = sphere_extrema(p, depth);
    ASSERT_TRUE(e.epsilon_defined);
    EXPECT_LE(e.epsilon_lower, make_rational(1, 3));
    EXPECT_GE(e.epsilon_upper, make_rational(1, 3));
    EXPECT_LE(e.inf_lower, make_rational(1, 3));
    EXPECT_GE(e.inf_upper, make_rational(1, 3));
    EXPECT_GE(e.sup_upper, 1);
    EXPECT_LE(e.sup_lower, 1);
    Rational width = e.epsilon_upper - e.epsilon_lower;
    if (prev_width >= 0) {
      EXPECT_LE(width, prev_width);
    }
    prev_width = width;
  }
  auto fine = sphere_extrema(p, 6);
  EXPECT_LT(fine.epsilon_upper - fine.epsilon_lower, make_rational(1, 5));
  EXPECT_EQ(fine.sup_lower, 1);
}

TEST(SphereExtrema, MotzkinStraddlesZero) {
  for (int depth : {1, 3, 5}) {
    auto e = sphere_extrema(motzkin(), depth);
    EXPECT_LE(e.inf_lower, 0);
    EXPECT_GE(e.inf_upper, 0);
    EXPECT_LE(e.inf_lower, e.inf_upper);
    EXPECT_LE(e.sup_lower, e.sup_upper);
  }
}

TEST(SphereExtrema, BracketsContainRationalSpherePoints) {
  Gen g(5);
  std::vector<Form> forms{motzkin(), robinson(), choi_lam(), stengle(), f3("x^4 + y^4 + z^4"), g.nonzero_form(3, 4)};
  const auto pts = rational_sphere_points(4);
  for (const auto& p : forms) {
    auto e = sphere_extrema(p, 4);
    for (const auto& u : pts) {
      Rational v = evaluate(p, u);
      EXPECT_GE(v, e.inf_lower) << to_string(p);
      EXPECT_LE(v, e.sup_upper) << to_string(p);
    }
  }
}

TEST(SphereExtrema, EpsilonInvariantUnderPositiveScalar) {
  Gen g(6);
  for (int trial = 0; trial < 5; ++trial) {
    Form p = sosc::testing::even_sextic(g);
    Rational c = make_rational(g.integer(1, 9), g.integer(1, 9));
    auto a = sphere_extrema(p, 3), b = sphere_extrema(scale(p, c), 3);
    EXPECT_EQ(a.epsilon_defined, b.epsilon_defined);
    EXPECT_EQ(a.epsilon_lower, b.epsilon_lower);
    EXPECT_EQ(a.epsilon_upper, b.epsilon_upper);
    EXPECT_EQ(b.inf_lower, c * a.inf_lower);
  }
}

TEST(PolyaBound, Examples) {
  EXPECT_EQ(polya_bound(3, 6, make_rational(1, 3)), 93);
  EXPECT_EQ(polya_bound(3, 6, 1), 28);
  EXPECT_THROW(polya_bound(3, 6, 0), std::domain_error);
  EXPECT_THROW(polya_bound(3, 5, 1), std::invalid_argument);
}

TEST(PolyaBound, MatchesFloatingFormula) {
  for (int n = 1; n <= 4; ++n)
    for (int m = 2; m <= 10; m += 2)
      for (int k = 1; k <= 20; k += 3) {
        const double eps = 1.0 / k;
        const double rhs = n * m * (m - 1) / (4 * std::log(2.0) * eps) - (n + m) / 2.0;
        const double expect = std::max(0.0, std::ceil(rhs - 1e-9));
        EXPECT_NEAR(polya_bound(n, m, make_rational(1, k)).get_d(), expect, 1.0) << n << " " << m << " " << k;
      }
}

TEST(PolyaExponentSearch, Examples) {
  EXPECT_EQ(polya_exponent_search(f2("x^2 - x*y + y^2"), 10, Strictness::Strict), 3);
  EXPECT_EQ(polya_exponent_search(f2("x + y"), 10, Strictness::Strict), 0);
  EXPECT_FALSE(polya_exponent_search(f2("x - y"), 12, Strictness::Strict));
  auto oracle = sosc::testing::expansion_oracle(f2("x^2 - x*y + y^2"), f2("x + y"), 10, [](const Rational& c) { return c > 0; });
  EXPECT_EQ(oracle, 3);
}

TEST(PolyaExponentSearch, AgreesWithExpansionOracle) {
  Gen g(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(2, 3);
    Form f = g.nonzero_form(n, g.integer(1, 3), -2, 5);
    Form simplex(n);
    for (int i = 0; i < n; ++i) simplex = add(simplex, Form::variable(n, i));
    auto expect = sosc::testing::expansion_oracle(f, simplex, 8, [](const Rational& c) { return c > 0; });
    EXPECT_EQ(polya_exponent_search(f, 8, Strictness::Strict), expect) << to_string(f);
    auto expect_nn = sosc::testing::expansion_oracle(f, simplex, 8, [](const Rational& c) { return c >= 0; });
    auto got_nn = polya_exponent_search(f, 8, Strictness::Nonneg);
    EXPECT_EQ(got_nn.has_value(), expect_nn.has_value()) << to_string(f);
  }
}

TEST(EvenDenominatorSearch, Examples) {
  EXPECT_EQ(even_denominator_search(f2("(x^2 + y^2)^2"), 5), 0);
  EXPECT_EQ(even_denominator_search(f2("x^4 - x^2*y^2 + y^4"), 5), 1);
  EXPECT_FALSE(even_denominator_search(motzkin(), 4));
  EXPECT_THROW(even_denominator_search(stengle(), 3), std::invalid_argument);
  auto oracle = sosc::testing::expansion_oracle(motzkin(), sum_of_squares_power(3, 1), 4, [](const Rational& c) { return c >= 0; });
  EXPECT_FALSE(oracle);
}

TEST(EvenDenominatorSearch, ProductIsSos) {
  Form p = f2("x^4 - x^2*y^2 + y^4");
  auto n = even_denominator_search(p, 5);
  ASSERT_TRUE(n);
  Form prod = mul(pow(sum_of_squares_power(2, 1), static_cast<unsigned>(*n)), p);
  EXPECT_EQ(check_sos(prod).status, SosStatus::Feasible);
}

TEST(EvenDenominatorSearch, MonotoneInN) {
  Gen g(9);
  for (int trial = 0; trial < 6; ++trial) {
    Form p = sosc::testing::even_sextic(g);
    auto n = even_denominator_search(p, 12);
    if (!n) continue;
    Form f = mul(pow(sum_of_squares_power(3, 1), static_cast<unsigned>(*n)), p);
    for (int k = 0; k < 3; ++k) {
      for (const auto& [e, c] : f.terms()) EXPECT_GE(c, 0);
      f = mul(f, sum_of_squares_power(3, 1));
    }
  }
}

TEST(PolyaReportTest, MeasuredWithinBound) {
  auto r = polya_report("Q", f3("x^4 + y^4 + z^4"), PositivityMode::EvenSquares, 4, 30);
  ASSERT_TRUE(r.n_bound);
  ASSERT_TRUE(r.n_measured);
  EXPECT_LE(Integer(*r.n_measured), *r.n_bound);
  EXPECT_EQ(r.strictness, Strictness::Nonneg);
  Json j = to_json(r);
  EXPECT_EQ(j.at("form_id"), "Q");
}

TEST(PolyaSufficiency, RandomEvenPdSextics) {
  Gen g(1234);
  int tested = 0;
  for (int trial = 0; trial < 60 && tested < 10; ++trial) {
    Form p = sosc::testing::even_sextic(g);
    auto e = sphere_extrema(p, 4);
    if (!e.epsilon_defined || !(e.epsilon_lower > 0)) continue;
    ++tested;
    Integer bound = polya_bound(3, 6, e.epsilon_lower);
    const int cap = bound > 40 ? 40 : static_cast<int>(bound.get_si());
    auto n = even_denominator_search(p, cap);
    ASSERT_TRUE(n) << to_string(p) << " bound " << bound;
    EXPECT_LE(Integer(*n), bound);
  }
  EXPECT_EQ(tested, 10);
}
