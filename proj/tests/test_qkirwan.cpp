#include <gtest/gtest.h>

#include <random>

#include "affvortex/qkirwan.hpp"

using namespace affvortex;

namespace {

QHElement mono(int n, int r, int s, Rational c = 1) { return QHElement::monomial(n, r, s, c); }

// Independent oracle: multiply in Q[c, q] without reduction, then substitute
// c^N = q monomial by monomial.
QHElement naive_product(const QHElement& a, const QHElement& b) {
  std::map<std::pair<int, int>, Rational> raw;
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) raw[{ka.second + kb.second, ka.first + kb.first}] += ca * cb;
  QHElement out(a.n());
  for (const auto& [rs, c] : raw) {
    int r = rs.first, s = rs.second;
    while (r >= a.n()) {
      r -= a.n();
      ++s;
    }
    out = out + mono(a.n(), r, s, c);
  }
  return out;
}

EquivariantElement random_equivariant(std::mt19937& rng) {
  std::uniform_int_distribution<int> e(0, 6), c(-5, 5), terms(1, 4);
  EquivariantElement x;
  for (int t = terms(rng); t > 0; --t) x = x + EquivariantElement::monomial(e(rng), e(rng) % 3, Rational(c(rng), 1 + e(rng)));
  return x;
}

}  // namespace

TEST(QHElement, RelationAndUnit) {
  EXPECT_EQ(mono(3, 2, 0) * mono(3, 1, 0), mono(3, 0, 1));
  const QHElement x = mono(4, 3, 1, Rational(2, 3)) + mono(4, 1, 0);
  EXPECT_EQ(x * QHElement::one(4), x);
  EXPECT_EQ(mono(5, 7, 0), mono(5, 2, 1));
}

TEST(QHElement, SquareOfBinomial) {
  const QHElement x = mono(2, 1, 0) + mono(2, 0, 1);
  const QHElement sq = qh_mul(x, x);
  EXPECT_EQ(sq, mono(2, 0, 1) + mono(2, 1, 1, 2) + mono(2, 0, 2));
  EXPECT_EQ(sq.str(), "q + 2*c*q + q^2");
}

TEST(QHElement, RingAxiomsOnMonomials) {
  for (int n = 2; n <= 5; ++n) {
    std::vector<QHElement> basis;
    for (int r = 0; r < n; ++r)
      for (int s = 0; s <= 3; ++s) basis.push_back(mono(n, r, s));
    for (const auto& a : basis)
      for (const auto& b : basis) {
        EXPECT_EQ(a * b, b * a);
        EXPECT_EQ(a * b, naive_product(a, b));
        ASSERT_TRUE(a.degree() && b.degree());
        EXPECT_EQ((a * b).degree(), *a.degree() + *b.degree());
        for (const auto& c : basis) {
          EXPECT_EQ((a * b) * c, a * (b * c));
          EXPECT_EQ(a * (b + c), a * b + a * c);
        }
      }
  }
}

TEST(QHElement, MixedNIsRejected) {
  try {
    (void)(mono(2, 1, 0) * mono(3, 1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MixedN);
  }
  EXPECT_THROW((void)(mono(2, 1, 0) + mono(3, 1, 0)), Error);
}

TEST(QHElement, RenderAndParse) {
  EXPECT_EQ(QHElement(3).str(), "0");
  EXPECT_EQ(QHElement::one(3).str(), "1");
  const QHElement x = QHElement::parse("1 + 2*c*q + q^2", 2);
  EXPECT_EQ(x, mono(2, 0, 0) + mono(2, 1, 1, 2) + mono(2, 0, 2));
  EXPECT_EQ(x.str(), "1 + 2*c*q + q^2");
  EXPECT_EQ(QHElement::parse("c^3", 3).str(), "q");
  EXPECT_EQ(QHElement::parse("-3/4*c^2 - (c + 1)*(c - 1)", 4).str(), "1 - 7/4*c^2");
  for (const char* bad : {"", "c +", "x", "c^", "(c", "1/0", "c q"}) {
    try {
      QHElement::parse(bad, 3);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
    }
  }
}

TEST(Kirwan, QuantumExamples) {
  EXPECT_EQ(kirwan_q(1, 4), mono(4, 1, 0));
  EXPECT_EQ(kirwan_q(4, 4), mono(4, 0, 1));
  EXPECT_EQ(kirwan_q(4, 3), mono(3, 1, 1));
  for (int n = 2; n <= 5; ++n)
    for (int m = 0; m <= 4 * n; ++m) EXPECT_EQ(kirwan_q(m, n).degree(), 2 * m);
}

TEST(Kirwan, HomomorphismIdentity) {
  for (int n = 2; n <= 5; ++n)
    for (int a = 0; a <= 4 * n; ++a)
      for (int b = 0; a + b <= 4 * n; ++b) EXPECT_EQ(qh_mul(kirwan_q(a, n), kirwan_q(b, n)), kirwan_q(a + b, n));
}

TEST(Kirwan, KernelContainsQMinusUToTheN) {
  std::mt19937 rng(17);
  for (int n = 2; n <= 5; ++n) {
    const EquivariantElement rel = EquivariantElement::monomial(0, 1) - EquivariantElement::monomial(n, 0);
    EXPECT_TRUE(kirwan_q_lambda(rel, n).is_zero());
    for (int i = 0; i < 50; ++i) EXPECT_TRUE(kirwan_q_lambda(random_equivariant(rng) * rel, n).is_zero());
  }
  EXPECT_TRUE(kirwan_q_lambda(EquivariantElement{}, 3).is_zero());
  EXPECT_FALSE(kirwan_q_lambda(EquivariantElement::monomial(2, 0), 3).is_zero());
}

TEST(Kirwan, LambdaExtensionIsMultiplicative) {
  std::mt19937 rng(23);
  for (int n = 2; n <= 5; ++n)
    for (int i = 0; i < 20; ++i) {
      const auto x = random_equivariant(rng), y = random_equivariant(rng);
      EXPECT_EQ(kirwan_q_lambda(x * y, n), kirwan_q_lambda(x, n) * kirwan_q_lambda(y, n));
    }
}

TEST(Kirwan, ClassicalSpecialisation) {
  EXPECT_EQ(kirwan_classical(0, 3), QHElement::one(3));
  EXPECT_EQ(kirwan_classical(2, 3), mono(3, 2, 0));
  EXPECT_TRUE(kirwan_classical(3, 3).is_zero());
  for (int n = 2; n <= 5; ++n)
    for (int m = 0; m <= 4 * n; ++m) EXPECT_EQ(kirwan_q(m, n).at_q_zero(), kirwan_classical(m, n));
}

TEST(Kirwan, ExpressionsThroughTheParser) {
  const auto eval = [](const char* e, int n) { return kirwan_q_lambda(EquivariantElement::parse(e), n).str(); };
  EXPECT_EQ(eval("u^3", 3), "q");
  EXPECT_EQ(eval("u", 2), "c");
  EXPECT_EQ(eval("q - u^2", 2), "0");
  EXPECT_EQ(eval("(u + 1)^3", 2), "1 + 3*c + 3*q + c*q");
  EXPECT_EQ(EquivariantElement::parse("2*u^2*q - u").str(), "-u + 2*u^2*q");
}
