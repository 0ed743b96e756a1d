#include "deconv/error.hpp"
#include "deconv/orthopoly.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

using namespace deconv;
using namespace deconv::orthopoly;

namespace {

// Monic orthogonal polynomials by Gram-Schmidt on monomials, given the moments
// of the weight. coeffs[n][m] is the x^m coefficient of the degree-n polynomial.
std::vector<std::vector<long double>> gram_schmidt(const std::function<long double(int)>& moment, int degree) {
    std::vector<std::vector<long double>> p(degree + 1);
    auto inner = [&](const std::vector<long double>& a, const std::vector<long double>& b) {
        long double s = 0;
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) s += a[i] * b[j] * moment(static_cast<int>(i + j));
        return s;
    };
    for (int n = 0; n <= degree; ++n) {
        std::vector<long double> v(n + 1, 0.0L);
        v[n] = 1.0L;
        for (int m = 0; m < n; ++m) {
            const long double c = inner(v, p[m]) / inner(p[m], p[m]);
            for (size_t i = 0; i < p[m].size(); ++i) v[i] -= c * p[m][i];
        }
        p[n] = v;
    }
    return p;
}

long double horner(const std::vector<long double>& c, long double x) {
    long double r = 0;
    for (size_t i = c.size(); i-- > 0;) r = r * x + c[i];
    return r;
}

// Leading coefficient from the n-th forward difference with step h.
double leading(const std::function<double(double)>& f, int n, double x0, double h) {
    double sum = 0.0;
    double binom = 1.0;
    for (int i = 0; i <= n; ++i) {
        sum += ((n - i) % 2 == 0 ? 1.0 : -1.0) * binom * f(x0 + i * h);
        binom = binom * (n - i) / (i + 1);
    }
    return sum / (std::tgamma(n + 1.0) * std::pow(h, n));
}

long double geometric_moment(double p, int k) {
    long double s = 0;
    long double w = 1.0L - p;
    for (int x = 0; x < 4000; ++x) {
        s += std::pow(static_cast<long double>(x), k) * w;
        w *= p;
        if (w < 1e-30L) break;
    }
    return s;
}

}  // namespace

TEST(Laguerre, PrintedLowDegrees) {
    EXPECT_EQ(eval_laguerre(0, 1.0, 7.3), 1.0);
    EXPECT_DOUBLE_EQ(eval_laguerre(1, 1.0, 2.0), -1.0);
    EXPECT_DOUBLE_EQ(eval_laguerre(2, 1.0, 0.0), 1.0);
}

TEST(Laguerre, DegreeAboveCapThrows) {
    EXPECT_THROW((void)eval_laguerre(kDegreeCap + 1, 1.0, 1.0), DegreeOverflowError);
    EXPECT_THROW((void)eval_laguerre(-1, 1.0, 1.0), DomainError);
}

TEST(Laguerre, ScaledFamilyMatchesDefinition) {
    for (int n = 0; n <= 8; ++n) {
        for (double x : {0.0, 0.3, 2.5, 9.0}) {
            const double expect = std::pow(0.5, -n) * std::tgamma(n + 1.0) * eval_laguerre(n, 0.5, x);
            EXPECT_NEAR(eval_laguerre_scaled(n, 0.5, x), expect, 1e-10 * (1 + std::abs(expect)));
        }
    }
}

TEST(Laguerre, MatchesGramSchmidtOracle) {
    const auto monic = gram_schmidt([](int k) { return std::tgamma(static_cast<long double>(k) + 1); }, 5);
    for (int n = 1; n <= 5; ++n) {
        const double lead = leading([n](double x) { return eval_laguerre(n, 1.0, x); }, n, 0.0, 1.0);
        for (double x : {0.0, 0.7, 3.2, 8.5}) {
            const double oracle = static_cast<double>(horner(monic[n], x));
            EXPECT_NEAR(eval_laguerre(n, 1.0, x) / lead, oracle, 1e-8 * (1 + std::abs(oracle))) << n << " " << x;
        }
    }
}

TEST(ShiftedLegendre, SpecValues) {
    EXPECT_NEAR(eval_shifted_legendre(1, 0.5), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(eval_shifted_legendre(2, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(eval_shifted_legendre(2, 0.0), 1.0);
}

TEST(ShiftedLegendre, OutsideUnitIntervalThrows) {
    EXPECT_THROW((void)eval_shifted_legendre(2, 1.2), DomainError);
    EXPECT_THROW((void)eval_shifted_legendre(2, -0.1), DomainError);
}

TEST(ShiftedLegendre, MatchesGramSchmidtOracle) {
    const auto monic = gram_schmidt([](int k) { return 1.0L / (k + 1); }, 6);
    // Degree 2 from the oracle is x^2 - x + 1/6, i.e. 6x^2 - 6x + 1 up to scale.
    EXPECT_NEAR(static_cast<double>(monic[2][0]), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(static_cast<double>(monic[2][1]), -1.0, 1e-15);
    for (int n = 1; n <= 6; ++n) {
        const double lead = leading([n](double x) { return eval_shifted_legendre(n, x); }, n, 0.0, 1.0 / n);
        for (double x : {0.0, 0.15, 0.5, 0.83, 1.0}) {
            const double oracle = static_cast<double>(horner(monic[n], x));
            EXPECT_NEAR(eval_shifted_legendre(n, x) / lead, oracle, 1e-9) << n << " " << x;
        }
    }
}

TEST(Meixner, SpecValues) {
    EXPECT_EQ(eval_meixner(0, 0.5, 4.0), 1.0);
    EXPECT_DOUBLE_EQ(eval_meixner(1, 0.5, 0.0), 0.5);
    // Hand Gram-Schmidt: monic x^2 - 5x + 2 at 3 is -4, leading coefficient ((1-p)^2/p)^2 = 1/4.
    EXPECT_NEAR(eval_meixner(2, 0.5, 3.0), -1.0, 1e-14);
}

TEST(Meixner, MatchesGramSchmidtOracle) {
    for (double p : {0.3, 0.5, 0.7}) {
        const auto monic = gram_schmidt([p](int k) { return geometric_moment(p, k); }, 5);
        for (int n = 1; n <= 5; ++n) {
            const double lead = leading([n, p](double x) { return eval_meixner(n, p, x); }, n, 0.0, 1.0);
            for (double x : {0.0, 1.0, 3.0, 7.0, 12.0}) {
                const double oracle = static_cast<double>(horner(monic[n], x));
                EXPECT_NEAR(eval_meixner(n, p, x) / lead, oracle, 1e-7 * (1 + std::abs(oracle)))
                    << p << " " << n << " " << x;
            }
        }
    }
}

TEST(Meixner, GeneralFamilyReducesAtBetaOne) {
    for (int n = 0; n <= 6; ++n)
        for (double x : {0.0, 2.0, 5.0}) EXPECT_NEAR(eval_meixner_general(n, 1.0, 0.5, x), eval_meixner(n, 0.5, x),
                                                    1e-10 * (1 + std::abs(eval_meixner(n, 0.5, x))));
}

TEST(Meixner, PrintedSeedIsNotOrthogonal) {
    // <M_1, M_0> under p^x (1-p) with M_1 = 1 - p - x/p equals 1 - p - E[x]/p, E[x] = p/(1-p).
    const double p = 0.5;
    double s = 0.0;
    double w = 1.0 - p;
    for (int x = 0; x < 200; ++x, w *= p) s += w * eval_meixner_printed_seed(1, p, x);
    EXPECT_NEAR(s, 1.0 - p - 1.0 / (1.0 - p), 1e-12);
    EXPECT_GT(std::abs(s), 1.0);
}

TEST(Certify, AllFamiliesDegreeTen) {
    for (const auto& spec : {PolynomialFamilySpec::laguerre(1.0, 10), PolynomialFamilySpec::shifted_legendre(10),
                             PolynomialFamilySpec::meixner(0.5, 10)}) {
        const auto table = certify_orthonormality(spec);
        EXPECT_LT(table.max_gram_error(), 1e-8) << to_string(spec.kind);
        ASSERT_EQ(table.norms().size(), 11u);
        for (double h : table.norms()) EXPECT_GT(h, 0.0);
    }
}

TEST(Certify, LegendreNormsMatchClosedForm) {
    const auto table = certify_orthonormality(PolynomialFamilySpec::shifted_legendre(10));
    for (int n = 0; n <= 10; ++n) EXPECT_NEAR(table.norms()[n] * table.norms()[n], 1.0 / (2 * n + 1), 1e-12);
}

TEST(Certify, LaguerreRecurrenceIsAlreadyOrthonormal) {
    const auto table = certify_orthonormality(PolynomialFamilySpec::laguerre(1.0, 15));
    for (double h : table.norms()) EXPECT_NEAR(h, 1.0, 1e-10);
}

TEST(Certify, MeixnerFallsBackToRecurrenceSeed) {
    const auto table = certify_orthonormality(PolynomialFamilySpec::meixner(0.5, 8));
    EXPECT_EQ(table.meixner_definition(), MeixnerDefinition::RecurrenceSeed);
    EXPECT_NE(table.provenance().find("rejected"), std::string::npos);
    for (int n = 0; n <= 8; ++n) {
        const double expect = std::pow(0.5, -n) * std::pow(0.5, 2 * n) * std::pow(std::tgamma(n + 1.0), 2);
        EXPECT_NEAR(table.norms()[n] * table.norms()[n], expect, 1e-9 * expect);
    }
}

TEST(Certify, InvalidSpecsRejected) {
    EXPECT_THROW((void)PolynomialFamilySpec::meixner(1.2, 5), DomainError);
    EXPECT_THROW((void)PolynomialFamilySpec::laguerre(-1.0, 5), DomainError);
    EXPECT_THROW((void)PolynomialFamilySpec::laguerre(1.0, kDegreeCap + 1), DegreeOverflowError);
}

TEST(BasisTable, ValuesAgreeWithValue) {
    const auto table = certify_orthonormality(PolynomialFamilySpec::laguerre(1.0, 12));
    std::vector<double> out(13);
    for (double x : {0.0, 0.5, 4.0, 20.0}) {
        table.values(x, out);
        for (int n = 0; n <= 12; ++n) EXPECT_NEAR(out[n], table.value(n, x), 1e-10 * (1 + std::abs(out[n])));
    }
    EXPECT_THROW((void)table.raw(13, 1.0), DegreeOverflowError);
}

TEST(AdditionLaguerre, SmallCases) {
    const auto t0 = addition_split_laguerre(0, 0.5, 0.5);
    ASSERT_EQ(t0.size(), 1u);
    EXPECT_EQ(t0[0].s, 0);
    EXPECT_DOUBLE_EQ(t0[0].coefficient, 1.0);
    const auto t1 = addition_split_laguerre(1, 0.5, 0.5);
    ASSERT_EQ(t1.size(), 2u);
    EXPECT_DOUBLE_EQ(t1[0].coefficient, 0.5);
    EXPECT_DOUBLE_EQ(t1[1].coefficient, 0.5);
    EXPECT_THROW((void)addition_split_laguerre(2, 0.0, 1.0), DomainError);
}

TEST(AdditionLaguerre, IdentityAtRandomPoints) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 10.0);
    for (int n : {3, 8}) {
        const auto terms = addition_split_laguerre(n, 0.5, 0.5);
        for (size_t i = 0; i + 1 < terms.size(); ++i)
            EXPECT_DOUBLE_EQ(terms[i].coefficient, terms[terms.size() - 1 - i].coefficient);
        for (int r = 0; r < 50; ++r) {
            const double y = unif(gen), z = unif(gen);
            const double lhs = eval_laguerre_scaled(n, 1.0, y + z);
            double rhs = 0.0;
            for (const auto& t : terms)
                rhs += t.coefficient * eval_laguerre_scaled(t.s, 0.5, y) * eval_laguerre_scaled(n - t.s, 0.5, z);
            EXPECT_LT(std::abs(lhs - rhs) / (1 + std::abs(lhs)), 1e-10);
        }
    }
}

TEST(AdditionMeixner, SmallCases) {
    const auto t1 = addition_split_meixner(1, 0.5, 0.5, 0.5);
    ASSERT_EQ(t1.size(), 2u);
    EXPECT_DOUBLE_EQ(t1[0].coefficient, 1.0);
    EXPECT_DOUBLE_EQ(t1[1].coefficient, 1.0);
    EXPECT_EQ(addition_split_meixner(0, 0.5, 0.5, 0.5).size(), 1u);
    EXPECT_THROW((void)addition_split_meixner(2, 0.5, 0.6, 0.5), DomainError);
}

TEST(AdditionMeixner, IdentityAtIntegerPairs) {
    const int n = 4;
    const auto terms = addition_split_meixner(n, 0.5, 0.5, 0.5);
    for (int y = 0; y <= 20; ++y) {
        for (int z = 0; z <= 20; ++z) {
            const double lhs = eval_meixner(n, 0.5, y + z);
            double rhs = 0.0;
            for (const auto& t : terms)
                rhs += t.coefficient * eval_meixner_general(t.s, 0.5, 0.5, y) *
                       eval_meixner_general(n - t.s, 0.5, 0.5, z);
            EXPECT_LT(std::abs(lhs - rhs) / (1 + std::abs(lhs)), 1e-8) << y << " " << z;
        }
    }
}

TEST(Binomial, Values) {
    EXPECT_EQ(binomial(5, 2), 10.0);
    EXPECT_EQ(binomial(30, 15), 155117520.0);
    EXPECT_EQ(binomial(4, 5), 0.0);
}
