#include "deconv/chi2.hpp"
#include "deconv/error.hpp"
#include "deconv/linalg.hpp"
#include "deconv/teststat.hpp"

#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

using namespace deconv;
using namespace deconv::teststat;
using measures::DistributionSpec;
using measures::ReferenceMeasureSpec;

namespace {

nullmodel::NullSpec mod1() {
    return nullmodel::make_null(DistributionSpec::exponential(1.0), DistributionSpec::chi_squared(1.0),
                                ReferenceMeasureSpec::exponential1());
}

Eigen::MatrixXd random_psd(std::mt19937_64& gen, int dim, int rank) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(dim, rank);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < rank; ++j) a(i, j) = normal(gen);
    Eigen::MatrixXd s = a * a.transpose();
    return 0.5 * (s + s.transpose());
}

// P(chi2_df <= x) = int_0^sqrt(x) 2 t^{df-1} e^{-t^2/2} / (2^{df/2} Gamma(df/2)) dt, composite Simpson.
double chi2_cdf_oracle(double x, int df) {
    if (x <= 0) return 0.0;
    const int m = 20000;
    const double top = std::sqrt(x), h = top / m;
    const double log_norm = 0.5 * df * std::log(2.0) + std::lgamma(0.5 * df);
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double t = i * h;
        const double f = t == 0.0 ? (df == 1 ? 2.0 * std::exp(-log_norm) : 0.0)
                                  : 2.0 * std::exp((df - 1) * std::log(t) - 0.5 * t * t - log_norm);
        s += ((i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2)) * f;
    }
    return s * h / 3;
}

std::vector<double> draw_h0(const nullmodel::NullSpec& null, int n, std::uint64_t seed) {
    measures::RngStream rng(seed, 0, measures::StreamDomain::Data);
    return nullmodel::sample_x(null, rng, static_cast<std::size_t>(n));
}

}  // namespace

TEST(Linalg, InvSqrtSmallCases) {
    EXPECT_TRUE(linalg::inv_sqrt_psd(Eigen::MatrixXd::Identity(3, 3), 1e12).isApprox(Eigen::MatrixXd::Identity(3, 3)));
    Eigen::MatrixXd d = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    const Eigen::MatrixXd r = linalg::inv_sqrt_psd(d, 1e12);
    EXPECT_NEAR(r(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(r(1, 1), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(r(0, 1)), 0.0, 1e-14);
}

TEST(Linalg, InvSqrtReconstruction) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 2 + trial % 11;
        const Eigen::MatrixXd s = random_psd(gen, dim, dim + 2);
        int rank = 0;
        const Eigen::MatrixXd r = linalg::inv_sqrt_psd(s, 1e12, &rank);
        EXPECT_EQ(rank, dim);
        EXPECT_LT((r * s * r - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_TRUE((r.array() == r.transpose().array()).all());
    }
}

TEST(Linalg, InvSqrtRankDeficient) {
    std::mt19937_64 gen(12);
    const Eigen::MatrixXd s = random_psd(gen, 6, 3);
    int rank = 0;
    const Eigen::MatrixXd r = linalg::inv_sqrt_psd(s, 1e12, &rank);
    EXPECT_EQ(rank, 3);
    // R S R is the projector onto the retained eigenspace.
    const Eigen::MatrixXd p = r * s * r;
    EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(p.trace(), 3.0, 1e-8);
}

TEST(Linalg, InvSqrtErrors) {
    Eigen::MatrixXd a(2, 2);
    a << 1, 0.5, 0.4, 1;
    EXPECT_THROW((void)linalg::inv_sqrt_psd(a, 1e12), DomainError);
    EXPECT_THROW((void)linalg::inv_sqrt_psd(Eigen::MatrixXd::Zero(2, 2), 1e12), NumericalError);
}

TEST(TSequence, SmallCases) {
    const auto zero = t_sequence(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4));
    EXPECT_TRUE((zero.array() == 0.0).all());
    const auto t = t_sequence(Eigen::Vector2d(3.0, 4.0), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_DOUBLE_EQ(t(0), 9.0);
    EXPECT_DOUBLE_EQ(t(1), 25.0);
}

TEST(TSequence, MatchesBruteForceAndIsMonotone) {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 2 + trial % 9;
        const Eigen::MatrixXd s = random_psd(gen, dim, dim + 3);
        Eigen::VectorXd b(dim);
        for (int i = 0; i < dim; ++i) b(i) = normal(gen);
        const auto t = t_sequence(b, s);
        for (int k = 1; k <= dim; ++k) {
            const Eigen::MatrixXd sk = s.topLeftCorner(k, k);
            const Eigen::VectorXd bk = b.head(k);
            const double brute = bk.dot(sk.inverse() * bk);
            EXPECT_NEAR(t(k - 1), brute, 1e-8 * (1 + brute));
            if (k > 1) EXPECT_GE(t(k - 1), t(k - 2));
        }
    }
}

TEST(TSequence, SingularBlockStillMonotone) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
    s(1, 1) = 0.0;
    const auto t = t_sequence(Eigen::Vector3d(1.0, 5.0, 2.0), s);
    EXPECT_DOUBLE_EQ(t(0), 1.0);
    EXPECT_DOUBLE_EQ(t(1), 1.0);
    EXPECT_DOUBLE_EQ(t(2), 5.0);
}

TEST(SelectOrder, Examples) {
    const double zeros[] = {0, 0, 0};
    EXPECT_EQ(select_order(zeros, 100), 1);
    const double tie[] = {1, 1 + std::log(100.0)};
    EXPECT_EQ(select_order(tie, 100), 1);
    const double second[] = {1, 2 + 2 * std::log(100.0)};
    EXPECT_EQ(select_order(second, 100), 2);
    const double late[] = {0.5, 1.0, 40.0, 41.0};
    EXPECT_EQ(select_order(late, 50), 3);
}

TEST(DefaultKmax, Formula) {
    EXPECT_EQ(default_kmax(50), 8);
    EXPECT_EQ(default_kmax(100), 10);
    EXPECT_EQ(default_kmax(500), 13);
    EXPECT_EQ(default_kmax(2), 3);
    EXPECT_EQ(default_kmax(100000000), 15);
    EXPECT_EQ(default_kmax(500, 5), 5);
    EXPECT_EQ(default_kmax(50, 12), 8);
}

TEST(QuantileIndex, Convention) {
    EXPECT_EQ(quantile_index(0.05, 2000), 1899u);
    EXPECT_EQ(quantile_index(0.05, 100), 94u);
    EXPECT_EQ(quantile_index(0.5, 101), 50u);
}

TEST(Chi2, AgainstIntegrationOracle) {
    EXPECT_EQ(stats::chi2_cdf(0.0, 1), 0.0);
    EXPECT_EQ(stats::chi2_cdf(-3.0, 2), 0.0);
    EXPECT_NEAR(stats::chi2_cdf(3.841459, 1), 0.95, 1e-6);
    for (int df = 1; df <= 10; ++df) {
        for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 15.0}) {
            EXPECT_NEAR(stats::chi2_cdf(x, df), chi2_cdf_oracle(x, df), 1e-9) << df << " " << x;
            EXPECT_NEAR(stats::chi2_sf(x, df), 1 - chi2_cdf_oracle(x, df), 1e-9);
        }
    }
    EXPECT_NEAR(stats::chi2_cdf(1.0, 1), std::erf(std::sqrt(0.5)), 1e-14);
}

TEST(Chi2, Quantiles) {
    EXPECT_NEAR(stats::chi2_quantile(0.95, 1), 3.8415, 1e-4);
    EXPECT_NEAR(stats::chi2_quantile(0.5, 1), 0.4549, 1e-3);
    const double med = stats::chi2_quantile(0.5, 60);
    EXPECT_NEAR(chi2_cdf_oracle(med, 60), 0.5, 1e-8);
    EXPECT_NEAR(med, 60 - 2.0 / 3, 0.02);
    EXPECT_THROW((void)stats::chi2_quantile(1.0, 1), DomainError);
}

TEST(Bhat, Centering) {
    const auto null = mod1();
    const auto coeffs = nullmodel::compute_coefficients(null, 4);
    const double x = 1.7;
    Eigen::VectorXd q(4);
    for (int j = 1; j <= 4; ++j) q(j - 1) = null.basis->value(j, x) * std::exp(-x);
    auto shifted = coeffs;
    shifted.alphas = q;
    const std::vector<double> same(25, x);
    EXPECT_LT(compute_bhat(same, null, shifted, 4).cwiseAbs().maxCoeff(), 1e-13);
    const std::vector<double> one{x};
    EXPECT_NEAR(compute_bhat(one, null, coeffs, 1)(0), q(0) - coeffs.alphas(0), 1e-15);
}

TEST(Bhat, OutOfSupportListsIndices) {
    const auto null = mod1();
    const auto coeffs = nullmodel::compute_coefficients(null, 3);
    const std::vector<double> bad{1.0, -0.5, 2.0, -1.0};
    try {
        (void)compute_bhat(bad, null, coeffs, 3);
        FAIL();
    } catch (const DataError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find('1'), std::string::npos);
        EXPECT_NE(what.find('3'), std::string::npos);
    }
    EXPECT_THROW((void)compute_bhat(std::vector<double>{1.0}, null, coeffs, 4), DomainError);
}

TEST(Bhat, CltCenteringUnderNull) {
    const auto null = mod1();
    const auto coeffs = nullmodel::compute_coefficients(null, 1);
    const int reps = 2000;
    double sum = 0, sum2 = 0;
    for (int r = 0; r < reps; ++r) {
        const double b = compute_bhat(draw_h0(null, 500, 1000 + r), null, coeffs, 1)(0);
        sum += b;
        sum2 += b * b;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
    EXPECT_LT(std::abs(mean), 4 * se);
    EXPECT_NEAR(sum2 / reps, coeffs.sigma(0, 0), 0.15 * coeffs.sigma(0, 0));
}

TEST(RunTest, Preconditions) {
    TestConfig config;
    config.calibration = Calibration::AsymptoticChi2_1;
    EXPECT_THROW((void)run_test(std::vector<double>{}, mod1(), config), DataError);
    config.alpha = 1.5;
    EXPECT_THROW((void)run_test(std::vector<double>{1.0, 2.0}, mod1(), config), DomainError);
    TestConfig mc;
    mc.calibration_reps = 50;
    EXPECT_THROW(mc.validate(), DomainError);
    TestConfig fixed;
    fixed.fixed_kmax = 0;
    EXPECT_THROW(fixed.validate(), DomainError);
}

TEST(RunTest, FarTailPointRejects) {
    TestConfig config;
    config.calibration = Calibration::AsymptoticChi2_1;
    const std::vector<double> data(500, 25.0);
    const auto r = run_test(data, mod1(), config);
    EXPECT_TRUE(r.reject);
    EXPECT_GT(r.t_stat, 100.0);
    EXPECT_LT(r.p_value, 1e-10);
}

TEST(RunTest, ResultInvariants) {
    TestConfig config;
    config.calibration_reps = 200;
    const auto null = mod1();
    const auto data = draw_h0(null, 100, 77);
    const auto r = run_test(data, null, config);
    EXPECT_EQ(r.n, 100);
    EXPECT_EQ(r.used_kmax, 10);
    ASSERT_EQ(r.t_sequence.size(), 10u);
    ASSERT_EQ(r.lambdas.size(), 10u);
    EXPECT_GE(r.s_n, 1);
    EXPECT_LE(r.s_n, r.used_kmax);
    EXPECT_EQ(r.t_stat, r.t_sequence[static_cast<std::size_t>(r.s_n - 1)]);
    EXPECT_EQ(r.reject, r.t_stat > r.critical_value);
    for (std::size_t k = 1; k < r.t_sequence.size(); ++k) EXPECT_GE(r.t_sequence[k], r.t_sequence[k - 1]);
    EXPECT_GT(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
}

TEST(RunTest, DeterministicAndCacheTransparent) {
    TestConfig config;
    config.calibration_reps = 200;
    const auto null = mod1();
    const auto data = draw_h0(null, 60, 5);
    const auto a = run_test(data, null, config);
    const auto b = run_test(data, null, config);
    EXPECT_EQ(a, b);
    const auto cached = nullmodel::compute_coefficients(null, 15);
    EXPECT_EQ(run_test(data, null, config, &cached), a);
    const auto small = nullmodel::compute_coefficients(null, 3);
    EXPECT_THROW((void)run_test(data, null, config, &small), DomainError);
}

TEST(RunTest, FixedKmaxAndAlphaMonotone) {
    TestConfig config;
    config.calibration = Calibration::AsymptoticChi2_1;
    config.fixed_kmax = 4;
    const auto null = mod1();
    const auto data = draw_h0(null, 80, 9);
    const auto r = run_test(data, null, config);
    EXPECT_EQ(r.used_kmax, 4);
    EXPECT_NEAR(r.p_value, stats::chi2_sf(r.t_stat, 1), 1e-15);
    config.alpha = 0.5;
    EXPECT_LT(run_test(data, null, config).critical_value, r.critical_value);
}

TEST(PreparedTest, CalibrationSampleAndPvalue) {
    TestConfig config;
    config.calibration_reps = 300;
    const auto null = mod1();
    const auto prepared = PreparedTest::prepare(null, 50, config);
    const auto& cal = prepared.calibration_sample();
    ASSERT_EQ(cal.size(), 300u);
    EXPECT_TRUE(std::is_sorted(cal.begin(), cal.end()));
    EXPECT_EQ(prepared.critical_value(), cal[quantile_index(0.05, 300)]);
    const auto data = draw_h0(null, 50, 3);
    const auto r = prepared.evaluate(data);
    const auto ge = std::count_if(cal.begin(), cal.end(), [&](double c) { return c >= r.t_stat; });
    EXPECT_DOUBLE_EQ(r.p_value, (1.0 + static_cast<double>(ge)) / 301.0);
    EXPECT_THROW((void)prepared.evaluate(draw_h0(null, 49, 3)), DomainError);
    EXPECT_EQ(critical_value(config, null, 50), prepared.critical_value());
}

TEST(ScaleInvariance, DiagonalRescaling) {
    const auto null = mod1();
    const auto coeffs = nullmodel::compute_coefficients(null, 8);
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> unif(0.2, 5.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto data = draw_h0(null, 200, 300 + trial);
        const Eigen::VectorXd b = compute_bhat(data, null, coeffs, 8);
        Eigen::VectorXd d(8);
        for (int i = 0; i < 8; ++i) d(i) = unif(gen);
        const Eigen::VectorXd t0 = t_sequence(b, coeffs.sigma);
        const Eigen::VectorXd t1 = t_sequence(d.cwiseProduct(b), d.asDiagonal() * coeffs.sigma * d.asDiagonal());
        EXPECT_LT((t0 - t1).cwiseAbs().maxCoeff(), 1e-8);
    }
}
