#include "deconv/error.hpp"
#include "deconv/simlab.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace deconv;
using namespace deconv::simlab;
using measures::DistributionSpec;

namespace {

teststat::TestConfig asymptotic() {
    teststat::TestConfig c;
    c.calibration = teststat::Calibration::AsymptoticChi2_1;
    return c;
}

}  // namespace

TEST(Scenarios, Catalogue) {
    const std::vector<std::string> expected{"Mod1", "Alt1", "Alt2", "Alt3", "Mod2", "Alt4", "Alt5", "Alt6"};
    EXPECT_EQ(standard_scenarios(), expected);
    for (const auto& name : expected) {
        const auto s = build_scenario(name);
        EXPECT_EQ(s.name, name);
        EXPECT_EQ(s.truth_is_null, name.rfind("Mod", 0) == 0) << name;
    }
    EXPECT_THROW((void)build_scenario("Alt7"), DomainError);
    EXPECT_EQ(null_key(build_scenario("Alt2").null), null_key(build_scenario("Mod1").null));
    EXPECT_EQ(null_key(build_scenario("Alt6").null), null_key(build_scenario("Mod2").null));
}

TEST(Scenarios, Alt1MeanMatchesMod1) {
    const auto s = build_scenario("Alt1");
    measures::RngStream rng(4, 0, measures::StreamDomain::Data);
    const int n = 400000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s.data.draw(rng);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - 2.0), 4 * se);
    // Mixture of Exp(mean 2) and ChiSq(2): both have variance 4.
    EXPECT_NEAR(sum2 / n - mean * mean, 4.0, 0.1);
}

TEST(Scenarios, Alt5IsPoissonTwo) {
    const auto s = build_scenario("Alt5");
    measures::RngStream rng(5, 0, measures::StreamDomain::Data);
    const int n = 400000;
    std::vector<int> counts(8, 0);
    for (int i = 0; i < n; ++i) {
        const double x = s.data.draw(rng);
        ASSERT_EQ(x, std::floor(x));
        if (x < 8) ++counts[static_cast<int>(x)];
    }
    double pmf = std::exp(-2.0);
    for (int k = 0; k < 8; ++k) {
        const double se = std::sqrt(pmf * (1 - pmf) / n);
        EXPECT_LT(std::abs(counts[k] / double(n) - pmf), 4 * se) << k;
        pmf *= 2.0 / (k + 1);
    }
}

TEST(Scenarios, Alt4IsIntegerMixture) {
    const auto s = build_scenario("Alt4");
    measures::RngStream rng(6, 0, measures::StreamDomain::Data);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = s.data.draw(rng);
        ASSERT_GE(x, 0.0);
        ASSERT_EQ(x, std::floor(x));
        sum += x;
    }
    EXPECT_NEAR(sum / n, 2.0, 0.03);
}

TEST(Wilson, AgainstFormula) {
    const double z = 1.959963984540054;
    for (auto [k, n] : {std::pair{0, 10}, {5, 10}, {3, 200}, {100, 2000}, {2000, 2000}}) {
        const double p = double(k) / n;
        const double centre = (p + z * z / (2 * n)) / (1 + z * z / n);
        const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n)) / (1 + z * z / n);
        const auto w = wilson_interval(k, n);
        EXPECT_NEAR(w.low, std::max(0.0, centre - half), 1e-14);
        EXPECT_NEAR(w.high, std::min(1.0, centre + half), 1e-14);
        EXPECT_LE(w.low, p);
        EXPECT_GE(w.high, p);
    }
    EXPECT_EQ(wilson_interval(0, 10).low, 0.0);
}

TEST(Replications, SingleRep) {
    const auto r = run_replications(build_scenario("Mod1"), 50, 1, asymptotic(), 1);
    EXPECT_EQ(r.reps, 1u);
    EXPECT_TRUE(r.rejection_rate == 0.0 || r.rejection_rate == 1.0);
}

TEST(Replications, CountsAndDeterminism) {
    const auto scenario = build_scenario("Alt2");
    const auto a = run_replications(scenario, 100, 300, asymptotic(), 42);
    const auto b = run_replications(scenario, 100, 300, asymptotic(), 42);
    EXPECT_EQ(a.rejections, b.rejections);
    EXPECT_EQ(a.order_counts, b.order_counts);
    EXPECT_EQ(a.rejection_rate, double(a.rejections) / 300.0);
    EXPECT_EQ(a.errors, 0u);
    EXPECT_EQ(a.kmax, 10);
    std::size_t total = 0;
    for (auto c : a.order_counts) total += c;
    EXPECT_EQ(total, 300u);
    EXPECT_LE(a.wilson95.low, a.rejection_rate);
    EXPECT_GE(a.wilson95.high, a.rejection_rate);
    // In asymptotic mode the chi2 exceedances are the rejections.
    EXPECT_EQ(a.chi2_exceedances, a.rejections);
    const auto c = run_replications(scenario, 100, 300, asymptotic(), 43);
    EXPECT_NE(a.order_counts, c.order_counts);
}

TEST(Replications, OutOfSupportCountsAsError) {
    const auto mod1 = build_scenario("Mod1");
    const auto s = custom_scenario("neg", mod1.null, direct_law(DistributionSpec::uniform(-1.0, 0.0)), false);
    const auto r = run_replications(s, 30, 20, asymptotic(), 1);
    EXPECT_EQ(r.errors, 20u);
    EXPECT_EQ(r.rejections, 0u);
}

TEST(Replications, SimulatorReusesPreparedTests) {
    auto config = asymptotic();
    Simulator sim(config);
    const auto mod1 = build_scenario("Mod1");
    const auto& p1 = sim.prepared(mod1.null, 50);
    const auto& p2 = sim.prepared(build_scenario("Alt1").null, 50);
    EXPECT_EQ(&p1, &p2);
    EXPECT_EQ(null_key(mod1.null), null_key(build_scenario("Alt3").null));
    EXPECT_NE(null_key(mod1.null), null_key(build_scenario("Mod2").null));
    const auto r1 = sim.run_replications(mod1, 50, 100, 9);
    const auto r2 = run_replications(mod1, 50, 100, config, 9);
    EXPECT_EQ(r1.rejections, r2.rejections);
    EXPECT_EQ(r1.order_counts, r2.order_counts);
}

TEST(LevelPowerTable, Shape) {
    EXPECT_TRUE(level_power_table({}, {50, 100}, 10, asymptotic(), 1).empty());
    EXPECT_TRUE(level_power_table({build_scenario("Mod1")}, {}, 10, asymptotic(), 1).empty());
    const auto t = level_power_table({build_scenario("Mod1"), build_scenario("Alt2")}, {50, 100}, 20, asymptotic(), 1);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0].scenario, "Mod1");
    EXPECT_EQ(t[1].scenario, "Mod1");
    EXPECT_EQ(t[1].n, 100);
    EXPECT_EQ(t[2].scenario, "Alt2");
    EXPECT_EQ(t[2].n, 50);
}
