#include "deconv/simlab.hpp"

#include "deconv/chi2.hpp"
#include "deconv/error.hpp"
#include "deconv/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace deconv::simlab {

using measures::DistributionSpec;
using measures::ReferenceMeasureSpec;

namespace {

constexpr double kZ95 = 1.959963984540054;

nullmodel::NullSpec mod1_null() {
    return nullmodel::make_null(DistributionSpec::exponential(1.0), DistributionSpec::chi_squared(1.0),
                                ReferenceMeasureSpec::exponential1());
}

nullmodel::NullSpec mod2_null() {
    return nullmodel::make_null(DistributionSpec::poisson(1.0), DistributionSpec::geometric(1.0),
                                ReferenceMeasureSpec::geometric(0.5));
}

}  // namespace

DataLaw convolution_law(const DistributionSpec& y, const DistributionSpec& z) {
    return {y.describe() + " + " + z.describe(), [y, z](measures::RngStream& rng) {
                const double a = measures::sample_one(y, rng);
                const double b = measures::sample_one(z, rng);
                return a + b;
            }};
}

DataLaw direct_law(const DistributionSpec& x) {
    return {x.describe(), [x](measures::RngStream& rng) { return measures::sample_one(x, rng); }};
}

DataLaw null_law(const nullmodel::NullSpec& null) {
    return {"null: " + null_key(null), [null](measures::RngStream& rng) { return nullmodel::sample_x(null, rng); }};
}

const std::vector<std::string>& standard_scenarios() {
    static const std::vector<std::string> names{"Mod1", "Alt1", "Alt2", "Alt3", "Mod2", "Alt4", "Alt5", "Alt6"};
    return names;
}

ScenarioSpec build_scenario(const std::string& name) {
    if (name == "Mod1") {
        auto null = mod1_null();
        return {name, null_law(null), null, true};
    }
    if (name == "Alt1") {
        return {name,
                direct_law(DistributionSpec::mixture(0.5, DistributionSpec::exponential(2.0),
                                                     DistributionSpec::chi_squared(2.0))),
                mod1_null(), false};
    }
    if (name == "Alt2") {
        return {name, convolution_law(DistributionSpec::exponential(1.0), DistributionSpec::exponential(1.0)),
                mod1_null(), false};
    }
    if (name == "Alt3") {
        return {name, convolution_law(DistributionSpec::chi_squared(1.0), DistributionSpec::chi_squared(1.0)),
                mod1_null(), false};
    }
    if (name == "Mod2") {
        auto null = mod2_null();
        return {name, null_law(null), null, true};
    }
    if (name == "Alt4") {
        return {name,
                direct_law(DistributionSpec::mixture(0.5, DistributionSpec::poisson(2.0),
                                                     DistributionSpec::geometric(2.0))),
                mod2_null(), false};
    }
    if (name == "Alt5") {
        return {name, convolution_law(DistributionSpec::poisson(1.0), DistributionSpec::poisson(1.0)), mod2_null(),
                false};
    }
    if (name == "Alt6") {
        return {name, convolution_law(DistributionSpec::geometric(1.0), DistributionSpec::geometric(1.0)),
                mod2_null(), false};
    }
    throw DomainError("unknown scenario '" + name + "' (expected Mod1, Mod2 or Alt1..Alt6)");
}

ScenarioSpec custom_scenario(std::string name, nullmodel::NullSpec null, DataLaw data, bool truth_is_null) {
    if (name.empty()) {
        throw DomainError("custom scenario needs a name");
    }
    return {std::move(name), std::move(data), std::move(null), truth_is_null};
}

Interval wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) {
        throw DomainError("Wilson interval needs at least one trial");
    }
    if (successes > trials) {
        throw DomainError("more successes than trials");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    // Rounding can leave the endpoints a few ulps inside p at 0 and 1.
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

std::string null_key(const nullmodel::NullSpec& null) {
    std::ostringstream os;
    os.precision(17);
    os << null.y_law.describe() << "|" << null.z_law.describe() << "|";
    if (const auto* joint = std::get_if<nullmodel::JointLaw>(&null.dependence)) {
        os << joint->name;
    } else {
        os << "independent";
    }
    os << "|" << measures::to_string(null.ref) << "|" << null.basis->max_degree();
    return os.str();
}

const nullmodel::NullCoefficients& Simulator::coefficients(const nullmodel::NullSpec& null) {
    const std::string key = null_key(null);
    auto it = coefficients_.find(key);
    if (it == coefficients_.end()) {
        int k = null.basis->max_degree();
        if (config_.fixed_kmax) {
            k = *config_.fixed_kmax;
        }
        it = coefficients_.emplace(key, nullmodel::compute_coefficients(null, k, config_.coefficients)).first;
    }
    return it->second;
}

const teststat::PreparedTest& Simulator::prepared(const nullmodel::NullSpec& null, int n) {
    auto key = std::pair{null_key(null), n};
    auto it = prepared_.find(key);
    if (it == prepared_.end()) {
        const auto& coeffs = coefficients(null);
        auto p = std::make_unique<teststat::PreparedTest>(teststat::PreparedTest::prepare(null, n, config_, &coeffs));
        it = prepared_.emplace(std::move(key), std::move(p)).first;
    }
    return *it->second;
}

SimReport Simulator::run_replications(const ScenarioSpec& scenario, int n, std::size_t reps,
                                      std::uint64_t master_seed) {
    if (reps < 1) {
        throw DomainError("reps must be at least 1");
    }
    const auto start = std::chrono::steady_clock::now();
    const teststat::PreparedTest& test = prepared(scenario.null, n);
    const double chi2_cut = stats::chi2_quantile(1.0 - config_.alpha, 1.0);

    struct Outcome {
        bool ok = false;
        bool reject = false;
        bool exceeds = false;
        int s_n = 0;
    };
    std::vector<Outcome> outcomes(reps);
    parallel_for(reps, [&](std::size_t r) {
        measures::RngStream rng(master_seed, r, measures::StreamDomain::Data);
        std::vector<double> data(static_cast<std::size_t>(n));
        for (auto& x : data) {
            x = scenario.data.draw(rng);
        }
        try {
            const auto result = test.evaluate(data);
            outcomes[r] = {true, result.reject, result.t_stat > chi2_cut, result.s_n};
        } catch (const DataError&) {
            outcomes[r] = {};
        }
    });

    SimReport rep;
    rep.scenario = scenario.name;
    rep.n = n;
    rep.reps = reps;
    rep.critical_value = test.critical_value();
    rep.kmax = test.kmax();
    rep.order_counts.assign(static_cast<std::size_t>(test.kmax()), 0);
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++rep.errors;
            continue;
        }
        rep.rejections += o.reject ? 1 : 0;
        rep.chi2_exceedances += o.exceeds ? 1 : 0;
        ++rep.order_counts[static_cast<std::size_t>(o.s_n) - 1];
    }
    rep.rejection_rate = static_cast<double>(rep.rejections) / static_cast<double>(reps);
    rep.wilson95 = wilson_interval(rep.rejections, reps);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

SimReport run_replications(const ScenarioSpec& scenario, int n, std::size_t reps, const teststat::TestConfig& config,
                           std::uint64_t master_seed) {
    Simulator sim(config);
    return sim.run_replications(scenario, n, reps, master_seed);
}

std::vector<SimReport> level_power_table(const std::vector<ScenarioSpec>& scenarios, const std::vector<int>& n_grid,
                                         std::size_t reps, const teststat::TestConfig& config,
                                         std::uint64_t master_seed) {
    Simulator sim(config);
    std::vector<SimReport> out;
    out.reserve(scenarios.size() * n_grid.size());
    for (const auto& s : scenarios) {
        for (const int n : n_grid) {
            out.push_back(sim.run_replications(s, n, reps, master_seed));
        }
    }
    return out;
}

}  // namespace deconv::simlab
