#pragma once

#include "deconv/nullmodel.hpp"
#include "deconv/teststat.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace deconv::simlab {

/// Draws one observation X.
struct DataLaw {
    std::string description;
    std::function<double(measures::RngStream&)> draw;
};

[[nodiscard]] DataLaw convolution_law(const measures::DistributionSpec& y, const measures::DistributionSpec& z);
[[nodiscard]] DataLaw direct_law(const measures::DistributionSpec& x);
/// X drawn from the null itself (including any joint law).
[[nodiscard]] DataLaw null_law(const nullmodel::NullSpec& null);

struct ScenarioSpec {
    std::string name;
    DataLaw data;
    nullmodel::NullSpec null;
    bool truth_is_null = false;
};

/// Mod1, Alt1..Alt3, Mod2, Alt4..Alt6: each model followed by its alternatives.
[[nodiscard]] const std::vector<std::string>& standard_scenarios();

/// Throws DomainError for names other than the standard ones.
[[nodiscard]] ScenarioSpec build_scenario(const std::string& name);

[[nodiscard]] ScenarioSpec custom_scenario(std::string name, nullmodel::NullSpec null, DataLaw data,
                                           bool truth_is_null);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval at 95%.
[[nodiscard]] Interval wilson_interval(std::size_t successes, std::size_t trials);

struct SimReport {
    std::string scenario;
    int n = 0;
    std::size_t reps = 0;
    std::size_t rejections = 0;
    /// Replications whose data fell outside the reference support.
    std::size_t errors = 0;
    double rejection_rate = 0.0;
    Interval wilson95;
    double critical_value = 0.0;
    int kmax = 0;
    /// order_counts[k-1] = number of replications with S_n = k.
    std::vector<std::size_t> order_counts;
    /// Replications with T_{S_n} above the chi2_1 quantile at the configured alpha.
    std::size_t chi2_exceedances = 0;
    double seconds = 0.0;
};

/// Caches coefficients per null and prepared tests per (null, n) across runs.
class Simulator {
public:
    explicit Simulator(teststat::TestConfig config) : config_(std::move(config)) {}

    [[nodiscard]] SimReport run_replications(const ScenarioSpec& scenario, int n, std::size_t reps,
                                             std::uint64_t master_seed);

    [[nodiscard]] const teststat::TestConfig& config() const noexcept { return config_; }

    /// Coefficients at the basis degree cap, computed once per null.
    [[nodiscard]] const nullmodel::NullCoefficients& coefficients(const nullmodel::NullSpec& null);

    [[nodiscard]] const teststat::PreparedTest& prepared(const nullmodel::NullSpec& null, int n);

private:
    teststat::TestConfig config_;
    std::map<std::string, nullmodel::NullCoefficients> coefficients_;
    std::map<std::pair<std::string, int>, std::unique_ptr<teststat::PreparedTest>> prepared_;
};

/// Stable identifier of a null; equal keys mean equal coefficients.
[[nodiscard]] std::string null_key(const nullmodel::NullSpec& null);

[[nodiscard]] SimReport run_replications(const ScenarioSpec& scenario, int n, std::size_t reps,
                                         const teststat::TestConfig& config, std::uint64_t master_seed);

/// One report per (scenario, n), scenario-major.
[[nodiscard]] std::vector<SimReport> level_power_table(const std::vector<ScenarioSpec>& scenarios,
                                                       const std::vector<int>& n_grid, std::size_t reps,
                                                       const teststat::TestConfig& config,
                                                       std::uint64_t master_seed);

}  // namespace deconv::simlab
