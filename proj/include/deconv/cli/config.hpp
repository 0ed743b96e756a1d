#pragma once

#include "deconv/nullmodel.hpp"
#include "deconv/teststat.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace deconv::cli {

using Json = nlohmann::json;

[[nodiscard]] measures::DistributionSpec distribution_from_json(const Json& j, const std::string& where);
[[nodiscard]] Json distribution_to_json(const measures::DistributionSpec& dist);

struct NullConfig {
    std::optional<std::string> preset;
    measures::DistributionSpec y = measures::DistributionSpec::exponential(1.0);
    measures::DistributionSpec z = measures::DistributionSpec::chi_squared(1.0);
    double coupling = 0.0;  ///< 0: independent
    bool coupled = false;
    measures::ReferenceMeasureSpec reference = measures::ReferenceMeasureSpec::exponential1();
    int max_degree = nullmodel::kDefaultMaxDegree;
    nullmodel::CoefficientOptions options;
};

struct CustomScenarioConfig {
    std::string name;
    /// Empty: data drawn from the null.
    std::optional<measures::DistributionSpec> x;
    std::optional<measures::DistributionSpec> y;
    std::optional<measures::DistributionSpec> z;
    bool truth_is_null = false;
};

struct SimConfig {
    std::vector<std::string> scenarios;
    std::vector<int> n{50, 100, 500};
    std::size_t reps = 2000;
    std::uint64_t seed = 20090303;
    std::vector<CustomScenarioConfig> custom;
};

struct RunConfig {
    NullConfig null;
    teststat::TestConfig test;
    SimConfig sim;
};

/// Unknown keys anywhere throw DomainError.
[[nodiscard]] RunConfig parse_config(const Json& doc);

/// Reads and parses a JSON file; an empty path yields the defaults.
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Fully resolved configuration, defaults included.
[[nodiscard]] Json config_to_json(const RunConfig& config);
[[nodiscard]] Json null_to_json(const NullConfig& null);

[[nodiscard]] nullmodel::NullSpec build_null(const NullConfig& null);

/// FNV-1a 64 of the canonical null document, as 16 hex digits.
[[nodiscard]] std::string null_hash(const NullConfig& null);

}  // namespace deconv::cli
