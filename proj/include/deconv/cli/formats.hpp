#pragma once

#include "deconv/cli/config.hpp"
#include "deconv/simlab.hpp"
#include "deconv/teststat.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace deconv::cli {

/// Observations with the 1-based line each came from.
struct DataFile {
    std::vector<double> values;
    std::vector<std::size_t> lines;
};

/// One number per line; blank lines and text after '#' are ignored.
/// Throws DataError naming the first unparsable line.
[[nodiscard]] DataFile read_data_file(const std::string& path);
[[nodiscard]] DataFile parse_data(const std::string& content, const std::string& source);

/// Throws DataError listing the lines whose values leave the basis support.
void check_support(const DataFile& data, const nullmodel::NullSpec& null);

/// Shortest round-trip decimal form, independent of the locale.
[[nodiscard]] std::string format_double(double v);

inline constexpr const char* kCoefficientFormat = "deconvtest-coefficients";
inline constexpr int kCoefficientVersion = 1;

[[nodiscard]] Json coefficients_to_json(const nullmodel::NullCoefficients& coeffs, const NullConfig& null,
                                        double condition_cap);

/// Throws DomainError if the document is malformed or was made for another null.
[[nodiscard]] nullmodel::NullCoefficients coefficients_from_json(const Json& doc, const NullConfig& null);

[[nodiscard]] Json result_to_json(const teststat::TestResult& result);

inline constexpr const char* kSimulationCsvHeader = "scenario,n,reps,reject_rate,ci_low,ci_high,seconds";

/// The seconds column is left empty unless `timing` is set, keeping the file reproducible.
[[nodiscard]] std::string simulation_csv(const std::vector<simlab::SimReport>& reports, bool timing);
[[nodiscard]] Json simulation_json(const std::vector<simlab::SimReport>& reports, const Json& config_echo,
                                   bool timing);

/// Writes to the file, or to standard output when path is "-" or empty.
void write_output(const std::string& path, const std::string& content);

}  // namespace deconv::cli
