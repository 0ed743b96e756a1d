#pragma once

#include "deconv/linalg.hpp"
#include "deconv/nullmodel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deconv::teststat {

enum class Calibration { AsymptoticChi2_1, MonteCarlo };

[[nodiscard]] std::string to_string(Calibration calibration);

struct TestConfig {
    double alpha = 0.05;
    /// Empty: k(n) chosen by default_kmax.
    std::optional<int> fixed_kmax;
    Calibration calibration = Calibration::MonteCarlo;
    std::size_t calibration_reps = 2000;
    std::uint64_t seed = 20090302;
    double condition_cap = nullmodel::kDefaultConditionCap;
    nullmodel::CoefficientOptions coefficients;

    /// Throws DomainError on out-of-range fields.
    void validate() const;
};

struct TestResult {
    int n = 0;
    std::vector<double> t_sequence;  ///< T_1..T_kmax
    int s_n = 1;
    double t_stat = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool reject = false;
    std::vector<double> lambdas;     ///< smallest eigenvalue of each nested Sigma_k
    int used_kmax = 0;
    int retained_rank = 0;
    Calibration calibration = Calibration::MonteCarlo;

    friend bool operator==(const TestResult&, const TestResult&) = default;
};

/// b_j = n^{-1/2} sum_i (Q_j(X_i) m(X_i) - alpha_j), j = 1..k.
/// Throws DataError naming the offending indices when data leave the reference support.
[[nodiscard]] Eigen::VectorXd compute_bhat(std::span<const double> data, const nullmodel::NullSpec& null,
                                           const nullmodel::NullCoefficients& coeffs, int k);

/// T_k = B_k' Sigma_k^- B_k for every nested k; nondecreasing in k.
[[nodiscard]] Eigen::VectorXd t_sequence(const Eigen::VectorXd& bhat, const Eigen::MatrixXd& sigma,
                                         double condition_cap = nullmodel::kDefaultConditionCap);

/// Smallest maximizer (1-based) of T_k - k log(n). Values within a relative
/// 1e-12 of the running maximum count as ties.
[[nodiscard]] int select_order(std::span<const double> t_sequence, int n);

/// clamp(ceil(2 ln n), 3, 15).
[[nodiscard]] int default_kmax(int n);

/// default_kmax(n) further capped by the usable order from the eigen diagnostics.
[[nodiscard]] int default_kmax(int n, int usable_k);

/// Index into the sorted calibration sample of the (1 - alpha) quantile.
[[nodiscard]] std::size_t quantile_index(double alpha, std::size_t reps);

/**
 * Everything needed to evaluate the test at one (null, n, config): the
 * coefficients truncated to k(n), the nested factor of Sigma and, in Monte
 * Carlo mode, the sorted calibration sample of T_{S_n}.
 *
 * Immutable after prepare(); evaluate() may be called from many threads.
 */
class PreparedTest {
public:
    /// `cached` must hold at least the order the test needs.
    [[nodiscard]] static PreparedTest prepare(const nullmodel::NullSpec& null, int n, const TestConfig& config,
                                              const nullmodel::NullCoefficients* cached = nullptr);

    [[nodiscard]] TestResult evaluate(std::span<const double> data) const;

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int kmax() const noexcept { return coeffs_.k; }
    [[nodiscard]] double critical_value() const noexcept { return critical_; }
    [[nodiscard]] const nullmodel::NullCoefficients& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] const std::vector<double>& calibration_sample() const noexcept { return calibration_; }
    [[nodiscard]] const TestConfig& config() const noexcept { return config_; }

private:
    PreparedTest(nullmodel::NullSpec null, TestConfig config, int n)
        : null_(std::move(null)), config_(std::move(config)), n_(n) {}

    struct Statistic {
        Eigen::VectorXd t;
        int s_n;
    };
    [[nodiscard]] Statistic statistic(std::span<const double> data) const;

    nullmodel::NullSpec null_;
    TestConfig config_;
    int n_ = 0;
    nullmodel::NullCoefficients coeffs_;
    linalg::NestedFactor factor_;
    std::vector<double> lambdas_;
    std::vector<double> calibration_;
    double critical_ = 0.0;
};

/// Critical value for T_{S_n}: chi2_1 quantile, or the empirical quantile over fresh H0 samples.
[[nodiscard]] double critical_value(const TestConfig& config, const nullmodel::NullSpec& null, int n,
                                    const nullmodel::NullCoefficients* cached = nullptr);

[[nodiscard]] TestResult run_test(std::span<const double> data, const nullmodel::NullSpec& null,
                                  const TestConfig& config, const nullmodel::NullCoefficients* cached = nullptr);

}  // namespace deconv::teststat
