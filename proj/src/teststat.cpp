#include "deconv/teststat.hpp"

#include "deconv/chi2.hpp"
#include "deconv/error.hpp"
#include "deconv/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace deconv::teststat {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr std::size_t kMinCalibrationReps = 100;

void check_data(std::span<const double> data, const orthopoly::BasisTable& basis) {
    if (data.empty()) {
        throw DataError("data sample is empty");
    }
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!basis.in_support(data[i])) {
            bad.push_back(i);
        }
    }
    if (bad.empty()) {
        return;
    }
    std::ostringstream os;
    os << bad.size() << " observation(s) outside the support of the reference measure, indices";
    const std::size_t shown = std::min<std::size_t>(bad.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        os << (i == 0 ? " " : ", ") << bad[i];
    }
    if (shown < bad.size()) {
        os << ", ...";
    }
    throw DataError(os.str());
}

// Assumes the data were checked.
Eigen::VectorXd bhat_unchecked(std::span<const double> data, const nullmodel::NullSpec& null,
                               const Eigen::VectorXd& alphas, int k) {
    std::vector<double> vals(static_cast<std::size_t>(k) + 1);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
    for (const double x : data) {
        null.basis->values(x, vals);
        const double m = measures::density_m(null.ref, x);
        for (int j = 0; j < k; ++j) {
            sum(j) += vals[static_cast<std::size_t>(j) + 1] * m - alphas(j);
        }
    }
    return sum / std::sqrt(static_cast<double>(data.size()));
}

}  // namespace

std::string to_string(Calibration calibration) {
    return calibration == Calibration::MonteCarlo ? "mc" : "asymptotic";
}

void TestConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
    if (fixed_kmax && *fixed_kmax < 1) {
        throw DomainError("kmax must be at least 1");
    }
    if (calibration == Calibration::MonteCarlo && calibration_reps < kMinCalibrationReps) {
        throw DomainError("Monte Carlo calibration needs at least 100 replications");
    }
    if (!(condition_cap > 1.0)) {
        throw DomainError("condition cap must exceed 1");
    }
}

Eigen::VectorXd compute_bhat(std::span<const double> data, const nullmodel::NullSpec& null,
                             const nullmodel::NullCoefficients& coeffs, int k) {
    if (k < 1 || k > coeffs.k) {
        throw DomainError("k must lie in [1, coeffs.k]");
    }
    check_data(data, *null.basis);
    return bhat_unchecked(data, null, coeffs.alphas, k);
}

Eigen::VectorXd t_sequence(const Eigen::VectorXd& bhat, const Eigen::MatrixXd& sigma, double condition_cap) {
    if (sigma.rows() != bhat.size() || sigma.cols() != bhat.size()) {
        throw DomainError("bhat and sigma dimensions disagree");
    }
    return linalg::nested_quadratic_forms(linalg::nested_cholesky(sigma, condition_cap), bhat);
}

int select_order(std::span<const double> t_sequence, int n) {
    if (t_sequence.empty()) {
        throw DomainError("empty statistic sequence");
    }
    if (n < 2) {
        throw DomainError("order selection needs n >= 2");
    }
    const double penalty = std::log(static_cast<double>(n));
    int best = 1;
    double best_value = t_sequence[0] - penalty;
    for (std::size_t k = 1; k < t_sequence.size(); ++k) {
        const double v = t_sequence[k] - static_cast<double>(k + 1) * penalty;
        if (v > best_value + kTieTolerance * std::max(1.0, std::abs(best_value))) {
            best = static_cast<int>(k + 1);
            best_value = v;
        }
    }
    return best;
}

int default_kmax(int n) {
    if (n < 2) {
        throw DomainError("k(n) needs n >= 2");
    }
    const int k = static_cast<int>(std::ceil(2.0 * std::log(static_cast<double>(n))));
    return std::clamp(k, 3, 15);
}

int default_kmax(int n, int usable_k) {
    const int k = default_kmax(n);
    return usable_k >= 1 ? std::min(k, usable_k) : k;
}

std::size_t quantile_index(double alpha, std::size_t reps) {
    const double pos = std::ceil((1.0 - alpha) * static_cast<double>(reps) - 1e-9);
    const auto idx = static_cast<std::size_t>(std::max(pos, 1.0)) - 1;
    return std::min(idx, reps - 1);
}

PreparedTest PreparedTest::prepare(const nullmodel::NullSpec& null, int n, const TestConfig& config,
                                   const nullmodel::NullCoefficients* cached) {
    config.validate();
    if (n < 2) {
        throw DomainError("the test needs at least two observations");
    }
    PreparedTest p(null, config, n);

    const int wanted = config.fixed_kmax ? *config.fixed_kmax : std::min(default_kmax(n), null.basis->max_degree());
    nullmodel::NullCoefficients full;
    if (cached != nullptr) {
        if (cached->k < wanted) {
            std::ostringstream os;
            os << "cached coefficients hold k = " << cached->k << " but the test needs k = " << wanted;
            throw DomainError(os.str());
        }
        full = cached->k == wanted ? *cached : cached->leading(wanted);
    } else {
        full = nullmodel::compute_coefficients(null, wanted, config.coefficients);
    }
    const auto diag = nullmodel::eigen_floor_diagnostics(full.sigma, config.condition_cap);
    int kmax = wanted;
    if (!config.fixed_kmax) {
        if (diag.usable_k < 1) {
            throw NumericalError("Sigma_1 is singular; no usable order");
        }
        kmax = default_kmax(n, diag.usable_k);
        kmax = std::min(kmax, wanted);
    }
    p.coeffs_ = kmax == full.k ? full : full.leading(kmax);
    p.lambdas_.assign(diag.lambda_min.begin(), diag.lambda_min.begin() + kmax);
    p.factor_ = linalg::nested_cholesky(p.coeffs_.sigma, config.condition_cap);

    if (config.calibration == Calibration::AsymptoticChi2_1) {
        p.critical_ = stats::chi2_quantile(1.0 - config.alpha, 1.0);
        return p;
    }
    p.calibration_.assign(config.calibration_reps, 0.0);
    parallel_for(config.calibration_reps, [&p, &config, n](std::size_t r) {
        measures::RngStream rng(config.seed, r, measures::StreamDomain::Calibration);
        const auto sample = nullmodel::sample_x(p.null_, rng, static_cast<std::size_t>(n));
        const Statistic s = p.statistic(sample);
        p.calibration_[r] = s.t(s.s_n - 1);
    });
    std::sort(p.calibration_.begin(), p.calibration_.end());
    p.critical_ = p.calibration_[quantile_index(config.alpha, config.calibration_reps)];
    return p;
}

PreparedTest::Statistic PreparedTest::statistic(std::span<const double> data) const {
    check_data(data, *null_.basis);
    const Eigen::VectorXd b = bhat_unchecked(data, null_, coeffs_.alphas, coeffs_.k);
    Statistic s;
    s.t = linalg::nested_quadratic_forms(factor_, b);
    s.s_n = select_order(std::span<const double>(s.t.data(), static_cast<std::size_t>(s.t.size())),
                         static_cast<int>(data.size()));
    return s;
}

TestResult PreparedTest::evaluate(std::span<const double> data) const {
    if (static_cast<int>(data.size()) != n_) {
        std::ostringstream os;
        os << "prepared for n = " << n_ << " but got " << data.size() << " observations";
        throw DomainError(os.str());
    }
    const Statistic s = statistic(data);
    TestResult r;
    r.n = n_;
    r.t_sequence.assign(s.t.data(), s.t.data() + s.t.size());
    r.s_n = s.s_n;
    r.t_stat = s.t(s.s_n - 1);
    r.critical_value = critical_;
    r.reject = r.t_stat > critical_;
    r.lambdas = lambdas_;
    r.used_kmax = coeffs_.k;
    r.retained_rank = factor_.rank;
    r.calibration = config_.calibration;
    if (config_.calibration == Calibration::MonteCarlo) {
        const auto at_least = static_cast<double>(
            calibration_.end() - std::lower_bound(calibration_.begin(), calibration_.end(), r.t_stat));
        r.p_value = (1.0 + at_least) / (static_cast<double>(calibration_.size()) + 1.0);
    } else {
        r.p_value = stats::chi2_sf(r.t_stat, 1.0);
    }
    return r;
}

double critical_value(const TestConfig& config, const nullmodel::NullSpec& null, int n,
                      const nullmodel::NullCoefficients* cached) {
    if (config.calibration == Calibration::AsymptoticChi2_1) {
        config.validate();
        return stats::chi2_quantile(1.0 - config.alpha, 1.0);
    }
    return PreparedTest::prepare(null, n, config, cached).critical_value();
}

TestResult run_test(std::span<const double> data, const nullmodel::NullSpec& null, const TestConfig& config,
                    const nullmodel::NullCoefficients* cached) {
    if (data.empty()) {
        throw DataError("data sample is empty");
    }
    if (data.size() < 2) {
        throw DataError("the test needs at least two observations");
    }
    return PreparedTest::prepare(null, static_cast<int>(data.size()), config, cached).evaluate(data);
}

}  // namespace deconv::teststat
