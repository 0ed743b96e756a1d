#include "deconv/linalg.hpp"

#include "deconv/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace deconv::linalg {

void require_symmetric(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
        throw DomainError("covariance matrix must be square and nonempty");
    }
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= kSymmetryTolerance * scale)) {
        std::ostringstream os;
        os << "covariance matrix is not symmetric (max asymmetry " << asym << ")";
        throw DomainError(os.str());
    }
}

Eigen::MatrixXd inv_sqrt_psd(const Eigen::MatrixXd& sigma, double condition_cap, int* retained_rank) {
    require_symmetric(sigma);
    if (!(condition_cap > 1.0)) {
        throw DomainError("condition cap must exceed 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed");
    }
    const Eigen::VectorXd& lambda = solver.eigenvalues();
    const double top = lambda(lambda.size() - 1);
    if (!(top > 0.0)) {
        throw NumericalError("all eigenvalues are below the floor");
    }
    const double floor = top / condition_cap;
    Eigen::VectorXd scale = Eigen::VectorXd::Zero(lambda.size());
    int rank = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > floor) {
            scale(i) = 1.0 / std::sqrt(lambda(i));
            ++rank;
        }
    }
    if (retained_rank != nullptr) {
        *retained_rank = rank;
    }
    const Eigen::MatrixXd& v = solver.eigenvectors();
    Eigen::MatrixXd r = v * scale.asDiagonal() * v.transpose();
    return 0.5 * (r + r.transpose());
}

NestedFactor nested_cholesky(const Eigen::MatrixXd& sigma, double condition_cap) {
    require_symmetric(sigma);
    if (!(condition_cap > 1.0)) {
        throw DomainError("condition cap must exceed 1");
    }
    const Eigen::Index k = sigma.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma, Eigen::EigenvaluesOnly);
    const double top = solver.eigenvalues()(k - 1);
    if (!(top > 0.0)) {
        throw NumericalError("all eigenvalues are below the floor");
    }
    const double floor = top / condition_cap;

    NestedFactor f;
    f.lower = Eigen::MatrixXd::Zero(k, k);
    f.kept.assign(static_cast<std::size_t>(k), false);
    for (Eigen::Index j = 0; j < k; ++j) {
        double d = sigma(j, j);
        for (Eigen::Index l = 0; l < j; ++l) {
            d -= f.lower(j, l) * f.lower(j, l);
        }
        if (!(d > floor)) {
            continue;
        }
        const double root = std::sqrt(d);
        f.lower(j, j) = root;
        f.kept[static_cast<std::size_t>(j)] = true;
        ++f.rank;
        for (Eigen::Index i = j + 1; i < k; ++i) {
            double s = sigma(i, j);
            for (Eigen::Index l = 0; l < j; ++l) {
                s -= f.lower(i, l) * f.lower(j, l);
            }
            f.lower(i, j) = s / root;
        }
    }
    return f;
}

Eigen::VectorXd nested_quadratic_forms(const NestedFactor& factor, const Eigen::VectorXd& b) {
    const Eigen::Index k = factor.lower.rows();
    if (b.size() > k) {
        throw DomainError("vector longer than the factored matrix");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd t(b.size());
    double acc = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        if (factor.kept[static_cast<std::size_t>(j)]) {
            double s = b(j);
            for (Eigen::Index l = 0; l < j; ++l) {
                s -= factor.lower(j, l) * w(l);
            }
            w(j) = s / factor.lower(j, j);
            acc += w(j) * w(j);
        }
        t(j) = acc;
    }
    return t;
}

}  // namespace deconv::linalg
