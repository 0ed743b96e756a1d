#include "deconv/quadrature.hpp"

#include "deconv/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <vector>

namespace deconv::measures {

namespace {

// Golub-Welsch nodes (eigenvalues of the symmetric Jacobi matrix). Weights come
// from the Christoffel function 1 / sum_k q_k(x)^2 of the orthonormal
// recurrence, which keeps the tiny outer weights accurate in relative terms.
GaussRule golub_welsch(const Eigen::VectorXd& diagonal, const Eigen::VectorXd& offdiagonal, double mass) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diagonal, offdiagonal, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("Golub-Welsch eigen decomposition failed");
    }
    const auto n = diagonal.size();
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = solver.eigenvalues()(i);
        double prev = 0.0;
        double cur = 1.0 / std::sqrt(mass);
        double sum = cur * cur;
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            const double before = k > 0 ? offdiagonal(k - 1) : 0.0;
            const double next = ((x - diagonal(k)) * cur - before * prev) / offdiagonal(k);
            prev = cur;
            cur = next;
            sum += cur * cur;
        }
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 1.0 / sum;
    }
    return rule;
}

const GaussRule& panel_rule() {
    static const GaussRule rule = gauss_legendre(15);
    return rule;
}

Eigen::VectorXd panel(const VectorIntegrand& f, double a, double b, Eigen::Index dim) {
    const auto& rule = panel_rule();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

}  // namespace

GaussRule gauss_legendre(int points) {
    if (points < 1) {
        throw DomainError("Gauss-Legendre rule needs at least one point");
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(points);
    Eigen::VectorXd off(points > 1 ? points - 1 : 0);
    for (int i = 1; i < points; ++i) {
        off(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
    }
    return golub_welsch(diag, off, 2.0);
}

GaussRule gauss_legendre_unit(int points) {
    GaussRule rule = gauss_legendre(points);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        rule.nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
        rule.weights[i] *= 0.5;
    }
    return rule;
}

GaussRule gauss_laguerre(int points, double alpha) {
    if (points < 1 || !(alpha > 0.0)) {
        throw DomainError("Gauss-Laguerre rule needs points >= 1 and alpha > 0");
    }
    // Monic recurrence for the weight x^{alpha-1} e^{-x}.
    const double a = alpha - 1.0;
    Eigen::VectorXd diag(points);
    Eigen::VectorXd off(points > 1 ? points - 1 : 0);
    for (int i = 0; i < points; ++i) {
        diag(i) = 2.0 * i + a + 1.0;
        if (i > 0) {
            off(i - 1) = std::sqrt(i * (i + a));
        }
    }
    return golub_welsch(diag, off, 1.0);
}

Eigen::VectorXd integrate_adaptive(const VectorIntegrand& f, double a, double b, Eigen::Index dim,
                                   const AdaptiveOptions& options) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
    if (!(b > a)) {
        return total;
    }
    struct Pending {
        double lo;
        double hi;
        Eigen::VectorXd whole;
        int depth;
    };
    const double length = b - a;
    std::vector<Pending> stack;
    const int panels = std::max(1, options.initial_panels);
    for (int i = panels - 1; i >= 0; --i) {
        const double lo = a + length * i / panels;
        const double hi = (i + 1 == panels) ? b : a + length * (i + 1) / panels;
        stack.push_back({lo, hi, panel(f, lo, hi, dim), 0});
    }
    int processed = 0;
    while (!stack.empty()) {
        Pending cur = std::move(stack.back());
        stack.pop_back();
        const double mid = 0.5 * (cur.lo + cur.hi);
        Eigen::VectorXd left = panel(f, cur.lo, mid, dim);
        Eigen::VectorXd right = panel(f, mid, cur.hi, dim);
        const double err = (left + right - cur.whole).cwiseAbs().maxCoeff();
        const double budget = options.tolerance * (cur.hi - cur.lo) / length;
        if (!std::isfinite(err)) {
            throw QuadratureError("adaptive quadrature: non-finite integrand", err);
        }
        if (err <= budget) {
            total += left + right;
            continue;
        }
        if (cur.depth >= options.max_depth || ++processed > options.max_panels) {
            std::ostringstream os;
            os << "adaptive quadrature did not converge on [" << cur.lo << ", " << cur.hi << "]: error estimate "
               << err << " > budget " << budget;
            throw QuadratureError(os.str(), err);
        }
        stack.push_back({mid, cur.hi, std::move(right), cur.depth + 1});
        stack.push_back({cur.lo, mid, std::move(left), cur.depth + 1});
    }
    return total;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& options) {
    const VectorIntegrand wrapped = [&f](double x) {
        Eigen::VectorXd v(1);
        v(0) = f(x);
        return v;
    };
    return integrate_adaptive(wrapped, a, b, 1, options)(0);
}

}  // namespace deconv::measures
