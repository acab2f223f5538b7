#include "sflr/bspline.hpp"

#include <cmath>
#include <stdexcept>

namespace sflr {

BSplineBasis::BSplineBasis(std::vector<double> knots, int order)
    : knots_(std::move(knots)), order_(order) {
    if (order_ < 1) throw std::invalid_argument("spline order must be >= 1");
    if (static_cast<int>(knots_.size()) <= order_)
        throw std::invalid_argument("knot vector too short for the requested order");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (knots_[i] < knots_[i - 1])
            throw std::invalid_argument("knot vector must be non-decreasing");
    }
    if (domain_min() >= domain_max())
        throw std::invalid_argument("knot vector spans an empty domain");
}

std::vector<double> BSplineBasis::breakpoints() const {
    std::vector<double> pts;
    for (double k : knots_) {
        if (pts.empty() || k > pts.back()) pts.push_back(k);
    }
    return pts;
}

Eigen::RowVectorXd BSplineBasis::row(double t, int deriv) const {
    if (deriv < 0) throw std::invalid_argument("derivative order must be >= 0");
    if (t < domain_min() || t > domain_max())
        throw std::invalid_argument("evaluation point outside the knot span");

    const int nk = static_cast<int>(knots_.size());
    const double tmax = domain_max();

    // Order-1 indicators; the right domain endpoint is assigned to the last
    // non-empty interval so the basis is right-continuous at tmax.
    Eigen::RowVectorXd vals = Eigen::RowVectorXd::Zero(nk - 1);
    for (int i = 0; i < nk - 1; ++i) {
        const bool inside = knots_[i] <= t && t < knots_[i + 1];
        const bool at_end = t == tmax && knots_[i] < tmax && knots_[i + 1] == tmax;
        if (inside || at_end) vals[i] = 1.0;
    }

    // Raise the order by the value recursion until `order_ - deriv`, then by
    // the derivative recursion; both share the same knot-difference shape.
    const int value_order = order_ - deriv;
    if (value_order < 1) return Eigen::RowVectorXd::Zero(size());

    for (int k = 2; k <= order_; ++k) {
        const int nb = nk - k;
        Eigen::RowVectorXd next(nb);
        const bool derivative_step = k > value_order;
        for (int i = 0; i < nb; ++i) {
            const double den0 = knots_[i + k - 1] - knots_[i];
            const double den1 = knots_[i + k] - knots_[i + 1];
            double left = 0.0, right = 0.0;
            if (derivative_step) {
                if (den0 > 0.0) left = vals[i] / den0;
                if (den1 > 0.0) right = vals[i + 1] / den1;
                next[i] = (k - 1) * (left - right);
            } else {
                if (den0 > 0.0) left = (t - knots_[i]) / den0 * vals[i];
                if (den1 > 0.0) right = (knots_[i + k] - t) / den1 * vals[i + 1];
                next[i] = left + right;
            }
        }
        vals.swap(next);
    }
    return vals;
}

std::vector<double> clamped_uniform_knots(double a, double b, int dim, int order) {
    if (dim < order) throw std::invalid_argument("basis dimension must be >= order");
    const int interior = dim - order;
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(dim + order));
    for (int i = 0; i < order; ++i) knots.push_back(a);
    for (int i = 1; i <= interior; ++i)
        knots.push_back(a + (b - a) * i / (interior + 1));
    for (int i = 0; i < order; ++i) knots.push_back(b);
    return knots;
}

QuadratureRule gauss_legendre(int k) {
    if (k < 1) throw std::invalid_argument("quadrature order must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(k));
    rule.weights.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        // Chebyshev-like initial guess, then Newton on P_k(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= k; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = k * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(k - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(k - 1 - i)] =
            2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace sflr
