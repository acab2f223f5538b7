#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sflr {

/// B-spline basis over an arbitrary non-decreasing knot vector (repeated
/// knots allowed), evaluated by the Cox-de Boor recursion.  Derivatives use
/// the knot-difference lowering formula, so they are exact for any knot
/// multiplicity.
class BSplineBasis {
public:
    /// `order` = polynomial degree + 1 (cubic splines have order 4).
    /// Requires knots.size() > order and a non-decreasing knot vector.
    BSplineBasis(std::vector<double> knots, int order);

    int order() const { return order_; }
    /// Number of basis functions: #knots - order.
    int size() const { return static_cast<int>(knots_.size()) - order_; }
    double domain_min() const { return knots_.front(); }
    double domain_max() const { return knots_.back(); }
    const std::vector<double>& knots() const { return knots_; }

    /// Interval endpoints of the piecewise-polynomial segments (unique knots).
    std::vector<double> breakpoints() const;

    /// Dense row of the `deriv`-th derivatives of every basis function at t.
    /// t must lie in [domain_min, domain_max]; the right endpoint is treated
    /// as part of the last non-empty interval.
    Eigen::RowVectorXd row(double t, int deriv = 0) const;

private:
    std::vector<double> knots_;
    int order_;
};

/// Open-uniform (clamped) knot vector on [a, b] for `dim` basis functions of
/// the given order: boundary knots stacked `order` times, dim - order
/// equispaced interior knots.
std::vector<double> clamped_uniform_knots(double a, double b, int dim, int order);

/// k-point Gauss-Legendre rule on [-1, 1], nodes ascending.  Computed by
/// Newton iteration on the Legendre recurrence; exact for polynomials of
/// degree <= 2k - 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_legendre(int k);

}  // namespace sflr
