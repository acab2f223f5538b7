#pragma once

#include <Eigen/Dense>

#include <memory>

#include "sflr/bspline.hpp"

namespace sflr {

/// Equispaced evaluation grid t_j = j/p, j = 1..p (all points in (0, 1]).
struct TimeGrid {
    int p = 0;
    Eigen::VectorXd points;

    static TimeGrid regular(int p);
};

/// Boundary treatment of the order-2m spline space used for the penalty.
enum class BoundaryMode {
    /// Order-2m B-splines on [0, 1] with fully stacked boundary knots and the
    /// interior grid points t_{m+1}..t_{p-m} as knots.  The space has
    /// dimension exactly p and contains every polynomial of degree <= 2m-1,
    /// so the penalty quadratic form is exact on polynomial samples
    /// (e.g. the integrated squared curvature of t^2 is exactly 4 for m=2).
    PolynomialReproducing,
    /// Classical natural splines on [t_1, t_p]: derivatives of order
    /// m..2m-2 vanish at both ends; outside the knot span the functions
    /// continue as their degree-(m-1) Taylor polynomials.
    Natural,
};

/// The value-space spline system: basis D_1..D_p spanning an order-2m spline
/// space of dimension p, the interpolation matrix D with D(j,i) = D_i(t_j),
/// the m-th-derivative Gram matrix Omega, and the roughness penalty
/// A_m = D^{-T} Omega D^{-1}.  For any value vector b, b' A_m b equals the
/// integrated squared m-th derivative of the unique spline in the space
/// interpolating (t_j, b_j).
class SplineSystem {
public:
    SplineSystem(int p, int m, BoundaryMode mode);

    int p() const { return grid_.p; }
    int m() const { return m_; }
    BoundaryMode mode() const { return mode_; }
    const TimeGrid& grid() const { return grid_; }

    /// D(j, i) = D_i(t_j); invertible by construction (checked).
    const Eigen::MatrixXd& D() const { return D_; }
    /// Omega(i, j) = integral of D_i^(m) * D_j^(m) over the domain.
    const Eigen::MatrixXd& omega() const { return omega_; }
    /// Symmetric PSD penalty A_m with null space = degree-(m-1) polynomial samples.
    const Eigen::MatrixXd& penalty() const { return penalty_; }

    /// (D_1(t), ..., D_p(t)) for t in [0, 1].
    Eigen::VectorXd eval_basis(double t) const;

    /// Rows of eval_basis at each element of ts.
    Eigen::MatrixXd eval_matrix(const Eigen::VectorXd& ts) const;

    /// Basis coefficients of the interpolant of grid values: D^{-1} * values.
    Eigen::VectorXd coefficients(const Eigen::VectorXd& values) const;

private:
    Eigen::RowVectorXd basis_row(double t, int deriv) const;

    TimeGrid grid_;
    int m_;
    BoundaryMode mode_;
    BSplineBasis bspline_;
    Eigen::MatrixXd transform_;  // natural mode: B-spline coefs -> constrained basis
    Eigen::MatrixXd D_;
    Eigen::MatrixXd omega_;
    Eigen::MatrixXd penalty_;
    Eigen::PartialPivLU<Eigen::MatrixXd> d_lu_;
    // Taylor data for evaluating the natural basis outside [t_1, t_p].
    Eigen::MatrixXd left_jet_, right_jet_;  // m x p: derivative rows 0..m-1
};

/// Builds the spline system for the regular grid t_j = j/p.
/// Requires p >= 2m + 2 and m >= 1.
std::shared_ptr<const SplineSystem> build_spline_system(
    int p, int m = 2, BoundaryMode mode = BoundaryMode::PolynomialReproducing);

/// Callable interpolant t -> D(t)' (D'D)^{-1} D' values; reproduces `values`
/// at the grid points.
class SplineFunction {
public:
    SplineFunction() = default;
    SplineFunction(std::shared_ptr<const SplineSystem> system, Eigen::VectorXd values);

    double operator()(double t) const;
    const Eigen::VectorXd& values() const { return values_; }
    const std::shared_ptr<const SplineSystem>& system() const { return system_; }

private:
    std::shared_ptr<const SplineSystem> system_;
    Eigen::VectorXd values_;
    Eigen::VectorXd coefs_;
};

SplineFunction reconstruct_function(std::shared_ptr<const SplineSystem> system,
                                    Eigen::VectorXd values);

/// Matrix R mapping grid values to interpolated values at ts:
/// (R v)_i = interpolant_of_v(ts_i).  Row i equals eval_basis(ts_i)' D^{-1}.
Eigen::MatrixXd interpolation_matrix(const SplineSystem& system, const Eigen::VectorXd& ts);

}  // namespace sflr
