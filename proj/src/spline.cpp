#include "sflr/spline.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sflr {

namespace {

std::vector<double> reproducing_knots(const Eigen::VectorXd& t, int m) {
    // Order-2m basis on [0,1]; boundary stacks plus interior grid knots
    // t_{m+1}..t_{p-m} give dimension exactly p.
    const int p = static_cast<int>(t.size());
    const int order = 2 * m;
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(p + 2 * m));
    for (int i = 0; i < order; ++i) knots.push_back(0.0);
    for (int j = m; j < p - m; ++j) knots.push_back(t[j]);
    for (int i = 0; i < order; ++i) knots.push_back(1.0);
    return knots;
}

std::vector<double> natural_knots(const Eigen::VectorXd& t, int m) {
    // Order-2m basis on [t_1, t_p]; all grid points are knots, boundary
    // stacked to full multiplicity.  Dimension p + 2m - 2 before constraints.
    const int p = static_cast<int>(t.size());
    const int order = 2 * m;
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(p + 4 * m - 2));
    for (int i = 0; i < order; ++i) knots.push_back(t[0]);
    for (int j = 1; j < p - 1; ++j) knots.push_back(t[j]);
    for (int i = 0; i < order; ++i) knots.push_back(t[p - 1]);
    return knots;
}

BSplineBasis make_raw_basis(const TimeGrid& grid, int m, BoundaryMode mode) {
    if (m < 1) throw std::invalid_argument("penalty derivative order must be >= 1");
    if (grid.p < 2 * m + 2)
        throw std::invalid_argument("grid too small: need p >= 2m + 2 basis points");
    if (mode == BoundaryMode::PolynomialReproducing)
        return BSplineBasis(reproducing_knots(grid.points, m), 2 * m);
    return BSplineBasis(natural_knots(grid.points, m), 2 * m);
}

}  // namespace

TimeGrid TimeGrid::regular(int p) {
    if (p < 1) throw std::invalid_argument("grid size must be positive");
    TimeGrid grid;
    grid.p = p;
    grid.points.resize(p);
    for (int j = 0; j < p; ++j) grid.points[j] = static_cast<double>(j + 1) / p;
    return grid;
}

SplineSystem::SplineSystem(int p, int m, BoundaryMode mode)
    : grid_(TimeGrid::regular(p)),
      m_(m),
      mode_(mode),
      bspline_(make_raw_basis(grid_, m, mode)) {
    const int raw_dim = bspline_.size();

    if (mode_ == BoundaryMode::Natural) {
        // Constrain derivatives m..2m-2 to vanish at both boundary points;
        // the basis becomes the null space of the constraint matrix.
        const int n_con = 2 * (m_ - 1);
        if (n_con > 0) {
            Eigen::MatrixXd con(n_con, raw_dim);
            int r = 0;
            for (int d = m_; d <= 2 * m_ - 2; ++d) {
                con.row(r++) = bspline_.row(bspline_.domain_min(), d);
                con.row(r++) = bspline_.row(bspline_.domain_max(), d);
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(con, Eigen::ComputeFullV);
            transform_ = svd.matrixV().rightCols(raw_dim - n_con);
        } else {
            transform_ = Eigen::MatrixXd::Identity(raw_dim, raw_dim);
        }
        if (transform_.cols() != p)
            throw std::runtime_error("natural constraint produced a wrong basis dimension");
        // Taylor jets at the boundary for polynomial extension outside [t_1, t_p].
        left_jet_.resize(m_, p);
        right_jet_.resize(m_, p);
        for (int d = 0; d < m_; ++d) {
            left_jet_.row(d) = bspline_.row(bspline_.domain_min(), d) * transform_;
            right_jet_.row(d) = bspline_.row(bspline_.domain_max(), d) * transform_;
        }
    } else {
        if (raw_dim != p)
            throw std::runtime_error("basis construction produced a wrong dimension");
    }

    // Interpolation matrix D(j, i) = D_i(t_j).
    D_.resize(p, p);
    for (int j = 0; j < p; ++j) D_.row(j) = basis_row(grid_.points[j], 0);

    Eigen::FullPivLU<Eigen::MatrixXd> check(D_);
    if (!check.isInvertible())
        throw std::runtime_error(
            "interpolation matrix is singular: spline basis construction bug");
    d_lu_.compute(D_);

    // Quadrature rows of the m-th derivatives: sqrt(w_q) * D^(m)(x_q) over
    // Gauss-Legendre nodes per knot interval (m + 1 nodes, exact for the
    // degree-(2m-2) products).  Omega and the penalty are then Gram matrices,
    // which keeps them numerically symmetric PSD.
    const QuadratureRule rule = gauss_legendre(m_ + 1);
    const std::vector<double> brk = bspline_.breakpoints();
    const int n_seg = static_cast<int>(brk.size()) - 1;
    const int n_rows = n_seg * (m_ + 1);
    Eigen::MatrixXd S(n_rows, p);
    int r = 0;
    for (int s = 0; s < n_seg; ++s) {
        const double a = brk[static_cast<std::size_t>(s)];
        const double b = brk[static_cast<std::size_t>(s) + 1];
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            const double w = 0.5 * (b - a) * rule.weights[q];
            S.row(r++) = std::sqrt(w) * basis_row(x, m_);
        }
    }
    omega_ = S.transpose() * S;
    omega_ = 0.5 * (omega_ + omega_.transpose()).eval();

    // A_m = (S D^{-1})' (S D^{-1}): the penalty acting on value vectors.
    const Eigen::MatrixXd Tt = d_lu_.transpose().solve(S.transpose());
    const Eigen::MatrixXd T = Tt.transpose();
    penalty_ = T.transpose() * T;
    penalty_ = 0.5 * (penalty_ + penalty_.transpose()).eval();
}

Eigen::RowVectorXd SplineSystem::basis_row(double t, int deriv) const {
    if (mode_ == BoundaryMode::PolynomialReproducing)
        return bspline_.row(t, deriv);
    const double lo = bspline_.domain_min();
    const double hi = bspline_.domain_max();
    if (t >= lo && t <= hi) return bspline_.row(t, deriv) * transform_;
    // Degree-(m-1) polynomial tail: Taylor expansion at the nearer boundary.
    const bool left = t < lo;
    const double t0 = left ? lo : hi;
    const Eigen::MatrixXd& jet = left ? left_jet_ : right_jet_;
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(p());
    double factor = 1.0;
    for (int d = deriv; d < m_; ++d) {
        if (d > deriv) factor *= static_cast<double>(t - t0) / (d - deriv);
        out += factor * jet.row(d);
    }
    return out;
}

Eigen::VectorXd SplineSystem::eval_basis(double t) const {
    if (t < 0.0 || t > 1.0)
        throw std::invalid_argument("evaluation point outside [0, 1]");
    return basis_row(t, 0).transpose();
}

Eigen::MatrixXd SplineSystem::eval_matrix(const Eigen::VectorXd& ts) const {
    Eigen::MatrixXd E(ts.size(), p());
    for (Eigen::Index i = 0; i < ts.size(); ++i)
        E.row(i) = eval_basis(ts[i]).transpose();
    return E;
}

Eigen::VectorXd SplineSystem::coefficients(const Eigen::VectorXd& values) const {
    if (values.size() != p()) throw std::invalid_argument("value vector length mismatch");
    return d_lu_.solve(values);
}

std::shared_ptr<const SplineSystem> build_spline_system(int p, int m, BoundaryMode mode) {
    return std::make_shared<const SplineSystem>(p, m, mode);
}

SplineFunction::SplineFunction(std::shared_ptr<const SplineSystem> system,
                               Eigen::VectorXd values)
    : system_(std::move(system)), values_(std::move(values)) {
    if (!system_) throw std::invalid_argument("null spline system");
    coefs_ = system_->coefficients(values_);
}

double SplineFunction::operator()(double t) const {
    if (!system_) throw std::logic_error("empty spline function");
    return system_->eval_basis(t).dot(coefs_);
}

SplineFunction reconstruct_function(std::shared_ptr<const SplineSystem> system,
                                    Eigen::VectorXd values) {
    return SplineFunction(std::move(system), std::move(values));
}

Eigen::MatrixXd interpolation_matrix(const SplineSystem& system, const Eigen::VectorXd& ts) {
    const Eigen::MatrixXd E = system.eval_matrix(ts);
    // R = E D^{-1}, computed as (D^{-T} E^T)^T without forming the inverse.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system.D().transpose());
    return lu.solve(E.transpose()).transpose();
}

}  // namespace sflr
