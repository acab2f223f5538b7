#include "sflr/krige.hpp"

#include <cmath>
#include <stdexcept>

namespace sflr {

KrigingSystem solve_kriging(const SiteGrid& grid, const Eigen::RowVectorXd& target,
                            const CovarianceSpec& cov) {
    const Eigen::Index count = grid.count();
    if (count == 0) throw std::invalid_argument("empty site grid");
    if (target.size() != grid.sites.cols())
        throw std::invalid_argument("target dimension does not match the grid");

    Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(count + 1, count + 1);
    bordered.topLeftCorner(count, count) = covariance_matrix(cov, grid.sites);
    bordered.topRightCorner(count, 1).setOnes();
    bordered.bottomLeftCorner(1, count).setOnes();

    Eigen::VectorXd rhs(count + 1);
    rhs.head(count) = cross_covariance(cov, grid.sites, target);
    rhs(count) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(bordered);
    if (!lu.isInvertible())
        throw std::runtime_error(
            "singular kriging system: the site list contains duplicate sites");
    const Eigen::VectorXd solution = lu.solve(rhs);
    if (!solution.allFinite()) throw std::runtime_error("kriging solve produced non-finite weights");

    KrigingSystem system;
    system.target = target;
    system.weights = solution.head(count);
    system.lagrange = solution(count);
    system.cov_spec = cov;
    return system;
}

Eigen::VectorXd krige_curve(const KrigingSystem& system, const Eigen::MatrixXd& values) {
    if (values.rows() != system.weights.size())
        throw std::invalid_argument("curve count does not match the kriging weights");
    return values.transpose() * system.weights;
}

Eigen::VectorXd krige_curve(const KrigingSystem& system, const FunctionalSample& x) {
    return krige_curve(system, x.values);
}

PredictionPair predict_pair(const FitResult& fit, const SlopeCase& truth,
                            const Eigen::VectorXd& x0) {
    const auto& system = fit.beta_fn.system();
    if (!system) throw std::invalid_argument("fit carries no spline system");
    if (x0.size() != system->p())
        throw std::invalid_argument("curve is not on the fit's time grid");
    const Eigen::VectorXd& ts = system->grid().points;
    const double p = static_cast<double>(ts.size());

    PredictionPair pair;
    pair.y_hat = fit.beta0 + fit.beta_vec.dot(x0) / p;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ts.size(); ++j) acc += eval_slope(truth, ts[j]) * x0[j];
    pair.y_star = truth.beta0 + acc / p;
    const double gap = pair.y_hat - pair.y_star;
    pair.squared_error = gap * gap;
    return pair;
}

SeparationReport separation_diagnostic(const SiteGrid& grid, const Eigen::RowVectorXd& target,
                                       double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("mixing exponent theta must be positive");
    SeparationReport report;
    Eigen::MatrixXd target_row(1, target.size());
    target_row.row(0) = target;
    report.distance = min_site_distance(grid.sites, target_row);
    report.threshold =
        std::floor(std::pow(static_cast<double>(grid.n), 2.0 * grid.d / theta));
    report.satisfied = report.distance >= report.threshold;
    return report;
}

}  // namespace sflr
