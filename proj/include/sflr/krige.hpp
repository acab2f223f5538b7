#pragma once

#include <Eigen/Dense>

#include "sflr/estimate.hpp"
#include "sflr/simulate.hpp"
#include "sflr/spatial.hpp"

namespace sflr {

/// Ordinary-kriging weights for one target site.  The same weight vector
/// applies at every time point: under a separable covariance the spatial
/// system does not depend on t.
struct KrigingSystem {
    Eigen::RowVectorXd target;
    Eigen::VectorXd weights;
    double lagrange = 0.0;
    CovarianceSpec cov_spec;
};

/// Solves the bordered system [Sigma 1; 1' 0] [w; mu] = [sigma0; 1] where
/// sigma0_l is the covariance between the target and site l.  The weights
/// sum to one (unbiasedness constraint).  A singular bordered system
/// (duplicate sites) raises an error.
KrigingSystem solve_kriging(const SiteGrid& grid, const Eigen::RowVectorXd& target,
                            const CovarianceSpec& cov = CovarianceSpec::exponential());

/// Weighted combination of the observed curves: out_j = sum_l w_l X_l(t_j).
Eigen::VectorXd krige_curve(const KrigingSystem& system, const Eigen::MatrixXd& values);
Eigen::VectorXd krige_curve(const KrigingSystem& system, const FunctionalSample& x);

/// Fitted and true responses at an unobserved curve, with their squared gap.
struct PredictionPair {
    double y_hat = 0.0;
    double y_star = 0.0;
    double squared_error = 0.0;
};

/// y_hat = beta0_hat + (1/p) sum_j beta_hat(t_j) x0_j and
/// y_star = beta0 + (1/p) sum_j beta(t_j) x0_j, sharing the fit's grid and
/// the same (1/p) weighting.
PredictionPair predict_pair(const FitResult& fit, const SlopeCase& truth,
                            const Eigen::VectorXd& x0);

/// Site-separation diagnostic: distance from the target to the nearest
/// observed site against the threshold floor(n^(2d/theta)).  Advisory only.
struct SeparationReport {
    double distance = 0.0;
    double threshold = 0.0;
    bool satisfied = false;
};

SeparationReport separation_diagnostic(const SiteGrid& grid, const Eigen::RowVectorXd& target,
                                       double theta);

}  // namespace sflr
