#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "sflr/rng.hpp"

namespace sflr {

/// Regular lattice {1..n}^d flattened in lexicographic order (first
/// coordinate most significant).  Non-lattice targets (real coordinates) are
/// handled as free row vectors by the distance and covariance helpers.
struct SiteGrid {
    int n = 0;
    int d = 0;
    Eigen::MatrixXd sites;  // n^d x d

    Eigen::Index count() const { return sites.rows(); }
};

/// Builds the lexicographically ordered lattice.  Rejects grids whose total
/// site count exceeds the configured budget (dense covariance factors scale
/// as count^3).
SiteGrid make_grid(int n, int d);

enum class CovarianceKind { Exponential, Constant, Separable };

/// Spatial covariance model between sites.
///   Exponential: C(i, j) = exp(-rate * ||i - j||_2)  (unit diagonal)
///   Constant:    C(i, j) = level                      (rank one)
///   Separable:   C(i, j; t, u) = temporal(|t - u|) * spatial(||i - j||_2),
///                with spatial(0) = 1 so the matrix over sites at a fixed
///                time is the spatial factor alone.
struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::Exponential;
    double rate = 3.0;
    double level = 0.0;
    std::function<double(double)> temporal;
    std::function<double(double)> spatial;

    static CovarianceSpec exponential(double rate = 3.0);
    static CovarianceSpec constant(double level);
    static CovarianceSpec separable(std::function<double(double)> temporal,
                                    std::function<double(double)> spatial);
};

/// Covariance matrix over the given site rows.
Eigen::MatrixXd covariance_matrix(const CovarianceSpec& spec, const Eigen::MatrixXd& sites);

/// Covariances between each site row and a single target site.
Eigen::VectorXd cross_covariance(const CovarianceSpec& spec, const Eigen::MatrixXd& sites,
                                 const Eigen::RowVectorXd& target);

/// Minimum pairwise Euclidean distance between two site sets.
double min_site_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Cholesky-based Gaussian sampler.  Semi-definite inputs (for instance the
/// rank-one constant model) are handled by escalating diagonal jitter
/// eps = 1e-10 * trace / dim, retried up to three times with a factor-100
/// escalation before failing with a "covariance not PSD" error.
class GaussianSampler {
public:
    GaussianSampler() = default;  // zero-dimensional; reassign before use
    explicit GaussianSampler(const Eigen::MatrixXd& cov);

    /// One draw: L * z with z iid standard normal.  Pure function of the
    /// stream state, so identical streams give bit-identical draws.
    Eigen::VectorXd sample(NormalStream& rng) const;

    Eigen::Index dim() const { return factor_.rows(); }
    const Eigen::MatrixXd& factor() const { return factor_; }

private:
    Eigen::MatrixXd factor_;
};

/// One-shot convenience wrapper around GaussianSampler.
Eigen::VectorXd sample_gaussian(const Eigen::MatrixXd& cov, NormalStream& rng);

/// Partial sums S_T = sum_{t=1..T} t^(d-1) * spatial(t) for a separable or
/// exponential kernel: advisory numerical probe of the kernel summability
/// hypothesis (it can suggest but never prove convergence).
std::vector<double> summability_partial_sums(const CovarianceSpec& spec, int d, int t_max);

}  // namespace sflr
