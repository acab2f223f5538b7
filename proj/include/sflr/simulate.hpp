#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

#include "sflr/rng.hpp"
#include "sflr/spatial.hpp"
#include "sflr/spline.hpp"

namespace sflr {

/// Slope function of the scalar-on-function regression, with intercept.
struct SlopeCase {
    std::string tag = "custom";
    std::function<double(double)> beta;
    double beta0 = 0.0;
};

/// beta(t) = sin(2 pi t^3)^3.
SlopeCase slope_case_a();
/// beta(t) = (0.4 - t)^2.
SlopeCase slope_case_b();
SlopeCase slope_case(const std::string& tag);

double eval_slope(const SlopeCase& slope, double t);

/// How the additive noise surface is drawn: one vector per time point
/// (independent across points) or a single vector reused for every point.
enum class LambdaMode { PerPoint, PerReplicate };

LambdaMode lambda_mode_from_string(const std::string& name);
std::string to_string(LambdaMode mode);

/// Curves observed on a shared time grid; entry (l, j) = X_l(t_j) with sites
/// in lexicographic order.
struct FunctionalSample {
    SiteGrid grid;
    TimeGrid time;
    Eigen::MatrixXd values;  // count x p
};

/// Data-generating model for the functional covariates:
/// X_l(t) = sum_{k=1..15} xi_{l,k} B_k(t) + Lambda_l(t), with each coefficient
/// field xi_{.,k} ~ N(0, xi_cov) independent across k and Lambda drawn from
/// lambda_cov according to lambda_mode.
struct CovariateModel {
    int basis_size = 15;
    CovarianceSpec xi_cov = CovarianceSpec::exponential(3.0);
    CovarianceSpec lambda_cov = CovarianceSpec::constant(0.09);
    LambdaMode lambda_mode = LambdaMode::PerPoint;
};

/// The fixed generating dictionary: the first `basis_size` cubic B-splines
/// with equispaced interior knots on [0, 1], evaluated at the points ts.
Eigen::MatrixXd datagen_basis_matrix(const Eigen::VectorXd& ts, int basis_size = 15);

/// Draws one replicate of covariates on the p-point regular grid.
/// Requires p >= 30 so the curves resolve the 15-element dictionary.
FunctionalSample generate_covariates(const SiteGrid& grid, int p, NormalStream& rng,
                                     const CovariateModel& model = {});

/// Same, with the site-covariance factors prebuilt (Monte-Carlo fast path).
FunctionalSample generate_covariates(const SiteGrid& grid, const TimeGrid& time,
                                     const GaussianSampler& xi_sampler,
                                     const GaussianSampler& lambda_sampler,
                                     LambdaMode lambda_mode, int basis_size,
                                     NormalStream& rng);

/// Noise policy for the responses: either a target signal-to-noise ratio
/// snr = S / (S + sigma2) inverted against the empirical second moment S of
/// the signal, or a fixed variance (zero allowed).
struct NoiseSpec {
    std::optional<double> snr;
    std::optional<double> sigma2;

    static NoiseSpec from_snr(double snr);
    static NoiseSpec fixed_variance(double sigma2);
};

struct ResponseSample {
    Eigen::VectorXd y;
    double sigma2_eps = 0.0;
    double signal_second_moment = 0.0;
};

/// Builds responses y_l = beta0 + signal_l + eps_l where
///   signal_l = (1/(N-1)) sum_{j=1..N} beta(u_j) X_l(u_j),  u_j = (j-1)/(N-1),
/// the curve values at u_j come from the spline reconstruction of the p-grid
/// values, and eps ~ N(0, sigma2 * Sigma) with Sigma the site covariance
/// behind `noise_sampler` (its factor is scaled by sqrt(sigma2)).
///
/// `interp` may pass a precomputed interpolation_matrix(system, u); when
/// null it is built on the fly.
ResponseSample generate_responses(const FunctionalSample& x, const SplineSystem& system,
                                  const SlopeCase& slope, const NoiseSpec& noise,
                                  const GaussianSampler& noise_sampler, NormalStream& rng,
                                  int quadrature_points = 1001,
                                  const Eigen::MatrixXd* interp = nullptr);

/// Quadrature abscissae u_j = (j-1)/(N-1), j = 1..N.
Eigen::VectorXd quadrature_points_grid(int quadrature_points);

/// Writes a sample as CSV: one row per site, coordinate columns first, then
/// the curve values (header "coord1,...,coordd,X_t1,...,X_tp").
void write_sample_csv(const std::string& path, const FunctionalSample& sample);

}  // namespace sflr
