#include "sflr/simulate.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sflr/bspline.hpp"

namespace sflr {

SlopeCase slope_case_a() {
    SlopeCase slope;
    slope.tag = "A";
    slope.beta = [](double t) {
        const double s = std::sin(2.0 * M_PI * t * t * t);
        return s * s * s;
    };
    return slope;
}

SlopeCase slope_case_b() {
    SlopeCase slope;
    slope.tag = "B";
    slope.beta = [](double t) { return (0.4 - t) * (0.4 - t); };
    return slope;
}

SlopeCase slope_case(const std::string& tag) {
    if (tag == "A" || tag == "a") return slope_case_a();
    if (tag == "B" || tag == "b") return slope_case_b();
    throw std::invalid_argument("unknown slope case: " + tag);
}

double eval_slope(const SlopeCase& slope, double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("slope argument outside [0, 1]");
    if (!slope.beta) throw std::invalid_argument("slope case has no function attached");
    return slope.beta(t);
}

LambdaMode lambda_mode_from_string(const std::string& name) {
    if (name == "per-point") return LambdaMode::PerPoint;
    if (name == "per-replicate") return LambdaMode::PerReplicate;
    throw std::invalid_argument("lambda mode must be per-point or per-replicate");
}

std::string to_string(LambdaMode mode) {
    return mode == LambdaMode::PerPoint ? "per-point" : "per-replicate";
}

Eigen::MatrixXd datagen_basis_matrix(const Eigen::VectorXd& ts, int basis_size) {
    constexpr int kOrder = 4;  // cubic
    if (basis_size < kOrder)
        throw std::invalid_argument("generating dictionary needs at least `order` elements");
    BSplineBasis basis(clamped_uniform_knots(0.0, 1.0, basis_size, kOrder), kOrder);
    Eigen::MatrixXd out(ts.size(), basis_size);
    for (Eigen::Index i = 0; i < ts.size(); ++i) out.row(i) = basis.row(ts[i]);
    return out;
}

FunctionalSample generate_covariates(const SiteGrid& grid, const TimeGrid& time,
                                     const GaussianSampler& xi_sampler,
                                     const GaussianSampler& lambda_sampler,
                                     LambdaMode lambda_mode, int basis_size,
                                     NormalStream& rng) {
    const Eigen::Index count = grid.count();
    if (count == 0) throw std::invalid_argument("empty site grid");
    if (xi_sampler.dim() != count || lambda_sampler.dim() != count)
        throw std::invalid_argument("sampler dimension does not match the site count");

    const Eigen::MatrixXd basis = datagen_basis_matrix(time.points, basis_size);

    FunctionalSample sample;
    sample.grid = grid;
    sample.time = time;
    sample.values = Eigen::MatrixXd::Zero(count, time.p);

    // Coefficient fields: one spatially correlated draw per dictionary element.
    for (int k = 0; k < basis_size; ++k) {
        const Eigen::VectorXd xi = xi_sampler.sample(rng);
        sample.values.noalias() += xi * basis.col(k).transpose();
    }

    if (lambda_mode == LambdaMode::PerPoint) {
        for (int j = 0; j < time.p; ++j)
            sample.values.col(j) += lambda_sampler.sample(rng);
    } else {
        const Eigen::VectorXd lambda = lambda_sampler.sample(rng);
        sample.values.colwise() += lambda;
    }
    return sample;
}

FunctionalSample generate_covariates(const SiteGrid& grid, int p, NormalStream& rng,
                                     const CovariateModel& model) {
    if (p < 30)
        throw std::invalid_argument("covariate grid too coarse: need p >= 30");
    const GaussianSampler xi_sampler(covariance_matrix(model.xi_cov, grid.sites));
    const GaussianSampler lambda_sampler(covariance_matrix(model.lambda_cov, grid.sites));
    return generate_covariates(grid, TimeGrid::regular(p), xi_sampler, lambda_sampler,
                               model.lambda_mode, model.basis_size, rng);
}

NoiseSpec NoiseSpec::from_snr(double snr) {
    if (!(snr > 0.0 && snr < 1.0))
        throw std::invalid_argument("snr must lie strictly inside (0, 1)");
    NoiseSpec spec;
    spec.snr = snr;
    return spec;
}

NoiseSpec NoiseSpec::fixed_variance(double sigma2) {
    if (sigma2 < 0.0) throw std::invalid_argument("noise variance must be >= 0");
    NoiseSpec spec;
    spec.sigma2 = sigma2;
    return spec;
}

Eigen::VectorXd quadrature_points_grid(int quadrature_points) {
    if (quadrature_points < 2) throw std::invalid_argument("quadrature needs >= 2 points");
    Eigen::VectorXd u(quadrature_points);
    for (int j = 0; j < quadrature_points; ++j)
        u[j] = static_cast<double>(j) / (quadrature_points - 1);
    return u;
}

ResponseSample generate_responses(const FunctionalSample& x, const SplineSystem& system,
                                  const SlopeCase& slope, const NoiseSpec& noise,
                                  const GaussianSampler& noise_sampler, NormalStream& rng,
                                  int quadrature_points, const Eigen::MatrixXd* interp) {
    if (x.values.rows() == 0) throw std::invalid_argument("empty covariate sample");
    if (x.time.p != system.p())
        throw std::invalid_argument("spline system does not match the sample grid");
    if (noise_sampler.dim() != x.values.rows())
        throw std::invalid_argument("noise sampler dimension mismatch");
    if (noise.snr.has_value() == noise.sigma2.has_value())
        throw std::invalid_argument("specify exactly one of snr or fixed variance");
    if (!slope.beta) throw std::invalid_argument("slope case has no function attached");

    const Eigen::VectorXd u = quadrature_points_grid(quadrature_points);
    Eigen::MatrixXd local;
    if (interp == nullptr) {
        local = interpolation_matrix(system, u);
        interp = &local;
    } else if (interp->rows() != u.size() || interp->cols() != x.time.p) {
        throw std::invalid_argument("interpolation matrix shape mismatch");
    }

    Eigen::VectorXd slope_at_u(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) slope_at_u[j] = slope.beta(u[j]);

    // signal_l = (1/(N-1)) sum_j beta(u_j) Xhat_l(u_j); the (N-1) weight over
    // N points is kept as printed in the generating recipe.
    const Eigen::VectorXd weights = (*interp).transpose() * slope_at_u / (quadrature_points - 1);
    const Eigen::VectorXd signal = x.values * weights;

    ResponseSample out;
    out.signal_second_moment = signal.squaredNorm() / static_cast<double>(signal.size());

    if (noise.snr) {
        if (out.signal_second_moment == 0.0)
            throw std::invalid_argument(
                "degenerate zero signal: snr control needs a nonzero slope");
        out.sigma2_eps = out.signal_second_moment * (1.0 - *noise.snr) / *noise.snr;
    } else {
        out.sigma2_eps = *noise.sigma2;
    }

    out.y = signal.array() + slope.beta0;
    if (out.sigma2_eps > 0.0)
        out.y += std::sqrt(out.sigma2_eps) * noise_sampler.sample(rng);
    return out;
}

void write_sample_csv(const std::string& path, const FunctionalSample& sample) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open for writing: " + path);
    for (int k = 0; k < sample.grid.d; ++k) file << "coord" << (k + 1) << ",";
    for (int j = 0; j < sample.time.p; ++j)
        file << "X_t" << (j + 1) << (j + 1 < sample.time.p ? "," : "\n");
    file.precision(17);
    for (Eigen::Index r = 0; r < sample.values.rows(); ++r) {
        for (int k = 0; k < sample.grid.d; ++k) file << sample.grid.sites(r, k) << ",";
        for (int j = 0; j < sample.time.p; ++j)
            file << sample.values(r, j) << (j + 1 < sample.time.p ? "," : "\n");
    }
    if (!file) throw std::runtime_error("write failed: " + path);
}

}  // namespace sflr
