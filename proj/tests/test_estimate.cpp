#include "doctest.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "sflr/estimate.hpp"
#include "sflr/rng.hpp"
#include "sflr/simulate.hpp"
#include "sflr/spatial.hpp"
#include "sflr/spline.hpp"

using namespace sflr;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    NormalStream rng(seed, 0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next();
    return m;
}

Eigen::VectorXd random_vector(int size, std::uint64_t seed) {
    NormalStream rng(seed, 1);
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i) v[i] = rng.next();
    return v;
}

// Dense-inverse reference for the penalized normal equations.
Eigen::VectorXd ridge_oracle(const DesignData& d, const Eigen::MatrixXd& penalty, double rho) {
    const double count = static_cast<double>(d.Xc.rows());
    const double p = static_cast<double>(d.Xc.cols());
    const Eigen::MatrixXd gram = d.Xc.transpose() * d.Xc / (count * p);
    const Eigen::VectorXd rhs = d.Xc.transpose() * d.Yc / count;
    return (gram + rho * penalty).inverse() * rhs;
}

}  // namespace

TEST_CASE("centering removes column means and the response mean") {
    SUBCASE("identical curves center to zero") {
        const Eigen::RowVectorXd curve = random_vector(6, 2).transpose();
        const Eigen::MatrixXd x = Eigen::VectorXd::Ones(4) * curve;
        Eigen::VectorXd y(4);
        y << 1.0, 2.0, 3.0, 4.0;
        const DesignData d = center(x, y);
        CHECK(d.Xc.cwiseAbs().maxCoeff() < 1e-14);
        CHECK(d.ybar == doctest::Approx(2.5));
        CHECK((d.xbar.transpose() - curve).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(d.Yc[0] == doctest::Approx(-1.5));
    }
    SUBCASE("a single observation centers to zero exactly") {
        const Eigen::MatrixXd x = random_matrix(1, 5, 3);
        Eigen::VectorXd y(1);
        y << 7.25;
        const DesignData d = center(x, y);
        CHECK(d.Xc.cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.Yc[0] == 0.0);
        CHECK(d.ybar == 7.25);
    }
    SUBCASE("column sums vanish after centering") {
        const DesignData d = center(random_matrix(3, 4, 5), random_vector(3, 5));
        CHECK(d.Xc.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(d.Yc.sum()) < 1e-12);
    }
    SUBCASE("dimension mismatch and empty designs are rejected") {
        CHECK_THROWS(center(random_matrix(3, 4, 6), random_vector(2, 6)));
        CHECK_THROWS(center(Eigen::MatrixXd(0, 4), Eigen::VectorXd(0)));
    }
}

TEST_CASE("a constant response fits a zero slope and the mean intercept") {
    const auto system = build_spline_system(8, 2);
    const Eigen::MatrixXd x = random_matrix(12, 8, 7);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 3.7);
    const FitResult f = fit(center(x, y), system, 0.01);
    CHECK(f.beta_vec.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(f.beta0 == doctest::Approx(3.7).epsilon(1e-12));
    CHECK(f.beta_fn(0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the penalized solve matches a dense-inverse reference") {
    SUBCASE("identity penalty") {
        const auto system = build_spline_system(6, 2);
        const DesignData d = center(random_matrix(4, 6, 11), random_vector(4, 11));
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(6, 6);
        const FitResult f = fit_with_penalty(d, system, eye, 0.3);
        const Eigen::VectorXd oracle = ridge_oracle(d, eye, 0.3);
        CHECK((f.beta_vec - oracle).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(f.beta0 ==
              doctest::Approx(d.ybar - d.xbar.dot(f.beta_vec) / 6.0).epsilon(1e-12));
        CHECK(f.rho == 0.3);
    }
    SUBCASE("spline penalty across sizes and rho") {
        for (int p : {8, 12, 20}) {
            const auto system = build_spline_system(p, 2);
            const DesignData d =
                center(random_matrix(30, p, 100 + p), random_vector(30, 100 + p));
            for (double rho : {1e-4, 0.05, 10.0}) {
                const FitResult f = fit(d, system, rho);
                const Eigen::VectorXd oracle = ridge_oracle(d, system->penalty(), rho);
                CHECK((f.beta_vec - oracle).cwiseAbs().maxCoeff() <
                      1e-9 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
            }
        }
    }
    SUBCASE("interpolated slope function reproduces the grid values") {
        const auto system = build_spline_system(10, 2);
        const DesignData d = center(random_matrix(15, 10, 13), random_vector(15, 13));
        const FitResult f = fit(d, system, 0.2);
        const Eigen::VectorXd& ts = system->grid().points;
        for (int j = 0; j < 10; ++j)
            CHECK(f.beta_fn(ts[j]) == doctest::Approx(f.beta_vec[j]).epsilon(1e-9));
    }
}

TEST_CASE("invalid fit inputs are rejected") {
    const auto system = build_spline_system(8, 2);
    const DesignData d = center(random_matrix(5, 8, 17), random_vector(5, 17));
    CHECK_THROWS(fit(d, system, 0.0));
    CHECK_THROWS(fit(d, system, -1.0));
    CHECK_THROWS(fit(d, nullptr, 0.1));
    const DesignData wrong = center(random_matrix(5, 9, 17), random_vector(5, 17));
    CHECK_THROWS(fit(wrong, system, 0.1));
    // Identical curves center to a (numerically) zero design, so the normal
    // equations reduce to rho * penalty * beta = 0 and the solver lands on the
    // well-defined limit: a flat zero slope with the response mean as offset.
    const Eigen::MatrixXd flat = Eigen::VectorXd::Ones(5) * random_vector(8, 19).transpose();
    const Eigen::VectorXd resp = random_vector(5, 19);
    const DesignData degenerate = center(flat, resp);
    const FitResult f = fit(degenerate, system, 0.5);
    CHECK(f.beta_vec.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(f.beta0 == doctest::Approx(resp.mean()).epsilon(1e-12));
}

TEST_CASE("zero-noise estimation recovers a smooth slope") {
    const SiteGrid grid = make_grid(10, 2);
    const auto system = build_spline_system(51, 2);
    NormalStream rng(41, 0);
    const FunctionalSample x = generate_covariates(grid, 51, rng);
    const GaussianSampler noise(
        covariance_matrix(CovarianceSpec::exponential(3.0), grid.sites));
    SlopeCase smooth;
    smooth.tag = "custom";
    smooth.beta = [](double t) { return t * (1.0 - t); };
    smooth.beta0 = 0.3;
    const ResponseSample y = generate_responses(x, *system, smooth,
                                                NoiseSpec::fixed_variance(0.0), noise, rng);
    const DesignData d = center(x.values, y.y);
    const FitResult f = fit(d, system, 1e-10);
    const EmpiricalCovariance cov = empirical_covariance(d);
    Eigen::VectorXd truth(51);
    for (int j = 0; j < 51; ++j) truth[j] = eval_slope(smooth, system->grid().points[j]);
    CHECK(gamma_seminorm(f.beta_vec - truth, cov) < 1e-3);
    CHECK(f.beta0 == doctest::Approx(0.3).epsilon(1e-2));
}

TEST_CASE("log-spaced smoothing grids") {
    const std::vector<double> g = log_rho_grid(1e-8, 1e2, 25);
    REQUIRE(g.size() == 25);
    CHECK(g.front() == doctest::Approx(1e-8).epsilon(1e-12));
    CHECK(g.back() == doctest::Approx(1e2).epsilon(1e-12));
    const double ratio = g[1] / g[0];
    for (std::size_t i = 1; i + 1 < g.size(); ++i)
        CHECK(g[i + 1] / g[i] == doctest::Approx(ratio).epsilon(1e-9));
    CHECK(std::is_sorted(g.begin(), g.end()));

    CHECK(log_rho_grid(0.5, 0.5, 1) == std::vector<double>{0.5});
    CHECK_THROWS(log_rho_grid(0.0, 1.0, 5));
    CHECK_THROWS(log_rho_grid(1.0, 0.5, 5));
    CHECK_THROWS(log_rho_grid(1.0, 2.0, 0));
}

TEST_CASE("smoothing selection on a grid") {
    const auto system = build_spline_system(12, 2);
    SUBCASE("a single grid point selects itself") {
        const DesignData d = center(random_matrix(20, 12, 23), random_vector(20, 23));
        const RhoSelection sel = select_rho(d, *system, {0.37});
        CHECK(sel.rho == 0.37);
        REQUIRE(sel.scores.size() == 1);
        CHECK(std::isfinite(sel.scores[0]));
    }
    SUBCASE("an interpolating fit never wins") {
        // Five observations span four centered dimensions: a tiny rho still
        // reproduces them exactly (zero residual), so the guard scores it +inf,
        // while heavy smoothing leaves a real residual and a finite score. With
        // fewer observations the two-dimensional polynomial null space of the
        // penalty can interpolate at any rho and every score would be +inf.
        const DesignData d = center(random_matrix(5, 12, 29), random_vector(5, 29));
        const RhoSelection sel = select_rho(d, *system, {1e-12, 10.0});
        CHECK(sel.scores[0] == std::numeric_limits<double>::infinity());
        CHECK(std::isfinite(sel.scores[1]));
        CHECK(sel.rho == 10.0);
    }
    SUBCASE("every point degenerate raises") {
        const DesignData d = center(random_matrix(2, 12, 31), random_vector(2, 31));
        CHECK_THROWS_AS(select_rho(d, *system, {1e-12, 1e-11}), std::runtime_error);
    }
    SUBCASE("grid validation") {
        const DesignData d = center(random_matrix(5, 12, 37), random_vector(5, 37));
        CHECK_THROWS(select_rho(d, *system, {}));
        CHECK_THROWS(select_rho(d, *system, {0.1, -0.5}));
    }
    SUBCASE("fit_gcv carries the selection diagnostics") {
        const DesignData d = center(random_matrix(25, 12, 43), random_vector(25, 43));
        const std::vector<double> grid = log_rho_grid(1e-6, 1e2, 9);
        const RhoSelection sel = select_rho(d, *system, grid);
        const FitResult f = fit_gcv(d, system, grid);
        CHECK(f.rho == sel.rho);
        CHECK(f.rho_grid == grid);
        CHECK(f.scores == sel.scores);
        const FitResult direct = fit(d, system, sel.rho);
        CHECK((f.beta_vec - direct.beta_vec).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("selection under pure noise prefers heavy smoothing") {
    // Frozen distributional facts for this configuration (100 sites on a
    // 10x10 lattice, 31-point curves, exponential site noise, the default
    // 25-point grid): the modal selected rho is the grid's largest element,
    // chosen in at least 35% of replicates; the selected effective dimension
    // tr H stays at or below 2.1 in median and below 6 in at least 80%.
    const SiteGrid grid = make_grid(10, 2);
    const auto system = build_spline_system(31, 2);
    const GaussianSampler noise(
        covariance_matrix(CovarianceSpec::exponential(3.0), grid.sites));
    const std::vector<double> rho_grid = log_rho_grid(1e-8, 1e2, 25);
    const int reps = 100;

    std::map<double, int> counts;
    std::vector<double> traces;
    for (int r = 0; r < reps; ++r) {
        NormalStream rng(97, static_cast<std::uint64_t>(r));
        const FunctionalSample x = generate_covariates(grid, 31, rng);
        SlopeCase flat;
        flat.tag = "custom";
        flat.beta = [](double) { return 0.0; };
        const ResponseSample y = generate_responses(x, *system, flat,
                                                    NoiseSpec::fixed_variance(1.0), noise, rng);
        const DesignData d = center(x.values, y.y);
        const RhoSelection sel = select_rho(d, *system, rho_grid);
        counts[sel.rho] += 1;
        traces.push_back(hat_matrix(d, system->penalty(), sel.rho).trace());
    }

    const double largest = rho_grid.back();
    int modal_count = 0;
    double modal_rho = 0.0;
    for (const auto& [rho, c] : counts)
        if (c > modal_count || (c == modal_count && rho > modal_rho)) {
            modal_count = c;
            modal_rho = rho;
        }
    CHECK(modal_rho == largest);
    CHECK(counts[largest] * 100 >= 35 * reps);

    std::sort(traces.begin(), traces.end());
    const double median = 0.5 * (traces[reps / 2 - 1] + traces[reps / 2]);
    CHECK(median <= 2.1);
    const int below6 =
        static_cast<int>(std::count_if(traces.begin(), traces.end(),
                                        [](double t) { return t <= 6.0; }));
    CHECK(below6 * 100 >= 80 * reps);
}

TEST_CASE("the covariance seminorm") {
    const DesignData d = center(random_matrix(6, 10, 47), random_vector(6, 47));
    const EmpiricalCovariance cov = empirical_covariance(d);
    SUBCASE("zero maps to zero") {
        CHECK(gamma_seminorm(Eigen::VectorXd::Zero(10), cov) == 0.0);
    }
    SUBCASE("null-space directions carry no length") {
        // rank(gamma_hat) <= 5 here, so the trailing eigenvectors are null.
        for (int k = 6; k < 10; ++k) {
            CHECK(cov.eigenvalues[k] < 1e-12);
            CHECK(gamma_seminorm(cov.eigenvectors.col(k), cov) < 1e-7);
        }
    }
    SUBCASE("leading eigenvector length is sqrt(lambda1 / p)") {
        const Eigen::VectorXd v1 = cov.eigenvectors.col(0);
        const double expected = std::sqrt(cov.eigenvalues[0] / 10.0);
        CHECK(gamma_seminorm(v1, cov) == doctest::Approx(expected).epsilon(1e-10));
        CHECK(gamma_seminorm(3.0 * v1, cov) ==
              doctest::Approx(3.0 * expected).epsilon(1e-10));
    }
    SUBCASE("adding a null direction changes nothing") {
        const Eigen::VectorXd u = random_vector(10, 53);
        const Eigen::VectorXd shifted = u + 2.0 * cov.eigenvectors.col(9);
        CHECK(gamma_seminorm(shifted, cov) ==
              doctest::Approx(gamma_seminorm(u, cov)).epsilon(1e-6));
    }
    SUBCASE("length mismatch is rejected") {
        CHECK_THROWS(gamma_seminorm(Eigen::VectorXd::Zero(9), cov));
    }
    SUBCASE("spectrum is sorted descending and matches the matrix trace") {
        for (int k = 0; k + 1 < 10; ++k)
            CHECK(cov.eigenvalues[k] >= cov.eigenvalues[k + 1] - 1e-12);
        CHECK(cov.eigenvalues.sum() ==
              doctest::Approx(cov.gamma_hat.trace()).epsilon(1e-10));
        // Eigenvectors reconstruct the matrix.
        const Eigen::MatrixXd recon = cov.eigenvectors *
                                      cov.eigenvalues.asDiagonal() *
                                      cov.eigenvectors.transpose();
        CHECK((recon - cov.gamma_hat).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("smoother trace inequality tr(M^2) <= tr(M)") {
    const auto system = build_spline_system(10, 2);
    SUBCASE("a zero design holds trivially") {
        const Eigen::MatrixXd flat =
            Eigen::VectorXd::Ones(5) * random_vector(10, 59).transpose();
        const DesignData d = center(flat, random_vector(5, 59));
        const TraceCheck c = trace_inequality_check(d, *system, 0.1);
        CHECK(c.holds);
        // Centering identical rows leaves ~1e-17 residuals, not exact zeros.
        CHECK(std::abs(c.tr_m) < 1e-12);
        CHECK(std::abs(c.tr_m2) < 1e-12);
    }
    SUBCASE("a generic design holds") {
        const DesignData d = center(random_matrix(20, 10, 61), random_vector(20, 61));
        const TraceCheck c = trace_inequality_check(d, *system, 0.1);
        CHECK(c.holds);
        CHECK(c.tr_m > 0.0);
        CHECK(c.tr_m2 <= c.tr_m + 1e-8);
    }
    SUBCASE("heavy smoothing pushes both traces toward the null dimension") {
        const DesignData d = center(random_matrix(20, 10, 67), random_vector(20, 67));
        const TraceCheck c = trace_inequality_check(d, *system, 1e6);
        CHECK(c.holds);
        // Only the penalty's null space (dimension m = 2) survives rho -> inf.
        CHECK(c.tr_m < 2.5);
    }
    SUBCASE("randomized instances never violate the slack") {
        NormalStream rng(71, 0);
        for (int trial = 0; trial < 100; ++trial) {
            const int p = 6 + static_cast<int>(rng.uniform() * 10);
            const int count = 3 + static_cast<int>(rng.uniform() * 30);
            const double rho = std::pow(10.0, -6.0 + 8.0 * rng.uniform());
            Eigen::MatrixXd x(count, p);
            for (int i = 0; i < count; ++i)
                for (int j = 0; j < p; ++j) x(i, j) = rng.next();
            Eigen::VectorXd y(count);
            for (int i = 0; i < count; ++i) y[i] = rng.next();
            const auto sys = build_spline_system(p, 2);
            const TraceCheck c = trace_inequality_check(center(x, y), *sys, rho);
            CHECK(c.holds);
            CHECK(c.tr_m2 <= c.tr_m + 1e-8);
        }
    }
    SUBCASE("the design overload agrees with the matrix overload") {
        const DesignData d = center(random_matrix(15, 10, 73), random_vector(15, 73));
        const Eigen::MatrixXd gram = d.Xc.transpose() * d.Xc / (15.0 * 10.0);
        const TraceCheck a = trace_inequality_check(d, *system, 0.05);
        const TraceCheck b = trace_inequality_check(gram, system->penalty(), 0.05);
        CHECK(a.tr_m == doctest::Approx(b.tr_m).epsilon(1e-12));
        CHECK(a.tr_m2 == doctest::Approx(b.tr_m2).epsilon(1e-12));
    }
}

TEST_CASE("eigenvalue tail-sum diagnostic") {
    SUBCASE("a rank-one covariance has empty tails") {
        const Eigen::VectorXd v = random_vector(12, 79);
        const EmpiricalCovariance cov = empirical_covariance(
            Eigen::MatrixXd(2.5 * v * v.transpose()));
        const auto rows = eigen_decay_diagnostic(cov, 2.0, 1e-6);
        REQUIRE(rows.size() == 11);
        for (const auto& row : rows) {
            CHECK(row.tail < 1e-10);
            CHECK(row.satisfied);
        }
        CHECK(rows.front().r == 1);
        CHECK(rows.back().r == 11);
    }
    SUBCASE("a flat spectrum fails a small constant") {
        const EmpiricalCovariance cov =
            empirical_covariance(Eigen::MatrixXd(Eigen::MatrixXd::Identity(20, 20)));
        const auto rows = eigen_decay_diagnostic(cov, 2.0, 1.0);
        CHECK(rows[0].tail == doctest::Approx(19.0));
        CHECK(rows[0].bound == doctest::Approx(1.0));
        CHECK_FALSE(rows[0].satisfied);
    }
    SUBCASE("a power-law spectrum satisfies the matched bound") {
        const int p = 40;
        const double q = 2.0;
        Eigen::VectorXd diag(p);
        for (int j = 0; j < p; ++j) diag[j] = std::pow(j + 1.0, -(2.0 * q + 1.0));
        const EmpiricalCovariance cov =
            empirical_covariance(Eigen::MatrixXd(diag.asDiagonal()));
        const auto rows = eigen_decay_diagnostic(cov, q, 1.1 / (2.0 * q));
        for (const auto& row : rows) CHECK(row.satisfied);
        // Tails shrink monotonically.
        for (std::size_t i = 0; i + 1 < rows.size(); ++i)
            CHECK(rows[i].tail >= rows[i + 1].tail);
    }
}

TEST_CASE("hat matrix is symmetric with a symmetric penalty") {
    const DesignData d = center(random_matrix(8, 10, 83), random_vector(8, 83));
    const auto system = build_spline_system(10, 2);
    SUBCASE("identity penalty") {
        const Eigen::MatrixXd h =
            hat_matrix(d, Eigen::MatrixXd::Identity(10, 10), 0.1);
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(h.rows() == 8);
    }
    SUBCASE("spline penalty") {
        const Eigen::MatrixXd h = hat_matrix(d, system->penalty(), 0.1);
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        // Eigenvalues of the smoother live in [0, 1].
        const Eigen::VectorXd ev =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                0.5 * (h + h.transpose()))
                .eigenvalues();
        CHECK(ev.minCoeff() > -1e-9);
        CHECK(ev.maxCoeff() < 1.0 + 1e-9);
    }
}

TEST_CASE("roughness of the fit decreases as rho grows") {
    const auto system = build_spline_system(12, 2);
    const DesignData d = center(random_matrix(30, 12, 89), random_vector(30, 89));
    double prev = std::numeric_limits<double>::infinity();
    for (double rho : {1e-6, 1e-3, 1.0, 1e3}) {
        const FitResult f = fit(d, system, rho);
        const double rough = f.beta_vec.dot(system->penalty() * f.beta_vec);
        CHECK(rough <= prev * (1.0 + 1e-9));
        prev = rough;
    }
}
