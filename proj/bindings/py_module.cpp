// Python bindings for the main operations: lattice construction, penalty
// matrices, data generation, penalized fitting, kriging, and the Monte-Carlo
// experiment driver.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sflr/estimate.hpp"
#include "sflr/harness.hpp"
#include "sflr/krige.hpp"
#include "sflr/rng.hpp"
#include "sflr/simulate.hpp"
#include "sflr/spatial.hpp"
#include "sflr/spline.hpp"

namespace py = pybind11;
using namespace sflr;

namespace {

py::dict fit_to_dict(const FitResult& f) {
    py::dict out;
    out["beta"] = f.beta_vec;
    out["beta0"] = f.beta0;
    out["rho"] = f.rho;
    out["rho_grid"] = f.rho_grid;
    out["scores"] = f.scores;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Smoothing-spline regression and kriging prediction for "
              "lattice-sampled functional data";

    m.def(
        "lattice", [](int n, int d) { return make_grid(n, d).sites; }, py::arg("n"),
        py::arg("d") = 2,
        "Lexicographically ordered lattice {1..n}^d as an (n^d, d) array.");

    m.def(
        "time_grid", [](int p) { return TimeGrid::regular(p).points; }, py::arg("p"),
        "Observation points t_j = j/p, j = 1..p.");

    m.def(
        "penalty_matrix",
        [](int p, int m_) { return build_spline_system(p, m_)->penalty(); }, py::arg("p"),
        py::arg("m") = 2,
        "Roughness penalty A_m: b' A_m b is the integrated squared m-th "
        "derivative of the spline interpolating the grid values b.");

    m.def(
        "simulate",
        [](int n, int p, const std::string& case_tag, double snr, std::uint64_t seed,
           int d, const std::string& lambda_mode, int m_) {
            const SiteGrid grid = make_grid(n, d);
            CovariateModel model;
            model.lambda_mode = lambda_mode_from_string(lambda_mode);
            NormalStream rng(seed, 0);
            const FunctionalSample x = generate_covariates(grid, p, rng, model);
            const auto system = build_spline_system(p, m_);
            const GaussianSampler noise(
                covariance_matrix(CovarianceSpec::exponential(3.0), grid.sites));
            const ResponseSample y = generate_responses(
                x, *system, slope_case(case_tag), NoiseSpec::from_snr(snr), noise, rng);
            py::dict out;
            out["x"] = x.values;
            out["y"] = y.y;
            out["sigma2_eps"] = y.sigma2_eps;
            out["signal_second_moment"] = y.signal_second_moment;
            return out;
        },
        py::arg("n"), py::arg("p"), py::arg("case"), py::arg("snr"), py::arg("seed") = 0,
        py::arg("d") = 2, py::arg("lambda_mode") = "per-point", py::arg("m") = 2,
        "One replicate of curves (n^d, p) and responses under the given slope "
        "case and signal-to-noise ratio.");

    m.def(
        "fit",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int m_, double rho) {
            const auto system = build_spline_system(static_cast<int>(x.cols()), m_);
            return fit_to_dict(fit(center(x, y), system, rho));
        },
        py::arg("x"), py::arg("y"), py::arg("m") = 2, py::arg("rho"),
        "Penalized fit at a fixed smoothing parameter; returns beta (values on "
        "the grid), beta0, and rho.");

    m.def(
        "fit_gcv",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int m_, double rho_lo,
           double rho_hi, int rho_count) {
            const auto system = build_spline_system(static_cast<int>(x.cols()), m_);
            return fit_to_dict(
                fit_gcv(center(x, y), system, log_rho_grid(rho_lo, rho_hi, rho_count)));
        },
        py::arg("x"), py::arg("y"), py::arg("m") = 2, py::arg("rho_lo") = 1e-8,
        py::arg("rho_hi") = 1e2, py::arg("rho_count") = 25,
        "Penalized fit with the smoothing parameter selected by generalized "
        "cross-validation on a log grid; the dict carries the grid and scores.");

    m.def(
        "kriging_weights",
        [](int n, int d, const Eigen::RowVectorXd& target) {
            const KrigingSystem sys = solve_kriging(make_grid(n, d), target);
            return py::make_tuple(sys.weights, sys.lagrange);
        },
        py::arg("n"), py::arg("d"), py::arg("target"),
        "Ordinary-kriging weights (summing to one) and the Lagrange multiplier "
        "for predicting at the target site.");

    m.def(
        "krige_curve",
        [](int n, int d, const Eigen::RowVectorXd& target, const Eigen::MatrixXd& values) {
            const KrigingSystem sys = solve_kriging(make_grid(n, d), target);
            return Eigen::VectorXd(krige_curve(sys, values));
        },
        py::arg("n"), py::arg("d"), py::arg("target"), py::arg("values"),
        "Kriged curve at the target site from the observed (n^d, p) values.");

    m.def(
        "trace_inequality",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int m_, double rho) {
            const auto system = build_spline_system(static_cast<int>(x.cols()), m_);
            const TraceCheck c = trace_inequality_check(center(x, y), *system, rho);
            return py::make_tuple(c.tr_m, c.tr_m2, c.holds);
        },
        py::arg("x"), py::arg("y"), py::arg("m") = 2, py::arg("rho"),
        "(tr M, tr M^2, holds) for the smoother matrix at the given rho.");

    m.def(
        "experiment_csv",
        [](const std::vector<int>& n_list, const std::vector<double>& snr_list,
           const std::vector<std::string>& cases, int replications, int p, int m_,
           std::uint64_t seed, double rho_lo, double rho_hi, int rho_count, int threads,
           const std::optional<Eigen::RowVectorXd>& target, int d) {
            ExperimentConfig cfg;
            cfg.d = d;
            cfg.n_list = n_list;
            cfg.snr_list = snr_list;
            cfg.cases = cases;
            cfg.replications = replications;
            cfg.p = p;
            cfg.m = m_;
            cfg.seed = seed;
            cfg.rho_grid = RhoGridSpec{rho_lo, rho_hi, rho_count};
            cfg.threads = threads;
            if (target) cfg.target = *target;
            const ExperimentReport report = run_experiment(cfg);
            return report_csv(report);
        },
        py::arg("n_list"), py::arg("snr_list"), py::arg("cases"),
        py::arg("replications") = 20, py::arg("p") = 101, py::arg("m") = 2,
        py::arg("seed") = 0, py::arg("rho_lo") = 1e-8, py::arg("rho_hi") = 1e2,
        py::arg("rho_count") = 25, py::arg("threads") = 0,
        py::arg("target") = std::nullopt, py::arg("d") = 2,
        "Runs the Monte-Carlo experiment cross and returns the report CSV "
        "(case,snr,n,metric,mean,stderr,reps).");

    m.attr("__version__") = "1.0.0";
}
