#include "sflr/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sflr {

namespace {

constexpr double kTraceSlack = 1e-8;

struct PenalizedSystem {
    Eigen::MatrixXd gram;  // Xc'Xc / (count p)
    Eigen::VectorXd rhs;   // Xc'Yc / count
    double count = 0.0;
};

PenalizedSystem normal_equations(const DesignData& design) {
    PenalizedSystem sys;
    sys.count = static_cast<double>(design.Xc.rows());
    const double p = static_cast<double>(design.Xc.cols());
    sys.gram = design.Xc.transpose() * design.Xc / (sys.count * p);
    sys.gram = 0.5 * (sys.gram + sys.gram.transpose()).eval();
    sys.rhs = design.Xc.transpose() * design.Yc / sys.count;
    return sys;
}

/// SPD solve with an indefinite-factorization fallback; throws a
/// rank-deficiency error when neither factorization is trustworthy.
class PenalizedSolver {
public:
    PenalizedSolver(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& penalty, double rho) {
        if (rho <= 0.0) throw std::invalid_argument("smoothing parameter must be positive");
        if (penalty.rows() != gram.rows() || penalty.cols() != gram.cols())
            throw std::invalid_argument("penalty dimension mismatch");
        const Eigen::MatrixXd k = gram + rho * penalty;
        llt_.compute(k);
        if (llt_.info() != Eigen::Success) {
            ldlt_.compute(k);
            use_ldlt_ = true;
            if (ldlt_.info() != Eigen::Success) fail();
        }
    }

    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
        Eigen::MatrixXd x;
        if (use_ldlt_)
            x = ldlt_.solve(b);
        else
            x = llt_.solve(b);
        if (!x.allFinite()) fail();
        return x;
    }

private:
    [[noreturn]] static void fail() {
        throw std::runtime_error(
            "penalized system is rank-deficient: the penalty null space meets the design "
            "null space; increase the sample, raise rho, or lower the penalty order m");
    }

    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    bool use_ldlt_ = false;
};

FitResult assemble_fit(const DesignData& design,
                       const std::shared_ptr<const SplineSystem>& system,
                       Eigen::VectorXd beta_vec, double rho) {
    FitResult result;
    result.rho = rho;
    result.beta0 =
        design.ybar - design.xbar.dot(beta_vec) / static_cast<double>(beta_vec.size());
    result.beta_fn = SplineFunction(system, beta_vec);
    result.beta_vec = std::move(beta_vec);
    return result;
}

}  // namespace

DesignData center(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size())
        throw std::invalid_argument("covariates and responses have different counts");
    if (x.rows() == 0) throw std::invalid_argument("empty design");
    DesignData design;
    design.xbar = x.colwise().mean();
    design.ybar = y.mean();
    design.Xc = x.rowwise() - design.xbar.transpose();
    design.Yc = y.array() - design.ybar;
    return design;
}

DesignData center(const FunctionalSample& x, const ResponseSample& y) {
    return center(x.values, y.y);
}

EmpiricalCovariance empirical_covariance(const Eigen::MatrixXd& gamma_hat) {
    EmpiricalCovariance cov;
    cov.gamma_hat = 0.5 * (gamma_hat + gamma_hat.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.gamma_hat);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition of the covariance surrogate failed");
    // SelfAdjointEigenSolver sorts ascending; flip to descending.
    cov.eigenvalues = eig.eigenvalues().reverse();
    cov.eigenvectors = eig.eigenvectors().rowwise().reverse();
    return cov;
}

EmpiricalCovariance empirical_covariance(const DesignData& design) {
    const double denom =
        static_cast<double>(design.Xc.rows()) * static_cast<double>(design.Xc.cols());
    return empirical_covariance(
        Eigen::MatrixXd(design.Xc.transpose() * design.Xc / denom));
}

FitResult fit_with_penalty(const DesignData& design,
                           const std::shared_ptr<const SplineSystem>& system,
                           const Eigen::MatrixXd& penalty, double rho) {
    if (!system) throw std::invalid_argument("null spline system");
    if (design.Xc.cols() != system->p())
        throw std::invalid_argument("design width does not match the spline grid");
    const PenalizedSystem sys = normal_equations(design);
    const PenalizedSolver solver(sys.gram, penalty, rho);
    Eigen::VectorXd beta = solver.solve(sys.rhs);
    return assemble_fit(design, system, std::move(beta), rho);
}

FitResult fit(const DesignData& design, const std::shared_ptr<const SplineSystem>& system,
              double rho) {
    if (!system) throw std::invalid_argument("null spline system");
    return fit_with_penalty(design, system, system->penalty(), rho);
}

std::vector<double> log_rho_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > 0.0) || hi < lo)
        throw std::invalid_argument("rho grid bounds must be positive with hi >= lo");
    if (count < 1) throw std::invalid_argument("rho grid needs at least one point");
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = (std::log(hi) - std::log(lo)) / (count - 1);
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + step * i);
    return grid;
}

RhoSelection select_rho(const DesignData& design, const SplineSystem& system,
                        const std::vector<double>& rho_grid) {
    if (rho_grid.empty()) throw std::invalid_argument("empty rho grid");
    for (double rho : rho_grid)
        if (!(rho > 0.0)) throw std::invalid_argument("rho grid entries must be positive");

    const PenalizedSystem sys = normal_equations(design);
    const double count = sys.count;
    const double p = static_cast<double>(design.Xc.cols());
    const double response_scale = design.Yc.squaredNorm();
    constexpr double inf = std::numeric_limits<double>::infinity();

    RhoSelection sel;
    sel.grid = rho_grid;
    sel.scores.assign(rho_grid.size(), inf);

    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        const double rho = rho_grid[i];
        const PenalizedSolver solver(sys.gram, system.penalty(), rho);
        const Eigen::VectorXd beta = solver.solve(sys.rhs);
        const double tr_h = solver.solve(sys.gram).trace();
        const double rss = (design.Yc - design.Xc * beta / p).squaredNorm();
        // Degeneracy guards: an effective dimension at (or beyond) the sample
        // size, or an exactly interpolating fit, make the criterion
        // meaningless; such points never win.
        if (tr_h >= count || rss <= 1e-12 * response_scale) continue;
        sel.scores[i] = count * rss / ((count - tr_h) * (count - tr_h));
    }

    std::size_t best = rho_grid.size();
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        if (sel.scores[i] == inf) continue;
        // Non-strict comparison walks ties toward the larger rho.
        if (best == rho_grid.size() || sel.scores[i] <= sel.scores[best]) best = i;
    }
    if (best == rho_grid.size())
        throw std::runtime_error(
            "degenerate fit at every grid point: effective dimension reaches the sample size");
    sel.rho = rho_grid[best];
    return sel;
}

FitResult fit_gcv(const DesignData& design, const std::shared_ptr<const SplineSystem>& system,
                  const std::vector<double>& rho_grid) {
    if (!system) throw std::invalid_argument("null spline system");
    RhoSelection sel = select_rho(design, *system, rho_grid);
    FitResult result = fit(design, system, sel.rho);
    result.rho_grid = std::move(sel.grid);
    result.scores = std::move(sel.scores);
    return result;
}

double gamma_seminorm(const Eigen::VectorXd& u, const EmpiricalCovariance& cov) {
    if (u.size() != cov.gamma_hat.rows())
        throw std::invalid_argument("vector length does not match the covariance");
    const double quad = u.dot(cov.gamma_hat * u) / static_cast<double>(u.size());
    return std::sqrt(std::max(quad, 0.0));
}

TraceCheck trace_inequality_check(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& penalty,
                                  double rho) {
    TraceCheck check;
    if (gram.norm() == 0.0) {
        // M = 0 regardless of the penalty; avoids factorizing a singular system.
        check.holds = true;
        return check;
    }
    const PenalizedSolver solver(gram, penalty, rho);
    const Eigen::MatrixXd m = solver.solve(gram);
    check.tr_m = m.trace();
    check.tr_m2 = m.cwiseProduct(m.transpose()).sum();
    check.holds = check.tr_m2 <= check.tr_m + kTraceSlack;
    return check;
}

TraceCheck trace_inequality_check(const DesignData& design, const SplineSystem& system,
                                  double rho) {
    const PenalizedSystem sys = normal_equations(design);
    return trace_inequality_check(sys.gram, system.penalty(), rho);
}

std::vector<EigenDecayRow> eigen_decay_diagnostic(const EmpiricalCovariance& cov,
                                                  double decay_exponent,
                                                  double bound_constant) {
    const Eigen::Index p = cov.eigenvalues.size();
    std::vector<EigenDecayRow> rows;
    rows.reserve(static_cast<std::size_t>(p > 0 ? p - 1 : 0));
    // Suffix sums of the descending spectrum: tail(r) = sum_{j > r} lambda_j.
    double tail = 0.0;
    std::vector<double> tails(static_cast<std::size_t>(p) + 1, 0.0);
    for (Eigen::Index j = p - 1; j >= 0; --j) {
        tail += cov.eigenvalues[j];
        tails[static_cast<std::size_t>(j)] = tail;
    }
    for (int r = 1; r < p; ++r) {
        EigenDecayRow row;
        row.r = r;
        row.tail = tails[static_cast<std::size_t>(r)];
        row.bound = bound_constant * std::pow(static_cast<double>(r), -2.0 * decay_exponent);
        row.satisfied = row.tail <= row.bound;
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd hat_matrix(const DesignData& design, const Eigen::MatrixXd& penalty,
                           double rho) {
    const PenalizedSystem sys = normal_equations(design);
    const PenalizedSolver solver(sys.gram, penalty, rho);
    const double p = static_cast<double>(design.Xc.cols());
    return design.Xc * solver.solve(design.Xc.transpose()) / (sys.count * p);
}

}  // namespace sflr
