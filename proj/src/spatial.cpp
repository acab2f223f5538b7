#include "sflr/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sflr {

namespace {

constexpr long long kMaxSites = 2'000'000;

double pair_covariance(const CovarianceSpec& spec, double distance) {
    switch (spec.kind) {
        case CovarianceKind::Exponential:
            return std::exp(-spec.rate * distance);
        case CovarianceKind::Constant:
            return spec.level;
        case CovarianceKind::Separable:
            return spec.spatial(distance);
    }
    throw std::logic_error("unknown covariance kind");
}

}  // namespace

SiteGrid make_grid(int n, int d) {
    if (n < 1 || d < 1) throw std::invalid_argument("grid requires n >= 1 and d >= 1");
    long long total = 1;
    for (int k = 0; k < d; ++k) {
        total *= n;
        if (total > kMaxSites)
            throw std::invalid_argument("site count n^d exceeds the size budget");
    }
    SiteGrid grid;
    grid.n = n;
    grid.d = d;
    grid.sites.resize(total, d);
    std::vector<int> idx(static_cast<std::size_t>(d), 1);
    for (long long r = 0; r < total; ++r) {
        for (int k = 0; k < d; ++k) grid.sites(r, k) = idx[static_cast<std::size_t>(k)];
        // Odometer with the last coordinate fastest = lexicographic order.
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] <= n) break;
            idx[static_cast<std::size_t>(k)] = 1;
        }
    }
    return grid;
}

CovarianceSpec CovarianceSpec::exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("exponential decay rate must be positive");
    CovarianceSpec spec;
    spec.kind = CovarianceKind::Exponential;
    spec.rate = rate;
    return spec;
}

CovarianceSpec CovarianceSpec::constant(double level) {
    CovarianceSpec spec;
    spec.kind = CovarianceKind::Constant;
    spec.level = level;
    return spec;
}

CovarianceSpec CovarianceSpec::separable(std::function<double(double)> temporal,
                                         std::function<double(double)> spatial) {
    if (!temporal || !spatial)
        throw std::invalid_argument("separable covariance needs both kernels");
    if (std::abs(spatial(0.0) - 1.0) > 1e-12)
        throw std::invalid_argument("separable spatial kernel must satisfy spatial(0) = 1");
    CovarianceSpec spec;
    spec.kind = CovarianceKind::Separable;
    spec.temporal = std::move(temporal);
    spec.spatial = std::move(spatial);
    return spec;
}

Eigen::MatrixXd covariance_matrix(const CovarianceSpec& spec, const Eigen::MatrixXd& sites) {
    const Eigen::Index n = sites.rows();
    if (n == 0) throw std::invalid_argument("covariance over an empty site set");
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        cov(i, i) = pair_covariance(spec, 0.0);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = (sites.row(i) - sites.row(j)).norm();
            const double c = pair_covariance(spec, dist);
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    return cov;
}

Eigen::VectorXd cross_covariance(const CovarianceSpec& spec, const Eigen::MatrixXd& sites,
                                 const Eigen::RowVectorXd& target) {
    if (sites.cols() != target.cols())
        throw std::invalid_argument("target dimension does not match the site set");
    Eigen::VectorXd out(sites.rows());
    for (Eigen::Index i = 0; i < sites.rows(); ++i)
        out[i] = pair_covariance(spec, (sites.row(i) - target).norm());
    return out;
}

double min_site_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() == 0 || b.rows() == 0)
        throw std::invalid_argument("site sets must be nonempty");
    if (a.cols() != b.cols())
        throw std::invalid_argument("site sets have different dimensions");
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            best = std::min(best, (a.row(i) - b.row(j)).norm());
    return best;
}

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) throw std::invalid_argument("covariance must be square");
    if (!cov.isApprox(cov.transpose(), 1e-12))
        throw std::invalid_argument("covariance must be symmetric");
    const Eigen::Index dim = cov.rows();
    if (cov.norm() == 0.0) {
        factor_ = Eigen::MatrixXd::Zero(dim, dim);
        return;
    }
    const double base_jitter = 1e-10 * cov.trace() / static_cast<double>(dim);
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd work = cov;
        if (jitter > 0.0) work.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
            return;
        }
        jitter = (jitter == 0.0) ? base_jitter : jitter * 100.0;
    }
    throw std::runtime_error("covariance not PSD: factorization failed after jitter escalation");
}

Eigen::VectorXd GaussianSampler::sample(NormalStream& rng) const {
    Eigen::VectorXd z(factor_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.next();
    return factor_ * z;
}

Eigen::VectorXd sample_gaussian(const Eigen::MatrixXd& cov, NormalStream& rng) {
    return GaussianSampler(cov).sample(rng);
}

std::vector<double> summability_partial_sums(const CovarianceSpec& spec, int d, int t_max) {
    if (d < 1 || t_max < 1) throw std::invalid_argument("need d >= 1 and t_max >= 1");
    std::vector<double> sums;
    sums.reserve(static_cast<std::size_t>(t_max));
    double acc = 0.0;
    for (int t = 1; t <= t_max; ++t) {
        acc += std::pow(static_cast<double>(t), d - 1) * pair_covariance(spec, t);
        sums.push_back(acc);
    }
    return sums;
}

}  // namespace sflr
