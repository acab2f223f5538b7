#include "sflr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sflr {

namespace {

constexpr const char* kCsvHeader = "case,snr,n,metric,mean,stderr,reps";

/// Everything one cell's replications share; built once, read-only afterwards.
struct CellContext {
    SiteGrid grid;
    TimeGrid time;
    std::shared_ptr<const SplineSystem> system;
    GaussianSampler xi_sampler;
    GaussianSampler lambda_sampler;
    GaussianSampler noise_sampler;
    Eigen::MatrixXd response_interp;  // quadrature-grid rows of the interpolant
    Eigen::VectorXd slope_grid;       // true slope sampled on the time grid
    KrigingSystem kriging;
    SlopeCase slope;
    NoiseSpec noise;
    std::vector<double> rho_grid;
    LambdaMode lambda_mode = LambdaMode::PerPoint;
    int basis_size = 15;
    int quadrature_points = 1001;
    std::uint64_t seed = 0;
    std::uint64_t stream_base = 0;
    bool diagnostics = false;
};

template <typename T>
std::size_t index_of(const std::vector<T>& values, const T& value, const char* what) {
    const auto it = std::find(values.begin(), values.end(), value);
    if (it == values.end())
        throw std::invalid_argument(std::string("requested ") + what +
                                    " is not part of the experiment configuration");
    return static_cast<std::size_t>(it - values.begin());
}

std::size_t cell_index_of(const ExperimentConfig& config, int n, double snr,
                          const std::string& case_tag) {
    const std::size_t ci = index_of(config.cases, case_tag, "case");
    const std::size_t si = index_of(config.snr_list, snr, "snr");
    const std::size_t ni = index_of(config.n_list, n, "lattice size");
    return (ci * config.snr_list.size() + si) * config.n_list.size() + ni;
}

CellContext make_cell_context(const ExperimentConfig& config, int n, double snr,
                              const std::string& case_tag) {
    CellContext ctx;
    ctx.grid = make_grid(n, config.d);
    ctx.time = TimeGrid::regular(config.p);
    ctx.system = build_spline_system(config.p, config.m);
    const CovarianceSpec site_cov = CovarianceSpec::exponential(3.0);
    const Eigen::MatrixXd sigma = covariance_matrix(site_cov, ctx.grid.sites);
    ctx.xi_sampler = GaussianSampler(sigma);
    ctx.lambda_sampler =
        GaussianSampler(covariance_matrix(CovarianceSpec::constant(0.09), ctx.grid.sites));
    ctx.noise_sampler = GaussianSampler(sigma);
    ctx.response_interp =
        interpolation_matrix(*ctx.system, quadrature_points_grid(config.quadrature_points));
    ctx.slope = slope_case(case_tag);
    ctx.slope_grid.resize(config.p);
    for (int j = 0; j < config.p; ++j)
        ctx.slope_grid[j] = eval_slope(ctx.slope, ctx.time.points[j]);
    ctx.kriging = solve_kriging(ctx.grid, config.target, site_cov);
    ctx.noise = NoiseSpec::from_snr(snr);
    ctx.rho_grid = config.rho_grid.make();
    ctx.lambda_mode = config.lambda_mode;
    ctx.quadrature_points = config.quadrature_points;
    ctx.seed = config.seed;
    ctx.stream_base = static_cast<std::uint64_t>(cell_index_of(config, n, snr, case_tag)) *
                      static_cast<std::uint64_t>(config.replications);
    ctx.diagnostics = config.diagnostics;
    return ctx;
}

ReplicationRecord run_one(const CellContext& ctx, int rep) {
    ReplicationRecord rec;
    rec.rep = rep;
    NormalStream rng(ctx.seed, ctx.stream_base + static_cast<std::uint64_t>(rep));
    try {
        const FunctionalSample x =
            generate_covariates(ctx.grid, ctx.time, ctx.xi_sampler, ctx.lambda_sampler,
                                ctx.lambda_mode, ctx.basis_size, rng);
        const ResponseSample y =
            generate_responses(x, *ctx.system, ctx.slope, ctx.noise, ctx.noise_sampler, rng,
                               ctx.quadrature_points, &ctx.response_interp);
        const DesignData design = center(x, y);
        const FitResult fit = fit_gcv(design, ctx.system, ctx.rho_grid);

        const double count = static_cast<double>(design.Xc.rows());
        const double p = static_cast<double>(design.Xc.cols());
        const Eigen::VectorXd gap = fit.beta_vec - ctx.slope_grid;
        rec.estimation = (design.Xc * gap).squaredNorm() / (count * p * p);

        const Eigen::VectorXd x0 = krige_curve(ctx.kriging, x);
        rec.prediction = predict_pair(fit, ctx.slope, x0).squared_error;
        rec.rho = fit.rho;
        if (ctx.diagnostics) {
            const TraceCheck check = trace_inequality_check(design, *ctx.system, fit.rho);
            rec.trace_slack = check.tr_m2 - check.tr_m;
            rec.trace_holds = check.holds;
        }
        rec.ok = true;
    } catch (const std::exception& err) {
        rec.ok = false;
        rec.message = err.what();
    }
    return rec;
}

void mean_and_se(const std::vector<double>& values, double& mean, double& se) {
    const std::size_t k = values.size();
    if (k == 0) {
        mean = std::numeric_limits<double>::quiet_NaN();
        se = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    mean = sum / static_cast<double>(k);
    if (k < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
}

/// Smallest C with tail(r) <= C r^{-2m} over r = 1..p-1.
double achieved_decay_constant(const EmpiricalCovariance& cov, int m) {
    double worst = 0.0;
    for (const EigenDecayRow& row : eigen_decay_diagnostic(cov, static_cast<double>(m), 1.0))
        worst = std::max(worst, row.tail * std::pow(static_cast<double>(row.r),
                                                    2.0 * static_cast<double>(m)));
    return worst;
}

std::string sample_dump_path(const std::string& out_dir, const CellSummary& cell) {
    std::ostringstream name;
    name << "sample_case" << cell.case_tag << "_snr" << format_double(cell.snr) << "_n"
         << cell.n << ".csv";
    return (std::filesystem::path(out_dir) / name.str()).string();
}

double rate_slope(const std::vector<double>& log_size, const std::vector<double>& log_err) {
    const double k = static_cast<double>(log_size.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < log_size.size(); ++i) {
        mx += log_size[i];
        my += log_err[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_size.size(); ++i) {
        sxx += (log_size[i] - mx) * (log_size[i] - mx);
        sxy += (log_size[i] - mx) * (log_err[i] - my);
    }
    return sxy / sxx;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
    target.resize(2);
    target << 13.5, 5.0;
}

void validate(const ExperimentConfig& config) {
    if (config.d < 1) throw std::invalid_argument("lattice dimension must be at least 1");
    if (config.n_list.empty() || config.snr_list.empty() || config.cases.empty())
        throw std::invalid_argument("experiment lists must be nonempty");
    for (int n : config.n_list)
        if (n < 2) throw std::invalid_argument("lattice size must be at least 2");
    for (double snr : config.snr_list)
        if (!(snr > 0.0) || !(snr < 1.0))
            throw std::invalid_argument("snr must lie strictly between 0 and 1");
    for (const std::string& tag : config.cases) slope_case(tag);  // throws on unknown
    if (config.replications < 1)
        throw std::invalid_argument("need at least one replication");
    if (config.p < 30)
        throw std::invalid_argument("need at least 30 observation points per curve");
    if (config.m < 1) throw std::invalid_argument("penalty order must be at least 1");
    if (config.p < 2 * config.m + 2)
        throw std::invalid_argument("grid too small for the penalty order");
    if (!(config.rho_grid.lo > 0.0) || config.rho_grid.hi < config.rho_grid.lo ||
        config.rho_grid.count < 1)
        throw std::invalid_argument("invalid smoothing grid specification");
    if (config.target.size() != config.d)
        throw std::invalid_argument("target site dimension does not match the lattice");
    if (config.quadrature_points < 2)
        throw std::invalid_argument("need at least two quadrature points");
    if (!(config.theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (config.threads < 0) throw std::invalid_argument("thread count cannot be negative");
}

CellSummary run_cell(const ExperimentConfig& config, int n, double snr,
                     const std::string& case_tag) {
    validate(config);
    const CellContext ctx = make_cell_context(config, n, snr, case_tag);
    const int reps = config.replications;

    CellSummary cell;
    cell.case_tag = case_tag;
    cell.snr = snr;
    cell.n = n;
    cell.records.resize(static_cast<std::size_t>(reps));

    int threads = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, reps);
    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= reps) return;
            cell.records[static_cast<std::size_t>(i)] = run_one(ctx, i);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::vector<double> est, pred;
    est.reserve(static_cast<std::size_t>(reps));
    pred.reserve(static_cast<std::size_t>(reps));
    for (const ReplicationRecord& rec : cell.records) {
        if (!rec.ok) {
            ++cell.failures;
            continue;
        }
        est.push_back(rec.estimation);
        pred.push_back(rec.prediction);
    }
    cell.reps = reps - cell.failures;
    mean_and_se(est, cell.estimation_mean, cell.estimation_se);
    mean_and_se(pred, cell.prediction_mean, cell.prediction_se);
    // 5% failure budget; every replication still runs so the survivors are
    // reported alongside the over-budget flag.
    cell.aborted = cell.failures * 20 > reps;

    if (config.diagnostics) {
        CellDiagnostics diag;
        diag.separation = separation_diagnostic(ctx.grid, config.target, config.theta);
        double max_slack = -std::numeric_limits<double>::infinity();
        for (const ReplicationRecord& rec : cell.records) {
            if (!rec.ok) continue;
            ++diag.trace_checked;
            if (!rec.trace_holds) ++diag.trace_violations;
            max_slack = std::max(max_slack, rec.trace_slack);
        }
        diag.max_trace_slack = diag.trace_checked > 0 ? max_slack : 0.0;
        for (const ReplicationRecord& rec : cell.records) {
            if (!rec.ok) continue;
            NormalStream rng(ctx.seed, ctx.stream_base + static_cast<std::uint64_t>(rec.rep));
            const FunctionalSample x =
                generate_covariates(ctx.grid, ctx.time, ctx.xi_sampler, ctx.lambda_sampler,
                                    ctx.lambda_mode, ctx.basis_size, rng);
            const Eigen::MatrixXd gamma =
                x.values.transpose() * x.values /
                (static_cast<double>(x.values.rows()) * static_cast<double>(x.values.cols()));
            diag.decay_constant = achieved_decay_constant(empirical_covariance(gamma), config.m);
            break;
        }
        cell.diagnostics = diag;
    }

    if (config.dump_samples && !config.out_dir.empty()) {
        NormalStream rng(ctx.seed, ctx.stream_base);
        const FunctionalSample x =
            generate_covariates(ctx.grid, ctx.time, ctx.xi_sampler, ctx.lambda_sampler,
                                ctx.lambda_mode, ctx.basis_size, rng);
        std::filesystem::create_directories(config.out_dir);
        write_sample_csv(sample_dump_path(config.out_dir, cell), x);
    }
    return cell;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    validate(config);
    ExperimentReport report;
    report.config = config;
    for (const std::string& case_tag : config.cases)
        for (double snr : config.snr_list)
            for (int n : config.n_list)
                report.cells.push_back(run_cell(config, n, snr, case_tag));

    for (const std::string& case_tag : config.cases) {
        for (double snr : config.snr_list) {
            std::vector<double> log_size, log_err;
            for (const CellSummary& cell : report.cells) {
                if (cell.case_tag != case_tag || cell.snr != snr) continue;
                if (cell.reps == 0 || !(cell.estimation_mean > 0.0)) continue;
                log_size.push_back(config.d * std::log(static_cast<double>(cell.n)));
                log_err.push_back(std::log(cell.estimation_mean));
            }
            if (log_size.size() < 2) continue;
            RateRow row;
            row.case_tag = case_tag;
            row.snr = snr;
            row.slope = rate_slope(log_size, log_err);
            report.rates.push_back(row);
        }
    }
    for (const CellSummary& cell : report.cells)
        if (cell.aborted) report.ok = false;
    return report;
}

ReportFormat report_format_from_string(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "table" || name == "text") return ReportFormat::Table;
    throw std::invalid_argument("unknown report format: " + name);
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<CsvRecord> report_rows(const ExperimentReport& report) {
    std::vector<CsvRecord> rows;
    rows.reserve(report.cells.size() * 2);
    for (const CellSummary& cell : report.cells) {
        CsvRecord row;
        row.case_tag = cell.case_tag;
        row.snr = cell.snr;
        row.n = cell.n;
        row.reps = cell.reps;
        row.metric = "estimation";
        row.mean = cell.estimation_mean;
        row.se = cell.estimation_se;
        rows.push_back(row);
        row.metric = "prediction";
        row.mean = cell.prediction_mean;
        row.se = cell.prediction_se;
        rows.push_back(row);
    }
    return rows;
}

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const CsvRecord& row : report_rows(report)) {
        out << row.case_tag << ',' << format_double(row.snr) << ',' << row.n << ','
            << row.metric << ',' << format_double(row.mean) << ',' << format_double(row.se)
            << ',' << row.reps << '\n';
    }
    return out.str();
}

std::vector<CsvRecord> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty report CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw std::runtime_error("unexpected report CSV header: " + line);

    std::vector<CsvRecord> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 7)
            throw std::runtime_error("malformed report CSV row: " + line);
        CsvRecord row;
        row.case_tag = fields[0];
        row.snr = std::stod(fields[1]);
        row.n = std::stoi(fields[2]);
        row.metric = fields[3];
        row.mean = std::stod(fields[4]);
        row.se = std::stod(fields[5]);
        row.reps = std::stoi(fields[6]);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string format_cell(double mean, double se) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4e (%.1e)", mean, se);
    return buf;
}

void append_metric_table(std::ostringstream& out, const ExperimentReport& report,
                         bool estimation) {
    const auto& config = report.config;
    out << "case  snr    ";
    for (int n : config.n_list) {
        char head[32];
        std::snprintf(head, sizeof(head), "n=%-20d", n);
        out << head;
    }
    out << '\n';
    for (const std::string& case_tag : config.cases) {
        for (double snr : config.snr_list) {
            char lead[32];
            std::snprintf(lead, sizeof(lead), "%-5s %-6s ", case_tag.c_str(),
                          format_double(snr).c_str());
            out << lead;
            for (int n : config.n_list) {
                const CellSummary* found = nullptr;
                for (const CellSummary& cell : report.cells)
                    if (cell.case_tag == case_tag && cell.snr == snr && cell.n == n)
                        found = &cell;
                char body[48];
                if (found == nullptr) {
                    std::snprintf(body, sizeof(body), "%-22s", "-");
                } else {
                    const double mean =
                        estimation ? found->estimation_mean : found->prediction_mean;
                    const double se = estimation ? found->estimation_se : found->prediction_se;
                    std::snprintf(body, sizeof(body), "%-22s", format_cell(mean, se).c_str());
                }
                out << body;
            }
            out << '\n';
        }
    }
}

}  // namespace

std::string report_text(const ExperimentReport& report) {
    std::ostringstream out;
    const auto& config = report.config;

    out << "Estimation error: mean squared seminorm of the slope gap (standard error)\n";
    append_metric_table(out, report, true);
    out << '\n';

    out << "Prediction squared error at site (";
    for (Eigen::Index i = 0; i < config.target.size(); ++i) {
        if (i > 0) out << ", ";
        out << format_double(config.target[i]);
    }
    out << ") (standard error)\n";
    append_metric_table(out, report, false);
    out << '\n';

    if (!report.rates.empty()) {
        out << "Estimation-error decay: least-squares slope of log(error) vs log(sample size)\n";
        out << "case  snr    slope\n";
        for (const RateRow& row : report.rates) {
            char line[64];
            std::snprintf(line, sizeof(line), "%-5s %-6s %+.3f\n", row.case_tag.c_str(),
                          format_double(row.snr).c_str(), row.slope);
            out << line;
        }
        out << '\n';
    }

    bool any_failures = false;
    for (const CellSummary& cell : report.cells) {
        if (cell.failures == 0) continue;
        if (!any_failures) {
            out << "Replication failures:\n";
            any_failures = true;
        }
        out << "  case " << cell.case_tag << " snr " << format_double(cell.snr) << " n "
            << cell.n << ": " << cell.failures << "/" << (cell.reps + cell.failures)
            << " failed" << (cell.aborted ? " (over the 5% budget)" : "");
        for (const ReplicationRecord& rec : cell.records) {
            if (rec.ok) continue;
            out << " — first: " << rec.message;
            break;
        }
        out << '\n';
    }
    if (!any_failures) out << "Replication failures: none\n";

    if (config.diagnostics) {
        out << "\nDiagnostics (theta = " << format_double(config.theta) << ")\n";
        for (const CellSummary& cell : report.cells) {
            if (!cell.diagnostics) continue;
            const CellDiagnostics& diag = *cell.diagnostics;
            char line[256];
            std::snprintf(line, sizeof(line),
                          "  case %s snr %s n=%d: separation %.3f vs threshold %g (%s); "
                          "trace inequality %d/%d held (max slack %.2e); "
                          "eigen tail constant %.3g\n",
                          cell.case_tag.c_str(), format_double(cell.snr).c_str(), cell.n,
                          diag.separation.distance, diag.separation.threshold,
                          diag.separation.satisfied ? "satisfied" : "not satisfied",
                          diag.trace_checked - diag.trace_violations, diag.trace_checked,
                          diag.max_trace_slack, diag.decay_constant);
            out << line;
        }
    }
    return out.str();
}

std::vector<std::string> emit_report(const ExperimentReport& report, ReportFormat format,
                                     const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + out_dir + ": " +
                                 ec.message());
    std::vector<std::string> paths;
    const auto write_file = [&](const std::string& name, const std::string& body) {
        const std::string path = (std::filesystem::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        out << body;
        if (!out) throw std::runtime_error("failed while writing " + path);
        paths.push_back(path);
    };
    if (format == ReportFormat::Csv)
        write_file("report.csv", report_csv(report));
    else
        write_file("report.txt", report_text(report));
    return paths;
}

}  // namespace sflr
