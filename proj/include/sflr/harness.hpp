#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sflr/estimate.hpp"
#include "sflr/krige.hpp"
#include "sflr/simulate.hpp"

namespace sflr {

/// Log-spaced smoothing-parameter grid specification.
struct RhoGridSpec {
    double lo = 1e-8;
    double hi = 1e2;
    int count = 25;

    std::vector<double> make() const { return log_rho_grid(lo, hi, count); }
};

/// Full experiment description: the cross of cases x snr levels x lattice
/// sizes, each run for `replications` Monte-Carlo draws.
struct ExperimentConfig {
    int d = 2;
    std::vector<int> n_list{10, 15, 20, 25};
    std::vector<double> snr_list{0.05, 0.10};
    std::vector<std::string> cases{"A", "B"};
    int replications = 100;
    int p = 101;
    int m = 2;
    RhoGridSpec rho_grid;
    Eigen::RowVectorXd target;  // prediction site, default (13.5, 5)
    std::uint64_t seed = 0;
    LambdaMode lambda_mode = LambdaMode::PerPoint;
    std::string out_dir;
    int threads = 0;  // 0 = hardware concurrency
    int quadrature_points = 1001;
    double theta = 40.0;  // mixing exponent for the separation diagnostic
    bool diagnostics = false;
    bool dump_samples = false;

    ExperimentConfig();
};

void validate(const ExperimentConfig& config);

/// One Monte-Carlo draw: fit on a fresh sample, or the failure that stopped it.
struct ReplicationRecord {
    int rep = 0;
    bool ok = false;
    double estimation = 0.0;  // squared Gamma_hat-seminorm of beta_hat - beta
    double prediction = 0.0;  // squared prediction gap at the target site
    double rho = 0.0;         // selected smoothing parameter
    double trace_slack = 0.0;  // tr M^2 - tr M at the selected rho (diagnostics)
    bool trace_holds = true;
    std::string message;  // failure reason when !ok
};

struct CellDiagnostics {
    SeparationReport separation;
    int trace_checked = 0;
    int trace_violations = 0;
    double max_trace_slack = 0.0;
    /// Smallest C with tail(r) <= C r^{-2m} for all r, first successful draw.
    double decay_constant = 0.0;
};

/// Aggregates for one (case, snr, n) cell.
struct CellSummary {
    std::string case_tag;
    double snr = 0.0;
    int n = 0;
    double estimation_mean = 0.0;
    double estimation_se = 0.0;
    double prediction_mean = 0.0;
    double prediction_se = 0.0;
    int reps = 0;  // successful replications; reps + failures = configured
    int failures = 0;
    bool aborted = false;  // failures exceeded the 5% budget
    std::vector<ReplicationRecord> records;
    std::optional<CellDiagnostics> diagnostics;
};

/// Least-squares slope of log(mean estimation error) against log(n^d).
struct RateRow {
    std::string case_tag;
    double snr = 0.0;
    double slope = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellSummary> cells;
    std::vector<RateRow> rates;
    bool ok = true;  // false when any cell overran its failure budget
};

/// Runs one cell.  (n, snr, case_tag) must appear in the config lists; the
/// cell's position there fixes the replication random streams, so a cell
/// run alone matches the same cell inside the full experiment.
CellSummary run_cell(const ExperimentConfig& config, int n, double snr,
                     const std::string& case_tag);

/// Runs every cell in the config cross, attaching rate rows per (case, snr).
ExperimentReport run_experiment(const ExperimentConfig& config);

enum class ReportFormat { Csv, Table };
ReportFormat report_format_from_string(const std::string& name);

/// One emitted CSV data row.
struct CsvRecord {
    std::string case_tag;
    double snr = 0.0;
    int n = 0;
    std::string metric;  // "estimation" or "prediction"
    double mean = 0.0;
    double se = 0.0;
    int reps = 0;
};

std::vector<CsvRecord> report_rows(const ExperimentReport& report);

/// CSV with header case,snr,n,metric,mean,stderr,reps; numbers are emitted
/// with shortest round-trip formatting.
std::string report_csv(const ExperimentReport& report);
std::vector<CsvRecord> parse_report_csv(const std::string& text);

/// Human-readable tables (estimation block, prediction block, rates,
/// failures, optional diagnostics).
std::string report_text(const ExperimentReport& report);

/// Writes report.csv and/or report.txt into out_dir; returns written paths.
std::vector<std::string> emit_report(const ExperimentReport& report, ReportFormat format,
                                     const std::string& out_dir);

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double value);

}  // namespace sflr
