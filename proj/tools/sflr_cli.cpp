// Command-line front end for the spatial functional regression experiments:
// configures the case x snr x lattice-size cross, runs the Monte-Carlo
// harness, prints the text tables, and optionally writes report files.

#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sflr/harness.hpp"

namespace {

sflr::RhoGridSpec parse_rho_grid(const std::string& text) {
    sflr::RhoGridSpec spec;
    std::istringstream in(text);
    std::string lo, hi, count;
    if (!std::getline(in, lo, ':') || !std::getline(in, hi, ':') ||
        !std::getline(in, count))
        throw CLI::ValidationError("--rho-grid", "expected min:max:count");
    try {
        spec.lo = std::stod(lo);
        spec.hi = std::stod(hi);
        spec.count = std::stoi(count);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--rho-grid", "expected numeric min:max:count");
    }
    return spec;
}

Eigen::RowVectorXd parse_target(const std::string& text) {
    std::vector<double> coords;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            coords.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--target", "expected comma-separated numbers");
        }
    }
    if (coords.empty()) throw CLI::ValidationError("--target", "no coordinates given");
    Eigen::RowVectorXd target(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i)
        target[static_cast<Eigen::Index>(i)] = coords[i];
    return target;
}

void print_failure_ledger(const sflr::ExperimentReport& report) {
    std::fprintf(stderr, "failure ledger:\n");
    for (const auto& cell : report.cells) {
        if (cell.failures == 0) continue;
        std::string first;
        for (const auto& rec : cell.records)
            if (!rec.ok) {
                first = rec.message;
                break;
            }
        std::fprintf(stderr,
                     "  case %s snr %s n=%d: %d/%d replications failed%s (first: %s)\n",
                     cell.case_tag.c_str(), sflr::format_double(cell.snr).c_str(), cell.n,
                     cell.failures, cell.failures + cell.reps,
                     cell.aborted ? " [over the 5% budget]" : "", first.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smoothing-spline estimation and kriging prediction experiments "
                 "on lattice-sampled functional data"};

    sflr::ExperimentConfig config;
    std::string rho_grid_text;
    std::string target_text;
    std::string lambda_mode_text = "per-point";
    std::string format_text = "table";

    app.add_option("--n", config.n_list, "Lattice sizes n (sites are the n^d grid)")
        ->capture_default_str();
    app.add_option("--snr", config.snr_list, "Signal-to-noise ratios in (0, 1)")
        ->capture_default_str();
    app.add_option("--case", config.cases, "Slope cases (A and/or B)")
        ->capture_default_str();
    app.add_option("--reps", config.replications, "Monte-Carlo replications per cell")
        ->capture_default_str();
    app.add_option("--p", config.p, "Observation points per curve")
        ->capture_default_str();
    app.add_option("--m", config.m, "Roughness penalty derivative order")
        ->capture_default_str();
    app.add_option("--seed", config.seed, "Master seed for the replication streams")
        ->capture_default_str();
    app.add_option("--rho-grid", rho_grid_text,
                   "Smoothing grid as min:max:count (log-spaced)");
    app.add_option("--target", target_text,
                   "Prediction site coordinates, comma-separated");
    app.add_option("--lambda-mode", lambda_mode_text,
                   "Noise surface draw: per-point or per-replicate")
        ->capture_default_str();
    app.add_option("--out", config.out_dir, "Directory for report files");
    app.add_option("--format", format_text, "Report file format: csv or table")
        ->capture_default_str();
    app.add_flag("--diagnostics", config.diagnostics,
                 "Attach trace-inequality, eigenvalue-decay, and site-separation reports");
    app.add_option("--d", config.d, "Lattice dimension")->capture_default_str();
    app.add_option("--threads", config.threads,
                   "Worker threads (0 = hardware concurrency)")
        ->capture_default_str();
    app.add_option("--quad-points", config.quadrature_points,
                   "Quadrature points for the response integral")
        ->capture_default_str();
    app.add_option("--theta", config.theta,
                   "Mixing-tail exponent for the separation diagnostic")
        ->capture_default_str();
    app.add_flag("--dump-samples", config.dump_samples,
                 "Write one covariate sample CSV per cell (requires --out)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!rho_grid_text.empty()) config.rho_grid = parse_rho_grid(rho_grid_text);
        if (!target_text.empty()) config.target = parse_target(target_text);
        config.lambda_mode = sflr::lambda_mode_from_string(lambda_mode_text);
        const sflr::ReportFormat format = sflr::report_format_from_string(format_text);
        sflr::validate(config);
        if (config.dump_samples && config.out_dir.empty())
            throw std::invalid_argument("--dump-samples needs --out");

        const sflr::ExperimentReport report = sflr::run_experiment(config);
        std::fputs(sflr::report_text(report).c_str(), stdout);

        if (!config.out_dir.empty()) {
            const auto paths = sflr::emit_report(report, format, config.out_dir);
            for (const auto& path : paths) std::printf("wrote %s\n", path.c_str());
        }

        if (!report.ok) {
            print_failure_ledger(report);
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
