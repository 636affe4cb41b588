#pragma once

#include "cellcycle/dual_verifier.hpp"
#include "cellcycle/model_io.hpp"
#include "cellcycle/presets.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cellcycle {

enum class ExperimentKind { Averaging, Convexity, PhaseSweep, Antiphase };

struct ExperimentConfig {
    PhaseModel model = presets::table3();
    GridOptions grid;
    std::optional<ExperimentKind> experiment;

    // phase sweep
    std::size_t phase_samples = 48;
    bool shift_all = false;

    // convexity: second model, or the first shifted by second_shift * T
    std::optional<PhaseModel> second_model;
    double second_shift = 0.5;
    std::size_t theta_points = 21;
    bool certify = true;

    // antiphase
    double amplitude = 0.8;
    double mitosis_fraction = 1.0 / 24.0;  // a_3 / T
    double gap_total = 20.0 / 24.0;        // a_1 + a_2
    std::size_t antiphase_points = 9;

    std::string output_dir = ".";
    bool strict = false;
    double slack = 1e-4;
    double eigen_tol = 1e-9;
    std::size_t max_periods = 2000;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Fields: model, grid {cells_per_unit, scale, margin, tail_decay},
/// experiment {type, ...}, output {dir}, strict, tolerances {slack,
/// eigen_tol, max_periods}, threads. Unknown fields are rejected.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig preset_config(const std::string& name);

struct AveragingReport {
    double lambda_f = 0.0;
    double lambda_p = 0.0;
    double lambda_g = 0.0;
    bool converged = false;
    bool g_below_f = false;
    bool g_below_p = false;
    std::vector<std::string> warnings;

    bool pass() const { return g_below_f && g_below_p; }
    /// "lambda_F > lambda_P", "lambda_F < lambda_P" or "lambda_F = lambda_P".
    std::string ordering() const;
    Json to_json() const;
};

struct SweepRow {
    double parameter = 0.0;
    double lambda = 0.0;
    double reference = 0.0;  // lambda_u for phase sweeps, the chord for convexity sweeps
    bool converged = false;
};

struct SweepResult {
    std::string parameter_name;
    std::string reference_name;
    std::vector<SweepRow> rows;
    double lambda_u = 0.0;
    double mean_lambda = 0.0;            // over converged rows
    double fraction_at_or_above = 0.0;   // share of converged rows with lambda >= lambda_u
    double worst_margin = 0.0;           // min over rows of reference - lambda (convexity)
    bool inequality_holds = false;
    bool dichotomy_holds = true;
    std::optional<ResidualReport> certificate;
    std::vector<std::string> warnings;

    std::string csv() const;
};

struct AntiphaseRow {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double lambda_f = 0.0;
    double lambda_p = 0.0;
    bool converged = false;
};

struct AntiphaseReport {
    std::vector<AntiphaseRow> rows;
    std::vector<std::string> warnings;

    std::string csv() const;
};

AveragingReport run_averaging_comparison(const ExperimentConfig& config);
SweepResult run_convexity_sweep(const ExperimentConfig& config);
SweepResult run_phase_sweep(const ExperimentConfig& config);
AntiphaseReport run_antiphase_experiment(const ExperimentConfig& config);

/// Plot of a sweep CSV: the lambda column against the first column, with the
/// reference column (lambda_u or chord) drawn dashed. Only rows with
/// converged = 1 are plotted; fewer than two is an error.
std::string render_svg(const std::string& csv);

/// Runs task(i) for i in [0, count) on up to `threads` workers. The first
/// exception, by index, is rethrown after every worker has stopped.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace cellcycle
