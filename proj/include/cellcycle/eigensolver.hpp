#pragma once

#include "cellcycle/transport.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cellcycle {

struct EigenOptions {
    double tol = 1e-9;
    std::size_t max_periods = 2000;
    std::size_t consecutive = 3;       // sub-tolerance periods required
    bool strict = false;               // non-convergence throws ConvergenceError
    bool keep_eigenfunction = true;    // store N(t, x) over one period
    std::optional<std::vector<double>> initial;  // warm start, phase-major density
    TransportOptions transport;
};

struct EigenResult {
    double lambda = 0.0;
    std::vector<double> growth_factor_history;
    std::size_t iterations = 0;
    bool converged = false;
    double residual = 0.0;             // last relative change of log growth factor
    double periodicity_residual = 0.0; // L1 distance between consecutive period states
    double spill_fraction = 0.0;
    std::vector<std::string> warnings;
    GridSpec grid;
    std::size_t phases = 0;

    /// Unit-mass state at a period boundary after the last iteration.
    std::vector<double> state;

    /// Samples of N at t = m * dt for m = 0 .. steps-1, each phase-major with
    /// unit mass at m = 0; empty unless keep_eigenfunction.
    std::vector<double> eigenfunction;

    std::span<const double> sample(std::size_t m) const;

    /// CSV with columns iteration,growth_factor.
    std::string history_csv() const;
};

EigenResult floquet_eigenvalue(const PeriodMap& map, const PhaseModel& model,
                               const EigenOptions& options = {});
EigenResult floquet_eigenvalue(const PhaseModel& model, const GridSpec& grid,
                               const EigenOptions& options = {});

/// floquet_eigenvalue of perron_averaged(model), with quadrature matched to the grid.
EigenResult perron_eigenvalue(const PhaseModel& model, const GridSpec& grid,
                              const EigenOptions& options = {});

/// floquet_eigenvalue of mixed_averaged(model), with quadrature matched to the grid.
EigenResult lambda_g(const PhaseModel& model, const GridSpec& grid,
                     const EigenOptions& options = {});

enum class Pipeline { Floquet, Perron, Mixed };

EigenResult eigenvalue(Pipeline pipeline, const PhaseModel& model, const GridSpec& grid,
                       const EigenOptions& options = {});

/// Density on `fine` obtained by splitting every cell of `coarse` in two,
/// for grids whose step halves; cells past the coarse extent are zero.
std::vector<double> prolongate(std::span<const double> density, std::size_t phases,
                               const GridSpec& coarse, const GridSpec& fine);

struct ExtrapolatedEigenvalue {
    double lambda = 0.0;  // 2 * fine - coarse
    EigenResult coarse;
    EigenResult fine;
};

/// First-order extrapolation from grid_for(model) at options.scale and twice
/// that scale. The fine solve is warm-started from the coarse eigenvector.
ExtrapolatedEigenvalue extrapolated_eigenvalue(Pipeline pipeline, const PhaseModel& model,
                                               const GridOptions& grid = {},
                                               EigenOptions options = {});

/// Constant cell-cycle model with d_i constant and K_i = psi_i chi_[a_i, inf).
struct ConstantCycle {
    std::vector<double> psi;
    std::vector<double> thresholds;
    std::vector<double> deaths;

    PhaseModel model(double period = 1.0) const;
};

/// Root of 2 prod_i psi_i exp(-(lambda + d_i) a_i) / (lambda + d_i + psi_i) = 1
/// by bisection to `tol`.
double characteristic_equation_root(const ConstantCycle& cycle, double tol = 1e-12);

}  // namespace cellcycle
