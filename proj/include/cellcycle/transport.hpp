#pragma once

#include "cellcycle/phase_model.hpp"

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cellcycle {

/// Uniform age/time grid with unit progression speed: the age step equals
/// the time step, so one step advects every cohort by exactly one cell.
struct GridSpec {
    std::size_t n_age = 0;
    std::size_t steps_per_period = 0;
    double period = 1.0;

    /// dt == dx == T / steps_per_period
    double step() const { return period / static_cast<double>(steps_per_period); }
    double age_max() const { return static_cast<double>(n_age) * step(); }

    static GridSpec make(std::size_t n_age, std::size_t steps_per_period, double period);

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct GridOptions {
    double cells_per_unit = 1024.0;  // per unit of age (and of time)
    double scale = 1.0;              // multiplies both resolutions
    double margin = 4.0;             // A_max >= margin * max threshold
    double tail_decay = 20.0;        // decay lengths kept past the largest threshold
};

/// Picks A_max so that it exceeds margin * max threshold and leaves
/// `tail_decay` decay lengths of the slowest asymptotic loss rate past the
/// largest threshold.
GridSpec grid_for(const PhaseModel& model, const GridOptions& options = {});
GridSpec grid_for(std::initializer_list<const PhaseModel*> models, const GridOptions& options = {});

struct TransportOptions {
    double margin = 4.0;
    double spill_tolerance = 1e-8;  // spilled mass per period / weighted mass
    bool strict = false;
};

/// The discrete one-step operators of a model on a grid, tabulated over one
/// period. Coefficients are sampled at the step's midpoint time and averaged
/// exactly over each age cell.
///
/// Step m maps densities n (phase-major, n[i * cells + k]) to
///   out_i[k + 1] = exp(-dt * loss_i(m, k)) * n_i[k],
///   out_i[0]     = sum_j sum_k dt * B_{j->i}(m, k) * n_j[k],
/// discarding what leaves the last cell. Every entry of the operator is
/// nonnegative.
class PeriodMap {
public:
    PeriodMap(const PhaseModel& model, const GridSpec& grid, const TransportOptions& options = {});

    std::size_t phases() const { return phases_; }
    std::size_t cells() const { return cells_; }
    std::size_t steps() const { return steps_; }
    std::size_t size() const { return phases_ * cells_; }
    double dt() const { return dt_; }
    const GridSpec& grid() const { return grid_; }
    const TransportOptions& options() const { return options_; }

    /// Applies step m (0 <= m < steps). Adds the mass that left the grid to
    /// `spill` and returns the mass of `in`.
    double step(std::size_t m, std::span<const double> in, std::span<double> out,
                double& spill) const;

    /// Exact transpose of step(m): out = S_m^T in.
    void adjoint_step(std::size_t m, std::span<const double> in, std::span<double> out) const;

    /// Cell-averaged loss rate and birth rate samples, for the delay solver
    /// and the matrix oracle.
    double loss_rate(std::size_t m, std::size_t phase, std::size_t cell) const;
    double birth_rate(std::size_t m, std::size_t source, std::size_t target,
                      std::size_t cell) const;

    /// h * sum(density) over every phase.
    double mass(std::span<const double> density) const;

private:
    struct Run {
        std::size_t begin;
        std::size_t end;
    };
    struct PhaseLayout {
        std::vector<Run> runs;
        std::vector<std::size_t> targets;
        std::vector<std::size_t> run_of_cell;
        std::size_t data_offset;  // into per-step tables
    };

    std::size_t phases_ = 0;
    std::size_t cells_ = 0;
    std::size_t steps_ = 0;
    double dt_ = 0.0;
    GridSpec grid_;
    TransportOptions options_;
    std::vector<PhaseLayout> layout_;
    std::size_t runs_total_ = 0;
    std::size_t weights_per_step_ = 0;
    // [m][run]: loss rate and factor; [m][weight slot]: dt * birth rate
    std::vector<double> loss_rate_;
    std::vector<double> loss_factor_;
    std::vector<double> birth_weight_;
    std::vector<std::size_t> weight_offset_;  // per run, into a step's weight block
};

/// Per-phase densities on the age grid at a given step.
struct PopulationState {
    std::size_t phases = 0;
    std::size_t cells = 0;
    std::vector<double> density;  // phase-major
    std::size_t step_index = 0;   // steps taken since t = 0
    double time = 0.0;
    double total_mass = 0.0;      // h * sum(density)
    double spill = 0.0;           // mass discarded past A_max so far

    std::span<double> phase(std::size_t i) { return {density.data() + i * cells, cells}; }
    std::span<const double> phase(std::size_t i) const
    {
        return {density.data() + i * cells, cells};
    }
};

/// Uniform density on [0, max threshold] in every phase (first cell when
/// the model has no threshold), normalized to unit total mass.
PopulationState initial_state(const PhaseModel& model, const GridSpec& grid);

PopulationState make_state(const GridSpec& grid, std::size_t phases, std::vector<double> density);

PopulationState step(const PopulationState& state, const PeriodMap& map);
PopulationState step(const PopulationState& state, const PhaseModel& model, const GridSpec& grid);

struct PeriodOutcome {
    PopulationState state;  // renormalized to unit mass
    double growth_factor = 0.0;
    double spill_fraction = 0.0;
    std::vector<std::string> warnings;
};

/// Applies one period of steps to a unit-mass state.
PeriodOutcome evolve_period(const PopulationState& state, const PeriodMap& map);
PeriodOutcome evolve_period(const PopulationState& state, const PhaseModel& model,
                            const GridSpec& grid);

struct TrajectoryRow {
    std::size_t period_index;
    double growth_factor;
    double weighted_mass;
    double spill;
};

/// CSV with columns period_index,growth_factor,weighted_mass,spill.
std::string trajectory_csv(std::span<const TrajectoryRow> rows);

struct DelayTrace {
    std::vector<double> boundary;  // n(t_m, 0) for m = 0 .. horizon * steps
    double dt = 0.0;
};

/// Boundary trace of a one-phase model from the delay form
///   b(t) = int B(t, x) exp(-int_0^x loss(t - x + s, s) ds) b(t - x) dx,
/// with the survival exponent summed by the same rectangle rule as the
/// transport step, started from `initial`.
DelayTrace solve_delay_equation(const PhaseModel& model, const GridSpec& grid,
                                const PopulationState& initial, std::size_t horizon_periods);

}  // namespace cellcycle
