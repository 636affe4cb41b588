#include "cellcycle/eigensolver.hpp"

#include "cellcycle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cellcycle {

std::span<const double> EigenResult::sample(std::size_t m) const
{
    const std::size_t n = phases * grid.n_age;
    if (eigenfunction.empty()) throw ValidationError("eigenfunction samples were not kept");
    if (m >= grid.steps_per_period) throw ValidationError("eigenfunction sample index out of range");
    return {eigenfunction.data() + m * n, n};
}

std::string EigenResult::history_csv() const
{
    std::ostringstream os;
    os.precision(17);
    os << "iteration,growth_factor\n";
    for (std::size_t k = 0; k < growth_factor_history.size(); ++k)
        os << k + 1 << ',' << growth_factor_history[k] << '\n';
    return os.str();
}

EigenResult floquet_eigenvalue(const PeriodMap& map, const PhaseModel& model,
                               const EigenOptions& options)
{
    if (!(options.tol > 0.0)) throw ValidationError("eigenvalue tolerance must be positive");
    if (options.max_periods < 10) throw ValidationError("max_periods must be at least 10");
    const GridSpec& grid = map.grid();

    PopulationState state;
    if (options.initial) {
        state = make_state(grid, map.phases(), *options.initial);
        if (!(state.total_mass > 0.0)) throw ValidationError("initial density has zero mass");
        for (double& v : state.density) v /= state.total_mass;
        state.total_mass = 1.0;
    } else {
        state = initial_state(model, grid);
    }

    EigenResult result;
    result.grid = grid;
    result.phases = map.phases();
    result.warnings = model.warnings();
    result.growth_factor_history.reserve(64);

    double previous_log = 0.0;
    std::size_t streak = 0;
    std::vector<std::string> spill_warnings;
    for (std::size_t k = 0; k < options.max_periods; ++k) {
        PeriodOutcome out = evolve_period(state, map);
        const double log_g = std::log(out.growth_factor);
        result.growth_factor_history.push_back(out.growth_factor);
        result.spill_fraction = out.spill_fraction;
        spill_warnings = std::move(out.warnings);
        double distance = 0.0;
        for (std::size_t j = 0; j < state.density.size(); ++j)
            distance += std::abs(out.state.density[j] - state.density[j]);
        result.periodicity_residual = map.dt() * distance;
        state = std::move(out.state);
        result.iterations = k + 1;
        if (k > 0) {
            result.residual = std::abs(log_g - previous_log) / std::max(1.0, std::abs(log_g));
            streak = result.residual <= options.tol ? streak + 1 : 0;
        }
        previous_log = log_g;
        if (streak >= options.consecutive) {
            result.converged = true;
            break;
        }
    }
    result.lambda = previous_log / grid.period;
    result.warnings.insert(result.warnings.end(), spill_warnings.begin(), spill_warnings.end());
    if (!result.converged) {
        std::ostringstream os;
        os << "power iteration did not converge in " << options.max_periods
           << " periods (last relative change " << result.residual << ")";
        if (options.strict) throw ConvergenceError(os.str());
        result.warnings.push_back(os.str());
    }

    if (options.keep_eigenfunction) {
        const std::size_t n = map.size();
        result.eigenfunction.resize(grid.steps_per_period * n);
        std::vector<double> a = state.density;
        std::vector<double> b(n, 0.0);
        double spill = 0.0;
        for (std::size_t m = 0; m < grid.steps_per_period; ++m) {
            std::copy(a.begin(), a.end(), result.eigenfunction.begin() + static_cast<std::ptrdiff_t>(m * n));
            map.step(m, a, b, spill);
            std::swap(a, b);
        }
    }
    result.state = std::move(state.density);
    return result;
}

EigenResult floquet_eigenvalue(const PhaseModel& model, const GridSpec& grid,
                               const EigenOptions& options)
{
    return floquet_eigenvalue(PeriodMap(model, grid, options.transport), model, options);
}

EigenResult perron_eigenvalue(const PhaseModel& model, const GridSpec& grid,
                              const EigenOptions& options)
{
    return floquet_eigenvalue(perron_averaged(model, static_cast<int>(grid.steps_per_period)), grid,
                              options);
}

EigenResult lambda_g(const PhaseModel& model, const GridSpec& grid, const EigenOptions& options)
{
    return floquet_eigenvalue(mixed_averaged(model, static_cast<int>(grid.steps_per_period)), grid,
                              options);
}

EigenResult eigenvalue(Pipeline pipeline, const PhaseModel& model, const GridSpec& grid,
                       const EigenOptions& options)
{
    switch (pipeline) {
    case Pipeline::Floquet: return floquet_eigenvalue(model, grid, options);
    case Pipeline::Perron: return perron_eigenvalue(model, grid, options);
    case Pipeline::Mixed: return lambda_g(model, grid, options);
    }
    throw ValidationError("unknown eigenvalue pipeline");
}

std::vector<double> prolongate(std::span<const double> density, std::size_t phases,
                               const GridSpec& coarse, const GridSpec& fine)
{
    if (fine.steps_per_period != 2 * coarse.steps_per_period || fine.period != coarse.period)
        throw ValidationError("prolongation needs a grid with half the step");
    if (density.size() != phases * coarse.n_age)
        throw ValidationError("density does not live on the coarse grid");
    std::vector<double> out(phases * fine.n_age, 0.0);
    for (std::size_t i = 0; i < phases; ++i) {
        for (std::size_t k = 0; k < fine.n_age && k / 2 < coarse.n_age; ++k)
            out[i * fine.n_age + k] = density[i * coarse.n_age + k / 2];
    }
    return out;
}

ExtrapolatedEigenvalue extrapolated_eigenvalue(Pipeline pipeline, const PhaseModel& model,
                                               const GridOptions& grid, EigenOptions options)
{
    GridOptions fine_options = grid;
    fine_options.scale *= 2.0;
    const GridSpec coarse_grid = grid_for(model, grid);
    const GridSpec fine_grid = grid_for(model, fine_options);

    ExtrapolatedEigenvalue out;
    out.coarse = eigenvalue(pipeline, model, coarse_grid, options);
    options.initial = prolongate(out.coarse.state, out.coarse.phases, coarse_grid, fine_grid);
    out.fine = eigenvalue(pipeline, model, fine_grid, options);
    out.lambda = 2.0 * out.fine.lambda - out.coarse.lambda;
    return out;
}

PhaseModel ConstantCycle::model(double period) const
{
    const std::size_t phases = psi.size();
    if (phases == 0 || thresholds.size() != phases || deaths.size() != phases)
        throw ValidationError("constant cycle needs psi, thresholds and deaths of equal length");
    std::vector<Coefficient> d, k;
    for (std::size_t i = 0; i < phases; ++i) {
        if (!(psi[i] > 0.0)) throw ValidationError("constant cycle needs psi > 0");
        d.push_back(Coefficient::constant(deaths[i]));
        k.push_back(thresholds[i] > 0.0
                        ? Coefficient::product({Coefficient::constant(psi[i]),
                                                Coefficient::age_indicator(thresholds[i])})
                        : Coefficient::constant(psi[i]));
    }
    return PhaseModel::cell_cycle(period, std::move(d), std::move(k));
}

double characteristic_equation_root(const ConstantCycle& cycle, double tol)
{
    const std::size_t phases = cycle.psi.size();
    if (phases == 0 || cycle.thresholds.size() != phases || cycle.deaths.size() != phases)
        throw ValidationError("constant cycle needs psi, thresholds and deaths of equal length");
    double floor_rate = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phases; ++i) {
        if (!(cycle.psi[i] > 0.0)) throw ValidationError("characteristic equation needs psi > 0");
        if (cycle.thresholds[i] < 0.0 || cycle.deaths[i] < 0.0)
            throw ValidationError("thresholds and deaths must be nonnegative");
        floor_rate = std::min(floor_rate, cycle.deaths[i] + cycle.psi[i]);
    }
    // log of the left side minus log 1; strictly decreasing on (-floor_rate, inf)
    auto f = [&](double lambda) {
        double acc = std::log(2.0);
        for (std::size_t i = 0; i < phases; ++i) {
            const double r = lambda + cycle.deaths[i];
            acc += std::log(cycle.psi[i]) - r * cycle.thresholds[i] - std::log(r + cycle.psi[i]);
        }
        return acc;
    };

    double lo = -floor_rate;
    double hi = std::max(1.0, std::abs(lo));
    for (int k = 0; f(hi) >= 0.0; ++k) {
        if (k > 200) {
            std::ostringstream os;
            os << "characteristic equation: no upper bracket found up to " << hi;
            throw SolverError(os.str());
        }
        lo = hi;
        hi *= 2.0;
    }
    for (int k = 0; k < 400 && hi - lo > tol; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace cellcycle
