#include "cellcycle/dual_verifier.hpp"

#include "cellcycle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cellcycle {

namespace {

double l1(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// One backward sweep over a period: samples[m] = c S_m^T samples[m + 1],
// with samples[steps] = terminal. Returns phi_0.
void backward_period(const PeriodMap& map, double compensation, std::span<const double> terminal,
                     std::vector<double>& samples)
{
    const std::size_t n = map.size();
    const std::size_t steps = map.steps();
    std::vector<double> next(terminal.begin(), terminal.end());
    for (std::size_t m = steps; m-- > 0;) {
        std::span<double> cur(samples.data() + m * n, n);
        map.adjoint_step(m, next, cur);
        for (double& v : cur) v *= compensation;
        std::copy(cur.begin(), cur.end(), next.begin());
    }
}

}  // namespace

std::span<const double> DualEigenfunction::sample(std::size_t m) const
{
    const std::size_t n = phases * grid.n_age;
    if (m >= grid.steps_per_period) throw ValidationError("dual sample index out of range");
    return {samples.data() + m * n, n};
}

DualEigenfunction adjoint_eigenfunction(const PhaseModel& model, const GridSpec& grid,
                                        const EigenResult& forward, const DualOptions& options)
{
    if (!(forward.grid == grid)) throw ValidationError("forward eigenpair lives on another grid");
    if (!forward.converged)
        throw ConvergenceError("adjoint eigenfunction needs a converged forward eigenvalue");
    const PeriodMap map(model, grid);
    const std::size_t n = map.size();
    const std::size_t steps = map.steps();
    const double h = map.dt();

    DualEigenfunction dual;
    dual.lambda = forward.lambda;
    dual.grid = grid;
    dual.phases = map.phases();
    dual.samples.assign(steps * n, 0.0);

    std::vector<double> terminal(n, 1.0 / static_cast<double>(n));
    double previous_log = 0.0;
    std::size_t streak = 0;
    double log_gamma = 0.0;
    const double compensation = std::exp(-forward.lambda * h);
    for (std::size_t k = 0; k < options.max_periods; ++k) {
        backward_period(map, compensation, terminal, dual.samples);
        std::span<const double> phi0(dual.samples.data(), n);
        const double norm = l1(phi0);
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw SolverError("adjoint iteration lost its mass");
        log_gamma = std::log(norm);  // terminal has unit l1 norm
        double change = 0.0;
        for (std::size_t j = 0; j < n; ++j) change += std::abs(phi0[j] / norm - terminal[j]);
        for (std::size_t j = 0; j < n; ++j) terminal[j] = phi0[j] / norm;
        dual.iterations = k + 1;
        const bool steady = k > 0 && std::abs(log_gamma - previous_log) <= options.tol &&
                            change <= options.tol;
        streak = steady ? streak + 1 : 0;
        previous_log = log_gamma;
        if (streak >= 3) {
            dual.converged = true;
            break;
        }
    }
    dual.adjoint_lambda = forward.lambda + log_gamma / grid.period;
    if (!dual.converged) {
        std::ostringstream os;
        os << "adjoint power iteration did not converge in " << options.max_periods << " periods";
        if (options.strict) throw ConvergenceError(os.str());
    }

    // Final sweep compensated by the adjoint's own rate so the stored chain
    // closes on itself over the period.
    backward_period(map, std::exp(-dual.adjoint_lambda * h), terminal, dual.samples);

    const double pairing = h * dot(forward.sample(0), dual.sample(0));
    if (!(pairing > 0.0)) throw SolverError("forward and adjoint eigenfunctions are orthogonal");
    for (double& v : dual.samples) v /= pairing;
    const auto low = std::min_element(dual.samples.begin(), dual.samples.end());
    if (!(*low > 0.0)) {
        const auto idx = static_cast<std::size_t>(low - dual.samples.begin());
        std::ostringstream os;
        os << "adjoint eigenfunction is not positive at step " << idx / n << ", phase "
           << (idx % n) / grid.n_age << ", cell " << idx % grid.n_age;
        throw SolverError(os.str());
    }
    return dual;
}

ResidualReport check_conservation(const PhaseModel& model, const GridSpec& grid, double lambda,
                                  const PopulationState& initial, const DualEigenfunction& phi,
                                  std::size_t periods, double tolerance)
{
    if (!(phi.grid == grid)) throw ValidationError("dual eigenfunction lives on another grid");
    if (initial.step_index % grid.steps_per_period != 0)
        throw ValidationError("conservation check starts at a period boundary");
    const PeriodMap map(model, grid);
    const double h = map.dt();
    const auto phi0 = phi.sample(0);

    ResidualReport report;
    report.check = "conservation";
    report.tolerance = tolerance;
    report.max_violation = 0.0;

    PopulationState state = initial;
    const double mass = state.total_mass;
    if (!(mass > 0.0)) throw ValidationError("initial density has zero mass");
    for (double& v : state.density) v /= mass;
    state.total_mass = 1.0;

    double log_scale = std::log(mass);  // log of the factor removed by normalization
    double previous = h * dot(phi0, state.density) * mass;
    for (std::size_t k = 1; k <= periods; ++k) {
        PeriodOutcome out = evolve_period(state, map);
        log_scale += std::log(out.growth_factor) - lambda * grid.period;
        state = std::move(out.state);
        const double w = h * dot(phi0, state.density) * std::exp(log_scale);
        const double drift = std::abs(w - previous) / previous;
        report.integrated_violation += drift;
        if (drift > report.max_violation) {
            report.max_violation = drift;
            report.step = k * grid.steps_per_period;
        }
        previous = w;
        for (auto& warning : out.warnings) report.warnings.push_back(std::move(warning));
    }
    report.pass = report.max_violation <= tolerance;
    return report;
}

ResidualReport check_subeigen_inequality(const PhaseModel& model, const GridSpec& grid, double mu,
                                         std::span<const double> phi, double tolerance)
{
    const PeriodMap map(model, grid);
    const std::size_t n = map.size();
    const std::size_t steps = map.steps();
    const double h = map.dt();
    if (phi.size() != steps * n) throw ValidationError("trial function does not cover the period grid");
    for (double v : phi)
        if (!(v > 0.0)) throw ValidationError("trial subeigenfunction must be positive");

    ResidualReport report;
    report.check = "subeigen";
    report.tolerance = tolerance;
    report.max_violation = -std::numeric_limits<double>::infinity();
    const double decay = std::exp(-mu * h);
    std::vector<double> image(n);
    for (std::size_t m = 0; m < steps; ++m) {
        const std::size_t next = (m + 1) % steps;
        map.adjoint_step(m, phi.subspan(next * n, n), image);
        const double* cur = phi.data() + m * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double violation = -(1.0 - decay * image[j] / cur[j]) / h;
            if (violation > report.max_violation) {
                report.max_violation = violation;
                report.step = m;
                report.phase = j / grid.n_age;
                report.cell = j % grid.n_age;
            }
            if (violation > 0.0) report.integrated_violation += violation * h * h;
        }
    }
    report.pass = report.max_violation <= tolerance;
    return report;
}

ResidualReport check_subeigen_inequality(const PhaseModel& model, const GridSpec& grid, double mu,
                                         const DualEigenfunction& phi, double tolerance)
{
    if (!(phi.grid == grid)) throw ValidationError("dual eigenfunction lives on another grid");
    return check_subeigen_inequality(model, grid, mu, phi.samples, tolerance);
}

LemmaInputs dual_pair(const PhaseModel& model, const GridSpec& grid, const EigenOptions& eigen,
                      const DualOptions& dual)
{
    EigenOptions options = eigen;
    options.keep_eigenfunction = true;
    LemmaInputs out{floquet_eigenvalue(model, grid, options), {}};
    out.dual = adjoint_eigenfunction(model, grid, out.forward, dual);
    return out;
}

ResidualReport check_lemma_blend(const PhaseModel& m1, const LemmaInputs& p1,
                                 const PhaseModel& m2, const LemmaInputs& p2, double theta,
                                 const GridSpec& grid, double tolerance)
{
    const PhaseModel blended = blend_models(m1, m2, theta);
    const auto& phi1 = p1.dual.samples;
    const auto& phi2 = p2.dual.samples;
    if (phi1.size() != phi2.size()) throw StructuralError("dual eigenfunctions differ in shape");
    std::vector<double> phi(phi1.size());
    for (std::size_t j = 0; j < phi.size(); ++j)
        phi[j] = std::exp(theta * std::log(phi1[j]) + (1.0 - theta) * std::log(phi2[j]));
    const double mu = theta * p1.forward.lambda + (1.0 - theta) * p2.forward.lambda;
    ResidualReport report = check_subeigen_inequality(blended, grid, mu, phi, tolerance);
    report.check = "lemma_blend";
    return report;
}

ResidualReport check_lemma_blend(const PhaseModel& m1, const PhaseModel& m2, double theta,
                                 const GridSpec& grid, double tolerance)
{
    const LemmaInputs p1 = dual_pair(m1, grid);
    const LemmaInputs p2 = dual_pair(m2, grid);
    return check_lemma_blend(m1, p1, m2, p2, theta, grid, tolerance);
}

}  // namespace cellcycle
