#include "cellcycle/transport.hpp"

#include "cellcycle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cellcycle {

namespace {

// Four independent accumulators let the compiler vectorize the reduction.
double range_sum(const double* p, std::size_t n)
{
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        a0 += p[k];
        a1 += p[k + 1];
        a2 += p[k + 2];
        a3 += p[k + 3];
    }
    for (; k < n; ++k) a0 += p[k];
    return (a0 + a1) + (a2 + a3);
}

// Asymptotic (past every threshold) time-averaged loss rate of a phase.
double asymptotic_loss(const PhaseModel& model, std::size_t phase)
{
    const Coefficient loss = model.loss(phase);
    const double x = model.max_age_threshold() + 1.0;
    const int samples = loss.time_independent() ? 1 : 256;
    double acc = 0.0;
    for (int q = 0; q < samples; ++q)
        acc += loss(midpoint_time(static_cast<std::size_t>(q), static_cast<std::size_t>(samples),
                                  model.period()),
                    x);
    return acc / samples;
}

}  // namespace

GridSpec GridSpec::make(std::size_t n_age, std::size_t steps_per_period, double period)
{
    if (n_age < 2) throw ValidationError("grid needs at least two age cells");
    if (steps_per_period < 2) throw ValidationError("grid needs at least two steps per period");
    if (!(period > 0.0) || !std::isfinite(period))
        throw ValidationError("grid period must be positive and finite");
    return GridSpec{n_age, steps_per_period, period};
}

GridSpec grid_for(const PhaseModel& model, const GridOptions& options)
{
    return grid_for({&model}, options);
}

GridSpec grid_for(std::initializer_list<const PhaseModel*> models, const GridOptions& options)
{
    if (models.size() == 0) throw ValidationError("grid_for needs at least one model");
    const double period = (*models.begin())->period();
    const double resolution = options.cells_per_unit * options.scale;
    if (!(resolution > 0.0)) throw ValidationError("grid resolution must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(resolution * period));
    const double h = period / static_cast<double>(steps);

    double extent = 0.0;
    for (const PhaseModel* m : models) {
        if (m->period() != period) throw StructuralError("models on a shared grid need one period");
        const double a = m->max_age_threshold();
        double slowest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m->phases(); ++i) slowest = std::min(slowest, asymptotic_loss(*m, i));
        // Without asymptotic loss keep a few periods of history.
        const double tail = slowest > 0.0 ? options.tail_decay / slowest : 4.0 * period;
        extent = std::max({extent, options.margin * a * (1.0 + 1e-12) + h, a + tail});
    }
    const auto cells = static_cast<std::size_t>(std::ceil(extent / h));
    return GridSpec::make(std::max<std::size_t>(cells, 2), steps, period);
}

PeriodMap::PeriodMap(const PhaseModel& model, const GridSpec& grid, const TransportOptions& options)
    : phases_(model.phases()),
      cells_(grid.n_age),
      steps_(grid.steps_per_period),
      dt_(grid.step()),
      grid_(grid),
      options_(options)
{
    if (std::abs(grid.period - model.period()) > 1e-12 * model.period())
        throw StructuralError("grid period does not match the model period");
    const double a_max = grid.age_max();
    const double threshold = model.max_age_threshold();
    if (threshold > 0.0 && !(a_max > options.margin * threshold)) {
        std::ostringstream os;
        os << "age truncation " << a_max << " must exceed " << options.margin
           << " x the largest threshold " << threshold;
        throw ValidationError(os.str());
    }

    const double h = dt_;
    std::vector<Coefficient> losses;
    for (std::size_t i = 0; i < phases_; ++i) losses.push_back(model.loss(i));

    // Cell runs on which every coefficient of a phase is constant; cells cut
    // by a threshold are singleton runs averaged over their sub-intervals.
    std::vector<std::vector<std::vector<double>>> cuts(phases_);  // per phase, per run
    layout_.resize(phases_);
    for (std::size_t i = 0; i < phases_; ++i) {
        std::vector<double> bps = losses[i].age_breakpoints();
        for (const auto& [key, c] : model.births()) {
            if (key.source != i) continue;
            layout_[i].targets.push_back(key.target);
            const auto b = c.age_breakpoints();
            bps.insert(bps.end(), b.begin(), b.end());
        }
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

        std::vector<std::size_t> starts{0};
        std::vector<std::pair<std::size_t, double>> interior;
        for (double b : bps) {
            const double r = b / h;
            const double nearest = std::round(r);
            if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)) {
                const auto k = static_cast<std::size_t>(nearest);
                if (k > 0 && k < cells_) starts.push_back(k);
            } else {
                const auto k = static_cast<std::size_t>(std::floor(r));
                if (k < cells_) {
                    interior.emplace_back(k, b);
                    starts.push_back(k);
                    if (k + 1 < cells_) starts.push_back(k + 1);
                }
            }
        }
        std::sort(starts.begin(), starts.end());
        starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
        auto& lay = layout_[i];
        lay.run_of_cell.assign(cells_, 0);
        for (std::size_t r = 0; r < starts.size(); ++r) {
            const std::size_t end = r + 1 < starts.size() ? starts[r + 1] : cells_;
            lay.runs.push_back(Run{starts[r], end});
            std::vector<double> run_cuts;
            for (const auto& [k, b] : interior)
                if (k == starts[r]) run_cuts.push_back(b);
            cuts[i].push_back(std::move(run_cuts));
            for (std::size_t k = starts[r]; k < end; ++k) lay.run_of_cell[k] = r;
        }
        lay.data_offset = runs_total_;
        runs_total_ += lay.runs.size();
    }
    weight_offset_.resize(runs_total_);
    for (std::size_t i = 0; i < phases_; ++i) {
        for (std::size_t r = 0; r < layout_[i].runs.size(); ++r) {
            weight_offset_[layout_[i].data_offset + r] = weights_per_step_;
            weights_per_step_ += layout_[i].targets.size();
        }
    }

    loss_rate_.resize(steps_ * runs_total_);
    loss_factor_.resize(steps_ * runs_total_);
    birth_weight_.resize(steps_ * weights_per_step_);

    auto cell_average = [&](const Coefficient& c, double t, std::size_t begin,
                            const std::vector<double>& run_cuts) {
        const double lo = static_cast<double>(begin) * h;
        if (run_cuts.empty()) return c(t, lo + 0.5 * h);
        double acc = 0.0;
        double left = lo;
        for (std::size_t s = 0; s <= run_cuts.size(); ++s) {
            const double right = s < run_cuts.size() ? run_cuts[s] : lo + h;
            acc += (right - left) * c(t, 0.5 * (left + right));
            left = right;
        }
        return acc / h;
    };
    auto check_sample = [&](double v, const Coefficient& c, const std::string& what, double t,
                            std::size_t cell) {
        if (!std::isfinite(v) || v < 0.0) {
            std::ostringstream os;
            os << what << " " << c.describe() << " evaluates to " << v << " at t=" << t
               << ", cell " << cell;
            throw ValidationError(os.str());
        }
    };

    for (std::size_t m = 0; m < steps_; ++m) {
        const double t = midpoint_time(m, steps_, grid.period);
        for (std::size_t i = 0; i < phases_; ++i) {
            const auto& lay = layout_[i];
            for (std::size_t r = 0; r < lay.runs.size(); ++r) {
                const std::size_t slot = m * runs_total_ + lay.data_offset + r;
                const auto& rc = cuts[i][r];
                const double loss = cell_average(losses[i], t, lay.runs[r].begin, rc);
                check_sample(loss, losses[i], "loss rate of phase " + std::to_string(i), t,
                             lay.runs[r].begin);
                loss_rate_[slot] = loss;
                loss_factor_[slot] = std::exp(-h * loss);
                const std::size_t wbase =
                    m * weights_per_step_ + weight_offset_[lay.data_offset + r];
                for (std::size_t s = 0; s < lay.targets.size(); ++s) {
                    const auto& b = model.births().at(BirthKey{lay.targets[s], i});
                    const double v = cell_average(b, t, lay.runs[r].begin, rc);
                    check_sample(v, b,
                                 "birth rate " + std::to_string(i) + "->" +
                                     std::to_string(lay.targets[s]),
                                 t, lay.runs[r].begin);
                    birth_weight_[wbase + s] = h * v;
                }
            }
        }
    }
}

double PeriodMap::step(std::size_t m, std::span<const double> in, std::span<double> out,
                       double& spill) const
{
    const std::size_t n = cells_;
    const double* lf = loss_factor_.data() + m * runs_total_;
    const double* bw = birth_weight_.data() + m * weights_per_step_;
    std::vector<double> inflow(phases_, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < phases_; ++i) {
        const auto& lay = layout_[i];
        const double* src = in.data() + i * n;
        double* dst = out.data() + i * n;
        for (std::size_t r = 0; r < lay.runs.size(); ++r) {
            const auto [begin, end] = lay.runs[r];
            const double s = range_sum(src + begin, end - begin);
            total += s;
            const double* w = bw + weight_offset_[lay.data_offset + r];
            for (std::size_t t = 0; t < lay.targets.size(); ++t) inflow[lay.targets[t]] += w[t] * s;

            const double f = lf[lay.data_offset + r];
            const std::size_t last = std::min(end, n - 1);
            for (std::size_t k = begin; k < last; ++k) dst[k + 1] = f * src[k];
            if (end == n) spill += dt_ * f * src[n - 1];
        }
    }
    for (std::size_t i = 0; i < phases_; ++i) out[i * n] = inflow[i];
    return dt_ * total;
}

void PeriodMap::adjoint_step(std::size_t m, std::span<const double> in, std::span<double> out) const
{
    const std::size_t n = cells_;
    const double* lf = loss_factor_.data() + m * runs_total_;
    const double* bw = birth_weight_.data() + m * weights_per_step_;
    for (std::size_t i = 0; i < phases_; ++i) {
        const auto& lay = layout_[i];
        const double* src = in.data() + i * n;
        double* dst = out.data() + i * n;
        for (std::size_t r = 0; r < lay.runs.size(); ++r) {
            const auto [begin, end] = lay.runs[r];
            const double* w = bw + weight_offset_[lay.data_offset + r];
            double source = 0.0;
            for (std::size_t t = 0; t < lay.targets.size(); ++t)
                source += w[t] * in[lay.targets[t] * n];
            const double f = lf[lay.data_offset + r];
            const std::size_t last = std::min(end, n - 1);
            for (std::size_t k = begin; k < last; ++k) dst[k] = f * src[k + 1] + source;
            if (end == n) dst[n - 1] = source;
        }
    }
}

double PeriodMap::loss_rate(std::size_t m, std::size_t phase, std::size_t cell) const
{
    const auto& lay = layout_.at(phase);
    return loss_rate_[m * runs_total_ + lay.data_offset + lay.run_of_cell.at(cell)];
}

double PeriodMap::birth_rate(std::size_t m, std::size_t source, std::size_t target,
                             std::size_t cell) const
{
    const auto& lay = layout_.at(source);
    const auto it = std::find(lay.targets.begin(), lay.targets.end(), target);
    if (it == lay.targets.end()) return 0.0;
    const std::size_t r = lay.run_of_cell.at(cell);
    return birth_weight_[m * weights_per_step_ + weight_offset_[lay.data_offset + r] +
                         static_cast<std::size_t>(it - lay.targets.begin())] /
           dt_;
}

double PeriodMap::mass(std::span<const double> density) const
{
    return dt_ * range_sum(density.data(), density.size());
}

PopulationState make_state(const GridSpec& grid, std::size_t phases, std::vector<double> density)
{
    if (density.size() != phases * grid.n_age)
        throw ValidationError("density size does not match phases x age cells");
    for (double v : density)
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("densities must be finite and nonnegative");
    PopulationState s;
    s.phases = phases;
    s.cells = grid.n_age;
    s.density = std::move(density);
    s.total_mass = grid.step() * std::accumulate(s.density.begin(), s.density.end(), 0.0);
    return s;
}

PopulationState initial_state(const PhaseModel& model, const GridSpec& grid)
{
    const double h = grid.step();
    const double a = model.max_age_threshold();
    const auto width = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(a / h)), 1,
                                               grid.n_age);
    std::vector<double> density(model.phases() * grid.n_age, 0.0);
    const double value = 1.0 / (h * static_cast<double>(width * model.phases()));
    for (std::size_t i = 0; i < model.phases(); ++i)
        std::fill_n(density.begin() + static_cast<std::ptrdiff_t>(i * grid.n_age), width, value);
    return make_state(grid, model.phases(), std::move(density));
}

PopulationState step(const PopulationState& state, const PeriodMap& map)
{
    if (state.density.size() != map.size()) throw ValidationError("state is not defined on this grid");
    PopulationState next = state;
    double spill = 0.0;
    map.step(state.step_index % map.steps(), state.density, next.density, spill);
    for (double v : next.density) {
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "non-finite density at step " << state.step_index;
            throw SolverError(os.str());
        }
    }
    next.step_index = state.step_index + 1;
    next.time = static_cast<double>(next.step_index) * map.dt();
    next.spill = state.spill + spill;
    next.total_mass = map.mass(next.density);
    return next;
}

PopulationState step(const PopulationState& state, const PhaseModel& model, const GridSpec& grid)
{
    return step(state, PeriodMap(model, grid));
}

PeriodOutcome evolve_period(const PopulationState& state, const PeriodMap& map)
{
    if (state.density.size() != map.size()) throw ValidationError("state is not defined on this grid");
    std::vector<double> a = state.density;
    std::vector<double> b(a.size(), 0.0);
    double spill = 0.0;
    const std::size_t first = state.step_index % map.steps();
    for (std::size_t s = 0; s < map.steps(); ++s) {
        const double m = map.step((first + s) % map.steps(), a, b, spill);
        if (!std::isfinite(m)) {
            std::ostringstream os;
            os << "non-finite density at step " << state.step_index + s;
            throw SolverError(os.str());
        }
        std::swap(a, b);
    }
    const double growth = map.mass(a);
    if (!std::isfinite(growth)) {
        std::ostringstream os;
        os << "non-finite density at step " << state.step_index + map.steps();
        throw SolverError(os.str());
    }
    if (!(growth > 0.0)) throw DegenerateModelError("population extinct on the grid");

    PeriodOutcome out;
    out.growth_factor = growth / state.total_mass;
    out.spill_fraction = spill / growth;
    if (out.spill_fraction > map.options().spill_tolerance) {
        std::ostringstream os;
        os << "truncation spill " << out.spill_fraction << " of the mass per period exceeds "
           << map.options().spill_tolerance << " (A_max = " << map.grid().age_max() << ")";
        if (map.options().strict) throw SolverError(os.str());
        out.warnings.push_back(os.str());
    }
    for (double& v : a) v /= growth;
    out.state = state;
    out.state.density = std::move(a);
    out.state.step_index = state.step_index + map.steps();
    out.state.time = static_cast<double>(out.state.step_index) * map.dt();
    out.state.spill = state.spill + spill / state.total_mass;
    out.state.total_mass = 1.0;
    return out;
}

PeriodOutcome evolve_period(const PopulationState& state, const PhaseModel& model,
                            const GridSpec& grid)
{
    return evolve_period(state, PeriodMap(model, grid));
}

std::string trajectory_csv(std::span<const TrajectoryRow> rows)
{
    std::ostringstream os;
    os.precision(17);
    os << "period_index,growth_factor,weighted_mass,spill\n";
    for (const auto& r : rows)
        os << r.period_index << ',' << r.growth_factor << ',' << r.weighted_mass << ',' << r.spill
           << '\n';
    return os.str();
}

DelayTrace solve_delay_equation(const PhaseModel& model, const GridSpec& grid,
                                const PopulationState& initial, std::size_t horizon_periods)
{
    if (model.phases() != 1)
        throw UnsupportedModelError("the delay formulation needs a one-phase model");
    if (horizon_periods < 5) throw ValidationError("delay solve horizon must be at least 5 periods");
    const PeriodMap map(model, grid);
    const std::size_t n = map.cells();
    const std::size_t steps = map.steps();
    const std::size_t total = horizon_periods * steps;
    const double h = map.dt();
    if (initial.density.size() != n) throw ValidationError("initial density is not on this grid");

    // history[j + n - 1] holds the newborn density of the cohort born at
    // step j; cohorts with j <= 0 are the initial density at age -j.
    std::vector<double> history(total + n, 0.0);
    for (std::size_t k = 0; k < n; ++k) history[n - 1 - k] = initial.density[k];
    // exponent[k]: rectangle-rule integral of the loss along the
    // characteristic of the cohort currently in cell k.
    std::vector<double> exponent(n, 0.0), next(n, 0.0);

    DelayTrace trace;
    trace.dt = h;
    trace.boundary.reserve(total + 1);
    trace.boundary.push_back(initial.density[0]);
    for (std::size_t m = 0; m < total; ++m) {
        const std::size_t mm = m % steps;
        double b = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double birth = map.birth_rate(mm, 0, 0, k);
            if (birth == 0.0) continue;
            const std::size_t born = m + n - 1 - k;  // index of cohort born at step m - k
            b += h * birth * std::exp(-exponent[k]) * history[born];
        }
        history[m + n] = b;
        trace.boundary.push_back(b);
        next[0] = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) next[k + 1] = exponent[k] + h * map.loss_rate(mm, 0, k);
        std::swap(exponent, next);
    }
    return trace;
}

}  // namespace cellcycle
