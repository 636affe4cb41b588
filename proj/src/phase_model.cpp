#include "cellcycle/phase_model.hpp"

#include "cellcycle/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cellcycle {

namespace {

bool sample_positive(const Coefficient& c, double period)
{
    if (c.is_structural_zero()) return false;
    std::vector<double> xs{0.0};
    for (double b : c.age_breakpoints()) xs.push_back(b + 1e-9 + 1e-9 * b);
    const int times = c.time_independent() ? 1 : 257;
    for (int q = 0; q < times; ++q) {
        const double t = period * q / times;
        for (double x : xs)
            if (c(t, x) > 0.0) return true;
    }
    return false;
}

std::vector<Coefficient> map_all(const std::vector<Coefficient>& in, auto&& f)
{
    std::vector<Coefficient> out;
    out.reserve(in.size());
    for (const auto& c : in) out.push_back(f(c));
    return out;
}

BirthMap map_births(const BirthMap& in, auto&& f)
{
    BirthMap out;
    for (const auto& [key, c] : in) out.emplace(key, f(c));
    return out;
}

}  // namespace

PhaseModel PhaseModel::general(double period, std::vector<Coefficient> deaths, BirthMap births,
                               std::vector<Coefficient> outflows)
{
    PhaseModel m;
    m.period_ = period;
    m.kind_ = ModelKind::General;
    m.deaths_ = std::move(deaths);
    m.outflows_ = outflows.empty() ? std::vector<Coefficient>(m.deaths_.size()) : std::move(outflows);
    m.births_ = std::move(births);
    m.validate();
    return m;
}

PhaseModel PhaseModel::cell_cycle(double period, std::vector<Coefficient> deaths,
                                  std::vector<Coefficient> transitions)
{
    if (deaths.size() != transitions.size())
        throw ValidationError("cell-cycle model needs one transition rate per phase");
    PhaseModel m;
    m.period_ = period;
    m.kind_ = ModelKind::CellCycle;
    m.deaths_ = std::move(deaths);
    m.outflows_ = transitions;
    const std::size_t phases = transitions.size();
    for (std::size_t i = 0; i < phases; ++i) {
        const std::size_t next = (i + 1) % phases;
        // Mitosis doubles the cells leaving the last phase.
        m.births_.emplace(BirthKey{next, i},
                          next == 0 ? Coefficient::sum({{2.0, transitions[i]}}) : transitions[i]);
    }
    m.transitions_ = std::move(transitions);
    m.validate();
    return m;
}

void PhaseModel::validate() const
{
    if (!(period_ > 0.0) || !std::isfinite(period_))
        throw ValidationError("model period must be positive and finite");
    if (deaths_.empty()) throw ValidationError("model needs at least one phase");
    if (outflows_.size() != deaths_.size())
        throw ValidationError("model needs one outflow rate per phase");

    auto check_period = [this](const Coefficient& c, const std::string& what) {
        if (!c.time_independent() &&
            std::abs(c.period() - period_) > 1e-12 * std::max(c.period(), period_)) {
            std::ostringstream os;
            os << what << " " << c.describe() << " has period " << c.period()
               << ", model period is " << period_;
            throw StructuralError(os.str());
        }
    };
    for (std::size_t i = 0; i < deaths_.size(); ++i) {
        check_period(deaths_[i], "death rate of phase " + std::to_string(i));
        check_period(outflows_[i], "outflow rate of phase " + std::to_string(i));
    }
    bool any_birth = false;
    for (const auto& [key, c] : births_) {
        if (key.target >= phases() || key.source >= phases())
            throw ValidationError("birth entry refers to a phase outside the model");
        check_period(c, "birth rate " + std::to_string(key.source) + "->" +
                            std::to_string(key.target));
        any_birth = any_birth || sample_positive(c, period_);
    }
    if (!any_birth)
        throw ValidationError("every birth rate is identically zero: the model has no renewal");
}

Coefficient PhaseModel::loss(std::size_t phase) const
{
    const auto& d = deaths_.at(phase);
    const auto& k = outflows_.at(phase);
    if (k.is_structural_zero()) return d;
    if (d.is_structural_zero()) return k;
    return Coefficient::sum({{1.0, d}, {1.0, k}});
}

double PhaseModel::max_age_threshold() const
{
    double a = 0.0;
    auto scan = [&a](const Coefficient& c) {
        for (double b : c.age_breakpoints()) a = std::max(a, b);
    };
    for (const auto& c : deaths_) scan(c);
    for (const auto& c : outflows_) scan(c);
    for (const auto& [key, c] : births_) scan(c);
    return a;
}

std::vector<std::string> PhaseModel::warnings() const
{
    std::vector<std::string> out;
    auto collect = [&out](const Coefficient& c) {
        auto w = c.warnings();
        out.insert(out.end(), w.begin(), w.end());
    };
    for (const auto& c : deaths_) collect(c);
    for (const auto& c : outflows_) collect(c);
    for (const auto& [key, c] : births_) collect(c);
    return out;
}

PhaseModel PhaseModel::with_deaths(std::vector<Coefficient> deaths) const
{
    if (deaths.size() != phases()) throw StructuralError("death count does not match phase count");
    PhaseModel m = *this;
    m.deaths_ = std::move(deaths);
    m.validate();
    return m;
}

PhaseModel blend_models(const PhaseModel& m1, const PhaseModel& m2, double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("blend theta must lie in [0, 1]");
    if (m1.phases() != m2.phases()) throw StructuralError("blended models differ in phase count");
    if (m1.period() != m2.period()) throw StructuralError("blended models differ in period");
    const auto& b1 = m1.births();
    const auto& b2 = m2.births();
    if (b1.size() != b2.size() ||
        !std::equal(b1.begin(), b1.end(), b2.begin(),
                    [](const auto& x, const auto& y) { return x.first == y.first; }))
        throw StructuralError("blended models differ in birth-matrix sparsity");

    if (theta == 1.0) return m1;
    if (theta == 0.0) return m2;

    std::vector<Coefficient> deaths, outflows;
    for (std::size_t i = 0; i < m1.phases(); ++i) {
        deaths.push_back(arithmetic_blend(m1.deaths()[i], m2.deaths()[i], theta));
        outflows.push_back(arithmetic_blend(m1.outflows()[i], m2.outflows()[i], theta));
    }
    BirthMap births;
    for (auto it1 = b1.begin(), it2 = b2.begin(); it1 != b1.end(); ++it1, ++it2)
        births.emplace(it1->first, geometric_blend(it1->second, it2->second, theta));
    return PhaseModel::general(m1.period(), std::move(deaths), std::move(births),
                               std::move(outflows));
}

PhaseModel perron_averaged(const PhaseModel& model, int quadrature_points)
{
    auto avg = [quadrature_points](const Coefficient& c) {
        return arithmetic_time_average(c, quadrature_points);
    };
    if (model.kind() == ModelKind::CellCycle)
        return PhaseModel::cell_cycle(model.period(), map_all(model.deaths(), avg),
                                      map_all(model.transitions(), avg));
    return PhaseModel::general(model.period(), map_all(model.deaths(), avg),
                               map_births(model.births(), avg), map_all(model.outflows(), avg));
}

PhaseModel mixed_averaged(const PhaseModel& model, int quadrature_points)
{
    auto arith = [quadrature_points](const Coefficient& c) {
        return arithmetic_time_average(c, quadrature_points);
    };
    auto geom = [quadrature_points](const Coefficient& c) {
        return geometric_time_average(c, quadrature_points);
    };
    BirthMap births = map_births(model.births(), geom);
    const bool all_zero = std::all_of(births.begin(), births.end(), [](const auto& kv) {
        return kv.second.is_structural_zero();
    });
    if (all_zero)
        throw DegenerateModelError("geometric time average of every birth rate is zero");
    return PhaseModel::general(model.period(), map_all(model.deaths(), arith), std::move(births),
                               map_all(model.outflows(), arith));
}

PhaseModel deaths_averaged(const PhaseModel& model, int quadrature_points)
{
    return model.with_deaths(map_all(model.deaths(), [quadrature_points](const Coefficient& c) {
        return arithmetic_time_average(c, quadrature_points);
    }));
}

PhaseModel shift_deaths(const PhaseModel& model, double offset)
{
    return model.with_deaths(
        map_all(model.deaths(), [offset](const Coefficient& c) { return phase_shift(c, offset); }));
}

PhaseModel shift_all(const PhaseModel& model, double offset)
{
    auto shift = [offset](const Coefficient& c) { return phase_shift(c, offset); };
    if (model.kind() == ModelKind::CellCycle)
        return PhaseModel::cell_cycle(model.period(), map_all(model.deaths(), shift),
                                      map_all(model.transitions(), shift));
    return PhaseModel::general(model.period(), map_all(model.deaths(), shift),
                               map_births(model.births(), shift), map_all(model.outflows(), shift));
}

}  // namespace cellcycle
