#include "cellcycle/presets.hpp"

#include <cmath>
#include <numbers>

namespace cellcycle::presets {

namespace {

Coefficient gated(Coefficient rate, double threshold)
{
    if (threshold <= 0.0) return rate;
    return Coefficient::product({std::move(rate), Coefficient::age_indicator(threshold)});
}

}  // namespace

PhaseModel table3()
{
    const Coefficient psi1 = Coefficient::trig_poly(1.0, 10.0, {{8.0, 1, 0.0}});
    const Coefficient psi2 = Coefficient::trig_poly(1.0, 10.0, {{-8.0, 1, 0.0}});
    const Coefficient psi3 = Coefficient::constant(10.0);
    const Coefficient d2 = Coefficient::cos_power(1.0, 1.0, 6, std::numbers::pi, 0.0);
    return PhaseModel::cell_cycle(
        1.0, {Coefficient(), d2, Coefficient()},
        {gated(psi1, 10.0 / 24.0), gated(psi2, 10.0 / 24.0), gated(psi3, 2.0 / 24.0)});
}

PhaseModel antiphase(double amplitude, double a1, double a2, double a3)
{
    const Coefficient psi1 = Coefficient::trig_poly(1.0, 10.0, {{10.0 * amplitude, 1, 0.0}});
    const Coefficient psi2 = Coefficient::trig_poly(1.0, 10.0, {{-10.0 * amplitude, 1, 0.0}});
    return PhaseModel::cell_cycle(
        1.0, {Coefficient(), Coefficient(), Coefficient()},
        {gated(psi1, a1), gated(psi2, a2), gated(Coefficient::constant(10.0), a3)});
}

}  // namespace cellcycle::presets
