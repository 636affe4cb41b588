#include "cellcycle/random_models.hpp"

#include <cmath>
#include <numbers>

namespace cellcycle {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Coefficient random_positive_trig(std::mt19937_64& rng, double base, double max_relative)
{
    const int harmonics = std::uniform_int_distribution<int>(1, 2)(rng);
    double budget = uniform(rng, 0.0, max_relative) * base;
    std::vector<TrigTerm> terms;
    for (int k = 1; k <= harmonics; ++k) {
        const double amplitude = k == harmonics ? budget : uniform(rng, 0.0, budget);
        budget -= amplitude;
        terms.push_back({uniform(rng, 0.0, 1.0) < 0.5 ? amplitude : -amplitude, k,
                         uniform(rng, 0.0, 1.0)});
    }
    return Coefficient::trig_poly(1.0, base, std::move(terms));
}

}  // namespace

ConstantCycle random_constant_cycle(std::mt19937_64& rng)
{
    ConstantCycle c;
    for (int i = 0; i < 3; ++i) {
        c.psi.push_back(uniform(rng, 1.0, 20.0));
        c.thresholds.push_back(uniform(rng, 0.0, 0.45));
        c.deaths.push_back(uniform(rng, 0.0, 1.0));
    }
    return c;
}

PhaseModel random_periodic_cycle(std::mt19937_64& rng)
{
    std::vector<Coefficient> deaths, transitions;
    for (int i = 0; i < 3; ++i) {
        const double a = uniform(rng, 0.0, 0.4);
        Coefficient psi = random_positive_trig(rng, uniform(rng, 2.0, 15.0), 0.9);
        transitions.push_back(a > 0.0 ? Coefficient::product({psi, Coefficient::age_indicator(a)})
                                      : psi);
        const double pick = uniform(rng, 0.0, 1.0);
        if (pick < 0.3) {
            deaths.emplace_back();
        } else if (pick < 0.65) {
            deaths.push_back(random_positive_trig(rng, uniform(rng, 0.05, 1.0), 1.0));
        } else {
            const int power = 2 * std::uniform_int_distribution<int>(1, 3)(rng);
            deaths.push_back(Coefficient::cos_power(1.0, uniform(rng, 0.2, 2.0), power,
                                                    std::numbers::pi, uniform(rng, 0.0, std::numbers::pi)));
        }
    }
    return PhaseModel::cell_cycle(1.0, std::move(deaths), std::move(transitions));
}

}  // namespace cellcycle
