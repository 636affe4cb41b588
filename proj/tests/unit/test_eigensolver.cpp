#include "cellcycle/eigensolver.hpp"
#include "cellcycle/error.hpp"
#include "cellcycle/presets.hpp"
#include "cellcycle/random_models.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

using namespace cellcycle;

namespace {

EigenOptions quick()
{
    EigenOptions o;
    o.keep_eigenfunction = false;
    return o;
}

}  // namespace

TEST_SUITE("eigensolver")
{
    TEST_CASE("one-phase K = 1 grows at rate 1")
    {
        const ConstantCycle c{{1.0}, {0.0}, {0.0}};
        const auto r = floquet_eigenvalue(c.model(), grid_for(c.model(), {.scale = 2.0}), quick());
        CHECK(r.converged);
        CHECK(std::abs(r.lambda - 1.0) <= 1e-3);
        CHECK(r.lambda == doctest::Approx(std::log(r.growth_factor_history.back())));
    }

    TEST_CASE("the three pipelines agree on constant models")
    {
        const ConstantCycle c{{4.0, 7.0}, {0.1, 0.3}, {0.2, 0.0}};
        const auto m = c.model();
        const auto g = grid_for(m, {.cells_per_unit = 256});
        const double f = floquet_eigenvalue(m, g, quick()).lambda;
        CHECK(perron_eigenvalue(m, g, quick()).lambda == doctest::Approx(f).epsilon(1e-9));
        CHECK(lambda_g(m, g, quick()).lambda == doctest::Approx(f).epsilon(1e-9));
    }

    TEST_CASE("Table 3 eigenvalues and the geometric birth level")
    {
        const auto m = presets::table3();
        const auto g = grid_for(m);
        const auto f = floquet_eigenvalue(m, g);
        CHECK(f.converged);
        CHECK(std::isfinite(f.lambda));
        CHECK(f.lambda > 0.0);
        CHECK(f.periodicity_residual < 1e-6);
        for (double v : f.eigenfunction) REQUIRE(v >= 0.0);
        const double mass0 = g.step() * std::accumulate(f.sample(0).begin(), f.sample(0).end(), 0.0);
        CHECK(mass0 == doctest::Approx(1.0).epsilon(1e-12));

        const auto p = perron_eigenvalue(m, g, quick());
        const auto mixed = lambda_g(m, g, quick());
        CHECK(std::isfinite(p.lambda));
        CHECK(mixed.lambda <= f.lambda + 1e-9);
        CHECK(mixed.lambda <= p.lambda + 1e-9);

        const auto averaged = perron_averaged(deaths_averaged(m, 1024), 1024);
        CHECK(averaged.deaths()[1](0.0, 0.0) == doctest::Approx(0.3125).epsilon(1e-13));
    }

    TEST_CASE("geometric birth level of 10 (1 + 0.8 cos 2 pi t) is 8")
    {
        const auto k = Coefficient::product(
            {Coefficient::trig_poly(1.0, 10.0, {{8.0, 1, 0.0}}), Coefficient::age_indicator(0.1)});
        const auto m = PhaseModel::general(1.0, {Coefficient()}, {{BirthKey{0, 0}, k}}, {k});
        const auto mixed = mixed_averaged(m, 1024);
        CHECK(mixed.births().at({0, 0})(0.3, 0.5) == doctest::Approx(8.0).epsilon(1e-12));
        CHECK(mixed.outflows()[0](0.3, 0.5) == doctest::Approx(10.0).epsilon(1e-12));
    }

    TEST_CASE("shifting time by whole steps leaves the eigenvalue unchanged")
    {
        const auto m = presets::table3();
        const auto g = grid_for(m);
        const double base = floquet_eigenvalue(m, g, quick()).lambda;
        for (double phi : {0.25, 0.5, 384.0 / 1024.0})
            CHECK(floquet_eigenvalue(shift_all(m, phi), g, quick()).lambda ==
                  doctest::Approx(base).epsilon(1e-8));
        CHECK(std::abs(floquet_eigenvalue(shift_all(m, 0.3), g, quick()).lambda - base) <= 1e-4);
    }

    TEST_CASE("adding a constant death rate shifts lambda by minus that constant")
    {
        const auto m = presets::table3();
        const auto g = grid_for(m);
        const double c = 0.4;
        std::vector<Coefficient> deaths;
        for (const auto& d : m.deaths()) deaths.push_back(Coefficient::sum({{1.0, d}, {1.0, Coefficient::constant(c)}}));
        const double base = floquet_eigenvalue(m, g, quick()).lambda;
        const double moved = floquet_eigenvalue(m.with_deaths(deaths), g, quick()).lambda;
        CHECK(std::abs(moved - (base - c)) <= 1e-3);
    }

    TEST_CASE("characteristic equation oracle")
    {
        CHECK(characteristic_equation_root({{1.0}, {0.0}, {0.0}}) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(characteristic_equation_root({{3.0}, {0.0}, {0.0}}) == doctest::Approx(3.0).epsilon(1e-12));

        std::mt19937_64 rng(9);
        for (int trial = 0; trial < 50; ++trial) {
            auto c = random_constant_cycle(rng);
            const double base = characteristic_equation_root(c);
            for (auto& psi : c.psi) psi *= 2.0;
            CHECK(characteristic_equation_root(c) > base);
        }
        CHECK_THROWS_AS(characteristic_equation_root({{0.0}, {0.0}, {0.0}}), ValidationError);
    }

    TEST_CASE("averaged Table 3 matches the characteristic root after extrapolation")
    {
        const ConstantCycle avg{{10.0, 10.0, 10.0}, {10.0 / 24, 10.0 / 24, 2.0 / 24}, {0.0, 0.3125, 0.0}};
        auto m = presets::table3();
        m = deaths_averaged(m, 1024);
        const auto x = extrapolated_eigenvalue(Pipeline::Perron, m, {}, quick());
        CHECK(std::abs(x.lambda - characteristic_equation_root(avg)) <= 2e-3);
    }

    TEST_CASE("non-convergence is reported, and raised in strict mode")
    {
        const auto m = presets::table3();
        const auto g = grid_for(m, {.cells_per_unit = 64});
        EigenOptions o = quick();
        o.tol = 1e-300;
        o.max_periods = 10;
        const auto r = floquet_eigenvalue(m, g, o);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 10);
        CHECK_FALSE(r.warnings.empty());
        o.strict = true;
        CHECK_THROWS_AS(floquet_eigenvalue(m, g, o), ConvergenceError);
        o.max_periods = 5;
        CHECK_THROWS_AS(floquet_eigenvalue(m, g, o), ValidationError);
    }

    TEST_CASE("warm start from a coarser grid")
    {
        const auto m = presets::table3();
        const auto coarse = grid_for(m, {.scale = 0.5});
        const auto fine = grid_for(m);
        const auto c = floquet_eigenvalue(m, coarse, quick());
        EigenOptions o = quick();
        o.initial = prolongate(c.state, 3, coarse, fine);
        const auto warm = floquet_eigenvalue(m, fine, o);
        const auto cold = floquet_eigenvalue(m, fine, quick());
        CHECK(warm.lambda == doctest::Approx(cold.lambda).epsilon(1e-8));
        CHECK(warm.iterations < cold.iterations);
    }

    TEST_CASE("growth history CSV")
    {
        const ConstantCycle c{{1.0}, {0.0}, {0.0}};
        const auto r = floquet_eigenvalue(c.model(), grid_for(c.model(), {.cells_per_unit = 64}), quick());
        const auto csv = r.history_csv();
        CHECK(csv.rfind("iteration,growth_factor\n1,", 0) == 0);
    }
}
