#include "cellcycle/dual_verifier.hpp"
#include "cellcycle/error.hpp"
#include "cellcycle/presets.hpp"

#include "doctest.h"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cellcycle;

namespace {

PhaseModel one_phase(double k)
{
    return PhaseModel::cell_cycle(1.0, {Coefficient()}, {Coefficient::constant(k)});
}

}  // namespace

TEST_SUITE("dual_verifier")
{
    TEST_CASE("one-phase adjoint eigenfunction is constant away from the truncation")
    {
        const auto m = one_phase(1.0);
        const auto g = grid_for(m);
        const auto pair = dual_pair(m, g);
        CHECK(pair.dual.converged);
        const auto phi = pair.dual.sample(0);
        const auto inner = static_cast<std::size_t>((g.age_max() - 10.0) / g.step());
        const auto [lo, hi] = std::minmax_element(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(inner));
        CHECK((*hi - *lo) / *hi <= 1e-8);
        CHECK(g.step() * std::inner_product(phi.begin(), phi.end(), pair.forward.sample(0).begin(), 0.0) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("constant models have a time-independent adjoint")
    {
        const auto m = PhaseModel::cell_cycle(
            1.0, {Coefficient::constant(0.1), Coefficient()},
            {Coefficient::product({Coefficient::constant(5.0), Coefficient::age_indicator(0.2)}),
             Coefficient::constant(8.0)});
        const auto g = grid_for(m, {.cells_per_unit = 256});
        const auto pair = dual_pair(m, g);
        const auto a = pair.dual.sample(0);
        const auto b = pair.dual.sample(g.steps_per_period / 3);
        for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(b[j] == doctest::Approx(a[j]).epsilon(1e-9));
    }

    TEST_CASE("Table 3 adjoint is positive and dual to the forward eigenvalue")
    {
        const auto m = presets::table3();
        const auto g = grid_for(m);
        const auto pair = dual_pair(m, g);
        CHECK(*std::min_element(pair.dual.samples.begin(), pair.dual.samples.end()) > 0.0);
        CHECK(std::abs(pair.dual.adjoint_lambda - pair.forward.lambda) <= 2e-3);

        const double lambda = pair.forward.lambda;
        const auto exact = check_subeigen_inequality(m, g, lambda, pair.dual, 1e-6);
        CHECK(exact.pass);
        CHECK(std::abs(exact.max_violation) <= 1e-6);
        const auto above = check_subeigen_inequality(m, g, lambda + 0.1, pair.dual, 1e-6);
        CHECK(above.pass);
        CHECK(above.max_violation <= -0.1 * (1.0 - 1e-3));
        const auto below = check_subeigen_inequality(m, g, lambda - 0.1, pair.dual, 1e-6);
        CHECK_FALSE(below.pass);
        CHECK(below.max_violation >= 0.1 * (1.0 - 1e-3));

        const auto conservation = check_conservation(m, g, lambda, initial_state(m, g), pair.dual, 20, 1e-4);
        CHECK(conservation.pass);
    }

    TEST_CASE("conservation of the weighted mass, one-phase model")
    {
        const auto m = one_phase(1.0);
        const auto g = grid_for(m);
        const auto pair = dual_pair(m, g);
        const auto report = check_conservation(m, g, pair.forward.lambda, initial_state(m, g), pair.dual, 20, 1e-6);
        CHECK(report.pass);
        CHECK(report.max_violation <= 1e-6);
    }

    TEST_CASE("Lemma certificate: endpoints, self-blend and Table 3 against its half-period shift")
    {
        const auto m = presets::table3();
        const auto shifted = shift_all(m, 0.5);
        const auto g = grid_for(m, {.cells_per_unit = 256});
        const auto p1 = dual_pair(m, g);
        const auto p2 = dual_pair(shifted, g);
        for (double theta : {0.0, 1.0}) {
            const auto r = check_lemma_blend(m, p1, shifted, p2, theta, g);
            CHECK(r.pass);
            CHECK(std::abs(r.max_violation) <= 1e-6);
        }
        const auto self = check_lemma_blend(m, p1, m, p1, 0.4, g);
        CHECK(self.pass);
        CHECK(std::abs(self.max_violation) <= 1e-6);
        const auto half = check_lemma_blend(m, p1, shifted, p2, 0.5, g);
        CHECK(half.pass);
    }

    TEST_CASE("residual reports serialize to JSON")
    {
        ResidualReport r;
        r.check = "subeigen";
        r.max_violation = -0.5;
        r.tolerance = 1e-6;
        r.pass = true;
        const auto j = nlohmann::json::parse(r.to_json());
        CHECK(j.at("pass").get<bool>());
        CHECK(j.at("max_violation").get<double>() == -0.5);
        CHECK(j.at("location").contains("cell"));
    }

    TEST_CASE("trial functions must be positive")
    {
        const auto m = one_phase(1.0);
        const auto g = GridSpec::make(128, 16, 1.0);
        std::vector<double> phi(16 * 128, 1.0);
        phi[5] = 0.0;
        CHECK_THROWS_AS(check_subeigen_inequality(m, g, 1.0, phi, 1e-6), ValidationError);
    }
}
