#include "cellcycle/error.hpp"
#include "cellcycle/model_io.hpp"
#include "cellcycle/phase_model.hpp"
#include "cellcycle/presets.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace cellcycle;

namespace {

const double pi = std::numbers::pi;

// Composite Simpson rule over one period, independent of the library.
template <class F>
double simpson(F f, double period, int intervals = 200000)
{
    const double h = period / intervals;
    double acc = f(0.0) + f(period);
    for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return acc * h / 3.0;
}

Coefficient random_spec(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.5) {
        const double base = 1.0 + 5.0 * u(rng);
        std::vector<TrigTerm> terms{{0.6 * base * u(rng), 1, u(rng)},
                                    {0.3 * base * u(rng), 2, u(rng)}};
        return Coefficient::trig_poly(1.0, base, terms);
    }
    return Coefficient::sum(
        {{1.0, Coefficient::cos_power(1.0, 2.0 * u(rng), 2 + 2 * static_cast<int>(3 * u(rng)), pi,
                                      pi * u(rng))},
         {1.0, Coefficient::constant(0.1 + u(rng))}});
}

}  // namespace

TEST_SUITE("coefficients")
{
    TEST_CASE("Table 3 rate forms evaluate in closed form")
    {
        const auto psi1 = Coefficient::trig_poly(1.0, 10.0, {{8.0, 1, 0.0}});
        CHECK(psi1(0.0, 0.0) == doctest::Approx(18.0).epsilon(1e-15));
        CHECK(psi1(0.5, 3.0) == doctest::Approx(2.0).epsilon(1e-13));
        const auto d2 = Coefficient::cos_power(1.0, 1.0, 6, pi, 0.0);
        CHECK(d2(0.0, 0.0) == 1.0);
        const auto chi = Coefficient::age_indicator(10.0 / 24.0);
        CHECK(chi(0.0, 0.2) == 0.0);
        CHECK(chi(0.0, 0.5) == 1.0);
    }

    TEST_CASE("arithmetic averages match an independent quadrature")
    {
        const auto c = Coefficient::constant(3.5);
        CHECK(arithmetic_time_average(c, 16)(0.3, 1.0) == 3.5);

        const auto psi1 = Coefficient::trig_poly(1.0, 10.0, {{8.0, 1, 0.0}});
        CHECK(arithmetic_time_average(psi1, 1024)(0.7, 0.0) == doctest::Approx(10.0).epsilon(1e-14));

        const auto d2 = Coefficient::cos_power(1.0, 1.0, 6, pi, 0.0);
        const double oracle = simpson([](double t) { return std::pow(std::cos(pi * t), 6); }, 1.0);
        CHECK(oracle == doctest::Approx(5.0 / 16.0).epsilon(1e-12));
        CHECK(arithmetic_time_average(d2, 1024)(0.0, 0.0) == doctest::Approx(oracle).epsilon(1e-12));
        // 48 midpoint nodes integrate cos^6(pi t) exactly.
        CHECK(arithmetic_time_average(d2, 48)(0.0, 0.0) == doctest::Approx(0.3125).epsilon(1e-14));
    }

    TEST_CASE("geometric averages match an independent quadrature")
    {
        const auto c = Coefficient::constant(2.0);
        CHECK(geometric_time_average(c, 8)(0.1, 0.0) == 2.0);
        const auto psi1 = Coefficient::trig_poly(1.0, 10.0, {{8.0, 1, 0.0}});
        const double oracle =
            std::exp(simpson([](double t) { return std::log(10.0 * (1.0 + 0.8 * std::cos(2 * pi * t))); },
                             1.0));
        CHECK(oracle == doctest::Approx(8.0).epsilon(1e-10));
        CHECK(geometric_time_average(psi1, 1024)(0.0, 0.0) == doctest::Approx(8.0).epsilon(1e-12));
    }

    TEST_CASE("geometric average of a rate vanishing on part of the period is zero with a warning")
    {
        const auto pulse = Coefficient::piecewise_time(1.0, {{0.0, 0.0}, {0.5, 4.0}});
        const auto g = geometric_time_average(pulse, 64);
        CHECK(g(0.2, 0.0) == 0.0);
        CHECK(g.warnings().size() == 1);
        CHECK(arithmetic_time_average(pulse, 64)(0.2, 0.0) == doctest::Approx(2.0));
    }

    TEST_CASE("frozen averages keep the age dependence and drop the time dependence")
    {
        const auto k = Coefficient::product({Coefficient::trig_poly(1.0, 10.0, {{8.0, 1, 0.0}}),
                                             Coefficient::age_indicator(0.25)});
        const auto f = arithmetic_time_average(k, 256);
        CHECK(f.time_independent());
        CHECK(f(0.1, 0.1) == 0.0);
        CHECK(f(0.1, 0.3) == doctest::Approx(10.0).epsilon(1e-13));
        CHECK(f(0.9, 0.3) == f(0.1, 0.3));
    }

    TEST_CASE("geometric average never exceeds the arithmetic average")
    {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            const auto spec = random_spec(rng);
            const double a = arithmetic_time_average(spec, 97)(0.0, 0.0);
            const double g = geometric_time_average(spec, 97)(0.0, 0.0);
            CHECK(g <= a * (1.0 + 1e-14));
        }
    }

    TEST_CASE("evaluations are nonnegative and periodic")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const auto spec = random_spec(rng);
            for (int q = 0; q < 50; ++q) {
                const double t = u(rng);
                const double v = spec(t, 0.0);
                CHECK(v >= 0.0);
                CHECK(spec(t + 1.0, 0.0) == doctest::Approx(v).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("a descriptor that can go negative is rejected by name")
    {
        try {
            (void)Coefficient::trig_poly(1.0, 1.0, {{2.0, 1, 0.0}});
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("trig_poly") != std::string::npos);
        }
        CHECK_THROWS_AS(Coefficient::constant(-1.0), ValidationError);
        CHECK_THROWS_AS(Coefficient::cos_power(1.0, 1.0, 3, pi, 0.0), ValidationError);
        CHECK_THROWS_AS(Coefficient::cos_power(1.0, 1.0, 2, 1.0, 0.0), ValidationError);
    }

    TEST_CASE("phase shifts are exact and compose modulo the period")
    {
        const auto c = Coefficient::constant(4.0);
        CHECK(phase_shift(c, 0.3)(0.2, 0.0) == 4.0);

        const auto d2 = Coefficient::cos_power(1.0, 1.0, 6, pi, 0.0);
        CHECK(phase_shift(d2, 1.0) == d2);
        CHECK(phase_shift(d2, 0.5)(0.0, 0.0) < 1e-30);
        for (double t : {0.0, 0.13, 0.77})
            CHECK(phase_shift(d2, 0.25)(t, 0.0) == d2(t + 0.25, 0.0));

        const auto twice = phase_shift(phase_shift(d2, 0.7), 0.6);
        const auto once = phase_shift(d2, std::fmod(0.7 + 0.6, 1.0));
        for (double t : {0.0, 0.2, 0.45, 0.9})
            CHECK(twice(t, 0.0) == doctest::Approx(once(t, 0.0)).epsilon(1e-12));
    }

    TEST_CASE("blends reduce to their endpoints and combine linearly")
    {
        const auto d1 = Coefficient();
        const auto d2 = Coefficient::cos_power(1.0, 2.0, 6, pi, 0.0);
        const auto half = arithmetic_blend(d1, d2, 0.5);
        for (double t : {0.0, 0.1, 0.33, 0.8})
            CHECK(half(t, 0.0) == doctest::Approx(std::pow(std::cos(pi * t), 6)).epsilon(1e-14));
        CHECK(arithmetic_blend(d1, d2, 1.0) == d1);
        CHECK(arithmetic_blend(d1, d2, 0.0) == d2);
        CHECK(geometric_blend(d2, d2, 0.3) == d2);

        const auto b1 = Coefficient::constant(1.0);
        const auto b2 = Coefficient::constant(4.0);
        CHECK(geometric_blend(b1, b2, 0.5)(0.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK_THROWS_AS(geometric_blend(b1, b2, 1.5), ValidationError);
    }
}

TEST_SUITE("coefficients")
{
    TEST_CASE("cell-cycle models double exactly once, at mitosis")
    {
        const auto m = presets::table3();
        REQUIRE(m.births().size() == 3);
        const double t = 0.2, x = 0.5;
        const auto& k = m.transitions();
        CHECK(m.births().at({1, 0})(t, x) == k[0](t, x));
        CHECK(m.births().at({2, 1})(t, x) == k[1](t, x));
        CHECK(m.births().at({0, 2})(t, x) == 2.0 * k[2](t, x));
        CHECK(m.loss(1)(t, x) == doctest::Approx(m.deaths()[1](t, x) + k[1](t, x)));
    }

    TEST_CASE("a model without any birth is rejected")
    {
        CHECK_THROWS_AS(PhaseModel::general(1.0, {Coefficient::constant(1.0)}, {}), ValidationError);
        CHECK_THROWS_AS(PhaseModel::general(1.0, {Coefficient::constant(1.0)},
                                            {{BirthKey{0, 0}, Coefficient()}}),
                        ValidationError);
    }

    TEST_CASE("coefficients of another period are a structural error")
    {
        const auto half_period = Coefficient::trig_poly(0.5, 1.0, {{0.5, 1, 0.0}});
        CHECK_THROWS_AS(PhaseModel::cell_cycle(1.0, {Coefficient()}, {half_period}), StructuralError);
    }

    TEST_CASE("blend_models endpoints and self-blends")
    {
        const auto m = presets::table3();
        const auto shifted = shift_all(m, 0.5);
        for (double theta : {0.0, 0.3, 1.0}) {
            const auto self = blend_models(m, m, theta);
            for (double t : {0.0, 0.21, 0.6})
                for (double x : {0.1, 0.5}) {
                    for (std::size_t i = 0; i < 3; ++i) {
                        CHECK(self.loss(i)(t, x) == doctest::Approx(m.loss(i)(t, x)).epsilon(1e-14));
                        CHECK(self.deaths()[i](t, x) == doctest::Approx(m.deaths()[i](t, x)).epsilon(1e-14));
                    }
                    for (const auto& [key, b] : m.births())
                        CHECK(self.births().at(key)(t, x) == doctest::Approx(b(t, x)).epsilon(1e-14));
                }
        }
        const auto one = blend_models(m, shifted, 1.0);
        const auto zero = blend_models(m, shifted, 0.0);
        CHECK(one.births().at({1, 0})(0.3, 0.5) == m.births().at({1, 0})(0.3, 0.5));
        CHECK(zero.births().at({1, 0})(0.3, 0.5) == shifted.births().at({1, 0})(0.3, 0.5));
    }

    TEST_CASE("blend_models rejects incompatible models")
    {
        const auto m = presets::table3();
        const auto one = PhaseModel::cell_cycle(1.0, {Coefficient()}, {Coefficient::constant(1.0)});
        CHECK_THROWS_AS(blend_models(m, one, 0.5), StructuralError);
        const auto other_period = PhaseModel::cell_cycle(
            2.0, {Coefficient(), Coefficient(), Coefficient()},
            {Coefficient::constant(1.0), Coefficient::constant(1.0), Coefficient::constant(1.0)});
        CHECK_THROWS_AS(blend_models(m, other_period, 0.5), StructuralError);
        const auto general = PhaseModel::general(
            1.0, {Coefficient(), Coefficient(), Coefficient()},
            {{BirthKey{0, 0}, Coefficient::constant(1.0)}});
        CHECK_THROWS_AS(blend_models(m, general, 0.5), StructuralError);
    }

    TEST_CASE("model JSON round trip is exact")
    {
        const auto m = blend_models(presets::table3(), shift_all(presets::table3(), 0.37), 0.3);
        const auto models = {presets::table3(), m, mixed_averaged(presets::table3(), 64)};
        for (const auto& model : models) {
            const Json j = to_json(model);
            const auto back = model_from_json(Json::parse(j.dump()));
            CHECK(to_json(back).dump() == j.dump());
            for (double t : {0.0, 0.123, 0.77})
                for (double x : {0.05, 0.42, 2.0})
                    for (std::size_t i = 0; i < model.phases(); ++i)
                        CHECK(back.loss(i)(t, x) == model.loss(i)(t, x));
        }
    }

    TEST_CASE("model JSON rejects unknown fields")
    {
        Json j = to_json(presets::table3());
        j["colour"] = "blue";
        CHECK_THROWS_AS(model_from_json(j), ValidationError);
        Json c = {{"type", "constant"}, {"value", 1.0}, {"unit", "1/h"}};
        CHECK_THROWS_AS(coefficient_from_json(c), ValidationError);
        CHECK_THROWS_AS(coefficient_from_json(Json{{"type", "spline"}}), ValidationError);
    }
}
