#include "cellcycle/eigensolver.hpp"
#include "cellcycle/error.hpp"
#include "cellcycle/matrix_oracle.hpp"
#include "cellcycle/presets.hpp"

#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace cellcycle;

TEST_SUITE("matrix_oracle")
{
    TEST_CASE("Perron roots of small matrices")
    {
        CHECK(perron_root(NonnegMatrix(Eigen::MatrixXd::Identity(3, 3))) == doctest::Approx(1.0).epsilon(1e-14));
        Eigen::MatrixXd swap(2, 2);
        swap << 0.0, 2.0, 2.0, 0.0;
        swap.array() += 1e-9;
        CHECK(perron_root(NonnegMatrix(swap)) == doctest::Approx(2.0).epsilon(1e-8));
    }

    TEST_CASE("Perron root agrees with a dense eigensolver")
    {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::MatrixXd a(5, 5);
            for (Eigen::Index k = 0; k < 25; ++k) a.data()[k] = u(rng) + 1e-3;
            const Eigen::EigenSolver<Eigen::MatrixXd> es(a);
            double reference = 0.0;
            for (Eigen::Index k = 0; k < 5; ++k) reference = std::max(reference, std::abs(es.eigenvalues()[k]));
            CHECK(std::abs(perron_root(NonnegMatrix(a)) - reference) <= 1e-9);
        }
    }

    TEST_CASE("periodic matrices do not converge")
    {
        Eigen::MatrixXd a(2, 2);
        a << 0.0, 1.0, 4.0, 0.0;
        CHECK_THROWS_AS(perron_root(NonnegMatrix(a), 1e-12, 1000), ConvergenceError);
        Eigen::MatrixXd negative = Eigen::MatrixXd::Identity(2, 2);
        negative(0, 1) = -1.0;
        CHECK_THROWS_AS(NonnegMatrix{negative}, ValidationError);
    }

    TEST_CASE("Kingman blends: equality cases")
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(0.01, 1.0);
        Eigen::MatrixXd a(4, 4), b(4, 4);
        for (Eigen::Index k = 0; k < 16; ++k) a.data()[k] = u(rng), b.data()[k] = u(rng);
        for (auto mode : {KingmanMode::EntrywiseGeometric, KingmanMode::DiagArithOffdiagGeom}) {
            CHECK(std::abs(kingman_blend_check(NonnegMatrix(a), NonnegMatrix(a), 0.3, mode).max_violation) <= 1e-12);
            for (double theta : {0.0, 1.0})
                CHECK(std::abs(kingman_blend_check(NonnegMatrix(a), NonnegMatrix(b), theta, mode).max_violation) <= 1e-12);
        }
    }

    TEST_CASE("Kingman entrywise geometric blends never violate log-convexity")
    {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 300; ++trial) {
            Eigen::MatrixXd a(4, 4), b(4, 4);
            for (Eigen::Index k = 0; k < 16; ++k) a.data()[k] = 1e-3 + u(rng), b.data()[k] = 1e-3 + u(rng);
            CHECK(kingman_blend_check(NonnegMatrix(a), NonnegMatrix(b), u(rng), KingmanMode::EntrywiseGeometric).pass);
        }
    }

    TEST_CASE("arithmetic blending of the diagonal can break log-convexity")
    {
        // 1 x 1: log(theta a + (1 - theta) b) > theta log a + (1 - theta) log b.
        Eigen::MatrixXd a(1, 1), b(1, 1);
        a << 1.0;
        b << 4.0;
        const auto scalar = kingman_blend_check(NonnegMatrix(a), NonnegMatrix(b), 0.5, KingmanMode::DiagArithOffdiagGeom);
        CHECK_FALSE(scalar.pass);
        CHECK(scalar.max_violation == doctest::Approx(std::log(2.5) - std::log(2.0)));

        Eigen::MatrixXd c(2, 2), d(2, 2);
        c << 1.0, 1e-3, 1e-3, 0.0 + 1e-3;
        d << 9.0, 1e-3, 1e-3, 1e-3;
        CHECK_FALSE(kingman_blend_check(NonnegMatrix(c), NonnegMatrix(d), 0.5, KingmanMode::DiagArithOffdiagGeom).pass);
        CHECK(kingman_blend_check(NonnegMatrix(c), NonnegMatrix(d), 0.5, KingmanMode::EntrywiseGeometric).pass);
    }

    TEST_CASE("zero entries under geometric blending are kept at zero with a warning")
    {
        Eigen::MatrixXd a = Eigen::MatrixXd::Constant(3, 3, 1.0), b = Eigen::MatrixXd::Constant(3, 3, 2.0);
        a(0, 1) = 0.0;
        const auto r = kingman_blend_check(NonnegMatrix(a), NonnegMatrix(b), 0.5, KingmanMode::EntrywiseGeometric);
        CHECK(r.warnings.size() == 1);
    }

    TEST_CASE("assembled monodromy is nonnegative and reproduces the power iteration")
    {
        EigenOptions tight;
        tight.tol = 1e-12;
        tight.keep_eigenfunction = false;
        const auto one = PhaseModel::cell_cycle(1.0, {Coefficient()}, {Coefficient::constant(1.0)});
        const auto g1 = grid_for(one, {.cells_per_unit = 64});
        const auto m1 = assemble_monodromy(one, g1);
        CHECK((m1.values().array() >= 0.0).all());
        CHECK(std::log(perron_root(m1)) / g1.period ==
              doctest::Approx(floquet_eigenvalue(one, g1, tight).lambda).epsilon(1e-10));

        const auto t3 = presets::table3();
        const auto g3 = grid_for(t3, {.cells_per_unit = 96});
        const auto m3 = assemble_monodromy(t3, g3);
        CHECK((m3.values().array() >= 0.0).all());
        CHECK(std::abs(std::log(perron_root(m3)) / g3.period - floquet_eigenvalue(t3, g3, tight).lambda) <= 1e-9);
    }

    TEST_CASE("monodromy assembly refuses large grids")
    {
        const auto t3 = presets::table3();
        CHECK_THROWS_AS(assemble_monodromy(t3, grid_for(t3)), ValidationError);
    }
}
