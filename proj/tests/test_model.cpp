#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hypctl/config.hpp"
#include "hypctl/plant.hpp"
#include "support/example_plant.hpp"

#include <cstdio>
#include <filesystem>

using namespace hypctl;
using testsupport::example_config;
using testsupport::example_plant;

TEST_CASE("validate_plant accepts the demo plant") {
    auto report = validate_plant(example_plant(), Grid(64));
    CHECK(report.valid());
    CHECK(report.violations.empty());
}

TEST_CASE("validate_plant flags broken assumptions") {
    SUBCASE("speed ordering") {
        auto spec = example_plant();
        spec.lambda[0] = ScalarFunction::constant(1.0); // 1 < 2 breaks eps1 > eps2
        auto report = validate_plant(spec, Grid(32));
        CHECK_FALSE(report.valid());
        CHECK(report.to_string().find("ordering") != std::string::npos);
    }
    SUBCASE("sign split") {
        auto spec = example_plant();
        spec.lambda[2] = ScalarFunction::constant(0.5);
        CHECK_FALSE(validate_plant(spec, Grid(32)).valid());
    }
    SUBCASE("nonzero diagonal of A") {
        auto spec = example_plant();
        spec.A(0, 0) = ScalarFunction::constant(1.0);
        auto report = validate_plant(spec, Grid(32));
        CHECK_FALSE(report.valid());
        CHECK(report.to_string().find("vanish") != std::string::npos);
    }
    SUBCASE("unstabilizable (F, B)") {
        auto spec = example_plant();
        spec.n_xi = 2;
        spec.F = Matrix::Identity(2, 2);
        spec.B = Matrix::Zero(2, 2);
        spec.B(0, 0) = 1.0;
        spec.C1 = ScalarMatrix(4, 2);
        spec.C2 = Matrix::Zero(2, 2);
        auto report = validate_plant(spec, Grid(32));
        CHECK_FALSE(report.valid());
        CHECK(report.to_string().find("stabilizable") != std::string::npos);
    }
}

TEST_CASE("Hautus tests") {
    CHECK(is_controllable(example_plant().F, example_plant().B));
    Matrix F = Matrix::Identity(2, 2);
    Matrix B(2, 1);
    B << 1, 0;
    CHECK_FALSE(is_controllable(F, B));
    CHECK_FALSE(is_stabilizable(F, B)); // unstable uncontrollable mode
    Matrix Fs(2, 2);
    Fs << -1, 0, 0, -2; // stable modes need no control authority
    CHECK(is_stabilizable(Fs, Matrix::Zero(2, 1)));
}

TEST_CASE("pole multiset sanity") {
    CHECK(poles_conjugate_symmetric({{-1, 0}, {-2, 0}}));
    CHECK(poles_conjugate_symmetric({{-1, 2}, {-1, -2}}));
    CHECK_FALSE(poles_conjugate_symmetric({{-1, 2}, {-1, 2}}));
    CHECK_FALSE(poles_conjugate_symmetric({{1, 0}, {-2, 0}}));
}

TEST_CASE("config round trip") {
    ProblemConfig cfg = example_config(100, 4.0);
    // include one table-backed entry and one artificial BC to cover the format
    cfg.plant.A(2, 3) = ScalarFunction::from_samples(
        ScalarFunction::from_expression("z*exp(-z)").sample(Grid(100)));
    cfg.design.controller_bc.l(1, 0) = ScalarFunction::from_expression("sin(z)/2");

    std::string text = config_to_string(cfg);
    ProblemConfig back = parse_config(text);

    Grid grid(100);
    for (int i = 0; i < cfg.plant.n; ++i)
        for (int k = 0; k <= grid.N; ++k)
            CHECK(back.plant.lambda[i](grid.z(k)) ==
                  doctest::Approx(cfg.plant.lambda[i](grid.z(k))).epsilon(1e-12));
    for (int i = 0; i < cfg.plant.n; ++i)
        for (int j = 0; j < cfg.plant.n; ++j)
            for (int k = 0; k <= grid.N; ++k)
                CHECK(back.plant.A(i, j)(grid.z(k)) ==
                      doctest::Approx(cfg.plant.A(i, j)(grid.z(k))).epsilon(1e-12));
    CHECK((back.plant.Q1 - cfg.plant.Q1).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((back.plant.F - cfg.plant.F).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.design.grid_N == 100);
    CHECK(back.design.controller_poles == cfg.design.controller_poles);
    for (int k = 0; k <= grid.N; ++k)
        CHECK(back.design.controller_bc.l(1, 0)(grid.z(k)) ==
              doctest::Approx(cfg.design.controller_bc.l(1, 0)(grid.z(k))).epsilon(1e-12));
    CHECK(back.sim.cfl == cfg.sim.cfl);
    for (int k = 0; k <= grid.N; ++k)
        CHECK(back.sim.x0[0](grid.z(k)) == doctest::Approx(grid.z(k)));

    // a second round trip is textually stable
    CHECK(config_to_string(back) == text);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("[dimensions]\nn = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("n = 4\n"), ConfigError); // key outside section
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);

    ProblemConfig cfg = testsupport::example_config();
    std::string text = config_to_string(cfg);
    auto broken = text;
    broken.replace(broken.find("Q0 = "), 5, "Q0 = 1 2 3 ");
    CHECK_THROWS_AS(parse_config(broken), ConfigError);
}
