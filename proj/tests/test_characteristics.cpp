#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hypctl/characteristics.hpp"
#include "support/example_plant.hpp"

#include <cmath>

using namespace hypctl;
using testsupport::example_plant;

namespace {

// Two-component plant with prescribed speeds, used to probe phi directly.
PlantSpec toy_plant(ScalarFunction pos, ScalarFunction neg) {
    PlantSpec s;
    s.n = 2;
    s.p = 1;
    s.m = 1;
    s.n_xi = 1;
    s.lambda = {std::move(pos), std::move(neg)};
    s.A = ScalarMatrix(2, 2);
    s.C1 = ScalarMatrix(2, 1);
    s.Q0 = Matrix::Zero(1, 1);
    s.Q1 = Matrix::Zero(1, 1);
    s.F = -Matrix::Identity(1, 1);
    s.B = Matrix::Identity(1, 1);
    s.C2 = Matrix::Zero(1, 1);
    return s;
}

} // namespace

TEST_CASE("phi on constant and varying speeds") {
    Grid grid(200);
    Characteristics chars(example_plant(), grid);
    CHECK(chars.phi(0, 1.0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    for (int i = 0; i < 4; ++i)
        CHECK(chars.phi(i, 0.0) == 0.0);
    CHECK(chars.phi(2, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(chars.phi(3, 1.0) == doctest::Approx(-0.5).epsilon(1e-14));

    // lambda(z) = 1/(1+z): phi(z) = z + z^2/2 in closed form; the table is a
    // fine-grid quadrature of the same integrand.
    auto varying = toy_plant(ScalarFunction::from_expression("1/(1+z)"),
                             ScalarFunction::constant(-1.0));
    Characteristics vc(varying, Grid(400));
    for (double z = 0.0; z <= 1.0; z += 0.1)
        CHECK(vc.phi(0, z) == doctest::Approx(z + z * z / 2).epsilon(1e-5));
    CHECK(vc.phi(0, 1.0) == doctest::Approx(1.5).epsilon(1e-5));
}

TEST_CASE("phi_inverse") {
    auto varying = toy_plant(ScalarFunction::from_expression("1/(1+z)"),
                             ScalarFunction::constant(-1.0));
    Grid grid(400);
    Characteristics chars(varying, grid);

    SUBCASE("inverse identity on grid nodes") {
        for (int k = 0; k <= grid.N; ++k) {
            double z = grid.z(k);
            CHECK(chars.phi_inverse(0, chars.phi(0, z)) == doctest::Approx(z).epsilon(1e-10));
        }
    }
    SUBCASE("composition the other way") {
        double end = chars.phi_end(0);
        for (double s = 0.0; s <= end; s += end / 37)
            CHECK(chars.phi(0, chars.phi_inverse(0, s)) == doctest::Approx(s).epsilon(1e-10));
    }
    SUBCASE("closed forms") {
        auto half = toy_plant(ScalarFunction::constant(2.0), ScalarFunction::constant(-1.0));
        Characteristics hc(half, Grid(100));
        CHECK(hc.phi_inverse(0, 0.25) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(chars.phi_inverse(0, 1.5) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("range errors") {
        CHECK_THROWS_AS(chars.phi_inverse(0, -0.1), std::domain_error);
        CHECK_THROWS_AS(chars.phi_inverse(0, chars.phi_end(0) + 0.1), std::domain_error);
        CHECK_THROWS_AS(chars.phi_inverse(1, 0.1), std::out_of_range); // negative speed index
    }
}

TEST_CASE("sigma") {
    Grid grid(200);
    Characteristics chars(example_plant(), grid);

    SUBCASE("sigma(i,j,z,0) = z at every node") {
        for (int i = 0; i < 2; ++i)
            for (int j = i; j < 2; ++j)
                for (int k = 0; k <= grid.N; ++k)
                    CHECK(chars.sigma(i, j, grid.z(k), 0.0) ==
                          doctest::Approx(grid.z(k)).epsilon(1e-12));
    }
    SUBCASE("equal constant speeds give z - zeta") {
        auto equal = toy_plant(ScalarFunction::constant(2.0), ScalarFunction::constant(-1.0));
        Characteristics ec(equal, Grid(100));
        for (double z = 0.0; z <= 1.0; z += 0.25)
            for (double zeta = 0.0; zeta <= z; zeta += 0.25)
                CHECK(ec.sigma(0, 0, z, zeta) == doctest::Approx(z - zeta).epsilon(1e-12));
    }
    SUBCASE("sigma(i,i,z,z) = 0") {
        for (double z = 0.0; z <= 1.0; z += 0.2)
            CHECK(chars.sigma(1, 1, z, z) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("precondition violations throw") {
        CHECK_THROWS_AS(chars.sigma(1, 0, 0.5, 0.25), std::out_of_range); // i > j
        // phi_2(zeta) > phi_1(z): 0.9/2 > 0.1/3
        CHECK_THROWS_AS(chars.sigma(0, 1, 0.1, 0.9), std::domain_error);
    }
}

TEST_CASE("fundamental matrices") {
    Grid grid(100);
    auto spec = example_plant();
    Characteristics chars(spec, grid);
    Matrix M = spec.F;

    SUBCASE("identity at coincident arguments") {
        for (double z = 0.0; z <= 1.0; z += 0.25)
            CHECK((fundamental_matrix(M, chars, 0, z, z) - Matrix::Identity(3, 3))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-14);
    }
    SUBCASE("zero generator gives identity") {
        CHECK((fundamental_matrix(Matrix::Zero(3, 3), chars, 2, 0.8, 0.1) -
               Matrix::Identity(3, 3))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-14);
    }
    SUBCASE("scalar case matches exp(a (z - zeta) / c)") {
        Matrix a(1, 1);
        a << 1.7;
        auto c2 = toy_plant(ScalarFunction::constant(2.0), ScalarFunction::constant(-1.0));
        Characteristics cc(c2, grid);
        CHECK(fundamental_matrix(a, cc, 0, 0.9, 0.3)(0, 0) ==
              doctest::Approx(std::exp(1.7 * 0.6 / 2.0)).epsilon(1e-12));
    }
    SUBCASE("semigroup property") {
        Matrix A = fundamental_matrix(M, chars, 1, 0.9, 0.4);
        Matrix B = fundamental_matrix(M, chars, 1, 0.4, 0.1);
        Matrix C = fundamental_matrix(M, chars, 1, 0.9, 0.1);
        CHECK((A * B - C).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("settling times") {
    SUBCASE("demo plant: 1/3 + 1/2 + 1") {
        auto t = settling_times(example_plant(), Grid(200));
        CHECK(t.t_c == doctest::Approx(11.0 / 6).epsilon(1e-13));
        CHECK(t.t_o == t.t_c);
    }
    SUBCASE("p = 1 cases") {
        auto unit = toy_plant(ScalarFunction::constant(1.0), ScalarFunction::constant(-1.0));
        CHECK(settling_times(unit, Grid(64)).t_c == doctest::Approx(2.0).epsilon(1e-13));
        auto skew = toy_plant(ScalarFunction::constant(2.0), ScalarFunction::constant(-0.5));
        CHECK(settling_times(skew, Grid(64)).t_c == doctest::Approx(2.5).epsilon(1e-13));
    }
}
