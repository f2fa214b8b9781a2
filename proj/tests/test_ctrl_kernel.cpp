#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hypctl/ctrl_kernel.hpp"
#include "support/example_plant.hpp"

#include <cmath>

using namespace hypctl;
using testsupport::example_params;
using testsupport::example_plant;

namespace {

// 2x2 constant-coefficient subcase: one state in each direction.
PlantSpec small_plant(double a12, double a21, double q0) {
    PlantSpec s;
    s.n = 2;
    s.p = 1;
    s.m = 1;
    s.n_xi = 1;
    s.lambda = {ScalarFunction::constant(1.0), ScalarFunction::constant(-1.5)};
    s.A = ScalarMatrix(2, 2);
    s.A(0, 1) = ScalarFunction::constant(a12);
    s.A(1, 0) = ScalarFunction::constant(a21);
    s.C1 = ScalarMatrix(2, 1);
    s.Q0 = Matrix::Constant(1, 1, q0);
    s.Q1 = Matrix::Constant(1, 1, 0.5);
    s.F = -Matrix::Identity(1, 1);
    s.B = Matrix::Identity(1, 1);
    s.C2 = Matrix::Zero(1, 1);
    return s;
}

double max_field_diff_on_common_nodes(const KernelField& coarse, const KernelField& fine) {
    const int Nc = coarse.grid().N;
    const int ratio = fine.grid().N / Nc;
    double worst = 0.0;
    for (int a = 0; a <= Nc; ++a)
        for (int b = 0; b <= a; ++b)
            for (int i = 0; i < coarse.rows(); ++i)
                for (int j = 0; j < coarse.cols(); ++j)
                    worst = std::max(worst, std::abs(coarse.at(i, j, a, b) -
                                                     fine.at(i, j, a * ratio, b * ratio)));
    return worst;
}

} // namespace

TEST_CASE("zero coupling gives the zero kernel") {
    auto spec = example_plant();
    spec.A = ScalarMatrix(4, 4);
    auto ctrl = solve_controller_kernel(spec, example_params(48), Grid(48));
    double worst = 0.0;
    for (int a = 0; a <= 48; ++a)
        for (int b = 0; b <= a; ++b)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    worst = std::max(worst, std::abs(ctrl.K.at(i, j, a, b)));
    CHECK(worst == 0.0);
    CHECK(ctrl.A0.max_abs() == 0.0);
    CHECK(ctrl.G.max_abs() == 0.0);
}

TEST_CASE("demo plant kernel satisfies the imposed boundary data") {
    auto spec = example_plant();
    Grid grid(100);
    auto ctrl = solve_controller_kernel(spec, example_params(100), grid);
    CHECK(ctrl.stats.converged);
    CHECK(controller_bc_residual(ctrl.K, spec, grid) <= 1e-8);
    CHECK(diagonal_condition_residual(ctrl.K, spec, grid) <= 1e-10);
    CHECK(artificial_bc_residual(ctrl.K, spec, example_params(100).controller_bc, grid) <=
          1e-12);
}

TEST_CASE("nonzero artificial boundary data is imposed exactly") {
    auto spec = example_plant();
    auto params = example_params(64);
    params.controller_bc.l(1, 0) = ScalarFunction::from_expression("sin(3*z)");
    params.controller_bc.m(0, 0) = ScalarFunction::from_expression("z^2");
    params.controller_bc.m(1, 0) = ScalarFunction::from_expression("cos(z)");
    params.controller_bc.m(1, 1) = ScalarFunction::from_expression("1-z");
    params.controller_bc.n(0, 1) = ScalarFunction::from_expression("exp(z)-2");
    Grid grid(64);
    auto ctrl = solve_controller_kernel(spec, params, grid);
    CHECK(artificial_bc_residual(ctrl.K, spec, params.controller_bc, grid) <= 1e-12);
    CHECK(controller_bc_residual(ctrl.K, spec, grid) <= 1e-8);
}

TEST_CASE("interior PDE residual contracts first order") {
    auto spec = example_plant();
    auto fine = solve_controller_kernel(spec, example_params(128), Grid(128));
    auto coarse = solve_controller_kernel(spec, example_params(64), Grid(64));
    auto rf = controller_pde_residual(fine.K, spec, Grid(128));
    auto rc = controller_pde_residual(coarse.K, spec, Grid(64));
    double ratio = rc.median_abs / rf.median_abs;
    CAPTURE(rc.median_abs);
    CAPTURE(rf.median_abs);
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
}

TEST_CASE("constant-coefficient 2x2 kernel self-converges against a fine reference") {
    auto spec = small_plant(0.8, -0.6, 0.7);
    auto reference = solve_controller_kernel(spec, example_params(800), Grid(800));
    auto mid = solve_controller_kernel(spec, example_params(400), Grid(400));
    auto test = solve_controller_kernel(spec, example_params(200), Grid(200));

    double e200 = max_field_diff_on_common_nodes(test.K, reference.K);
    double e400 = max_field_diff_on_common_nodes(mid.K, reference.K);

    // h-extrapolated first-order error bound: err(N) ~ C (1/N - 1/800).
    double C = e400 / (1.0 / 400 - 1.0 / 800);
    double bound = C * (1.0 / 200 - 1.0 / 800);
    CAPTURE(e200);
    CAPTURE(e400);
    CHECK(e200 <= 4.0 * bound);
    CHECK(e200 > e400); // sanity: coarser is worse
}

TEST_CASE("A0 extraction") {
    auto spec = example_plant();
    Grid grid(80);
    auto ctrl = solve_controller_kernel(spec, example_params(80), grid);

    SUBCASE("upper triangle of A1 is structurally zero") {
        for (int k = 0; k <= grid.N; ++k)
            for (int i = 0; i < spec.p; ++i)
                for (int j = i; j < spec.p; ++j)
                    CHECK(ctrl.A0.at_node(k)(i, j) == 0.0);
    }
    SUBCASE("extraction equals the boundary products") {
        const Matrix D = controller_bottom_matrix(spec);
        for (int k = 0; k <= grid.N; ++k) {
            Matrix Kz0 = ctrl.K.eval_matrix(grid.z(k), 0.0);
            Matrix full = Kz0 * D;
            CHECK(std::abs(full(1, 0) - ctrl.A0.at_node(k)(1, 0)) <= 1e-12);
            for (int r = spec.p; r < spec.n; ++r)
                for (int c = 0; c < spec.p; ++c)
                    CHECK(std::abs(full(r, c) - ctrl.A0.at_node(k)(r, c)) <= 1e-12);
        }
    }
    SUBCASE("p = 1 has no strictly-lower slots at all") {
        auto small = small_plant(0.3, 0.2, 0.4);
        auto sc = solve_controller_kernel(small, example_params(60), Grid(60));
        for (int k = 0; k <= 60; ++k)
            CHECK(sc.A0.at_node(k)(0, 0) == 0.0);
    }
}

TEST_CASE("G computation") {
    Grid grid(60);
    auto params = example_params(60);

    SUBCASE("zero C1 and C2 gives zero") {
        auto spec = example_plant();
        spec.C2 = Matrix::Zero(2, 3);
        auto ctrl = solve_controller_kernel(spec, params, grid);
        CHECK(ctrl.G.max_abs() == 0.0);
    }
    SUBCASE("C1 = 0 reduces G to the boundary term") {
        auto spec = example_plant();
        auto ctrl = solve_controller_kernel(spec, params, grid);
        const Matrix tail = spec.Lambda(0.0) * spec.E2() * spec.C2;
        for (int k = 0; k <= grid.N; ++k) {
            Matrix expected = ctrl.K.eval_matrix(grid.z(k), 0.0) * tail;
            CHECK((ctrl.G.at_node(k) - expected).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    SUBCASE("zero kernel leaves C1") {
        auto spec = example_plant();
        spec.A = ScalarMatrix(4, 4); // K = 0
        spec.C2 = Matrix::Zero(2, 3);
        spec.C1(0, 1) = ScalarFunction::from_expression("sin(z)");
        spec.C1(3, 2) = ScalarFunction::from_expression("exp(-z)");
        auto ctrl = solve_controller_kernel(spec, params, grid);
        for (int k = 0; k <= grid.N; ++k)
            CHECK((ctrl.G.at_node(k) - spec.C1.eval(grid.z(k))).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("spatially varying speeds stay within the residual gates") {
    // Exercises the lambda'(zeta) zero-order term and curved characteristics.
    auto spec = small_plant(0.5, -0.4, 0.3);
    spec.lambda[0] = ScalarFunction::from_expression("1+0.5*z");
    spec.lambda[1] = ScalarFunction::from_expression("-(1.5+0.3*cos(z))");
    Grid grid(100);
    auto ctrl = solve_controller_kernel(spec, example_params(100), grid);
    CHECK(controller_bc_residual(ctrl.K, spec, grid) <= 1e-8);
    CHECK(diagonal_condition_residual(ctrl.K, spec, grid) <= 1e-10);

    auto fine = solve_controller_kernel(spec, example_params(200), Grid(200));
    auto rc = controller_pde_residual(ctrl.K, spec, grid);
    auto rf = controller_pde_residual(fine.K, spec, Grid(200));
    double ratio = rc.median_abs / rf.median_abs;
    CHECK(ratio >= 1.4);
    CHECK(ratio <= 2.6);
}
