#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hypctl/design.hpp"
#include "hypctl/simulator.hpp"
#include "support/example_plant.hpp"

#include <cmath>

using namespace hypctl;
using testsupport::example_config;
using testsupport::example_plant;

namespace {

PlantSpec transport_pair() {
    PlantSpec s;
    s.n = 2;
    s.p = 1;
    s.m = 1;
    s.n_xi = 1;
    s.lambda = {ScalarFunction::constant(1.0), ScalarFunction::constant(-1.0)};
    s.A = ScalarMatrix(2, 2);
    s.C1 = ScalarMatrix(2, 1);
    s.Q0 = Matrix::Zero(1, 1);
    s.Q1 = Matrix::Zero(1, 1);
    s.F = -Matrix::Identity(1, 1);
    s.B = Matrix::Zero(1, 1);
    s.C2 = Matrix::Zero(1, 1);
    return s;
}

} // namespace

TEST_CASE("feedback operator evaluation") {
    Grid grid(80);
    Matrix K_xi(1, 2);
    K_xi << 2.0, -1.0;
    SpatialMatrixFunction K_x(grid, 1, 2);
    for (int k = 0; k <= grid.N; ++k)
        K_x.at_node(k) << std::sin(grid.z(k)), std::cos(grid.z(k));

    SUBCASE("zero state and estimate give zero input") {
        Matrix xhat = Matrix::Zero(2, grid.nodes());
        CHECK(evaluate_feedback(xhat, Vector::Zero(2), K_xi, K_x, grid).norm() == 0.0);
    }
    SUBCASE("no distributed gain leaves the lumped term") {
        SpatialMatrixFunction zeroKx(grid, 1, 2);
        Matrix xhat = Matrix::Random(2, grid.nodes());
        Vector xi(2);
        xi << 0.5, -0.25;
        Vector u = evaluate_feedback(xhat, xi, K_xi, zeroKx, grid);
        CHECK((u + K_xi * xi).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("quadrature converges second order on smooth data") {
        auto integral_on = [&](int N) {
            Grid g(N);
            SpatialMatrixFunction Kg(g, 1, 2);
            Matrix xh(2, g.nodes());
            for (int k = 0; k <= g.N; ++k) {
                double z = g.z(k);
                Kg.at_node(k) << std::sin(3 * z), std::cos(2 * z);
                xh.col(k) << std::exp(z), z * z;
            }
            return evaluate_feedback(xh, Vector::Zero(2), Matrix::Zero(1, 2), Kg, g)(0);
        };
        double i1 = integral_on(50), i2 = integral_on(100), i4 = integral_on(400);
        // Richardson: err(N) ~ C/N^2, so (i1 - i4) / (i2 - i4) ~ 4
        double ratio = (i1 - i4) / (i2 - i4);
        CHECK(ratio >= 3.5);
        CHECK(ratio <= 4.5);
    }
}

TEST_CASE("pure transport with zero inflow drains the domain") {
    auto spec = transport_pair();
    Grid grid(200);
    SimConfig cfg;
    cfg.cfl = 0.9;
    cfg.t_final = 1.5;
    // compactly supported bump entering through the sampled-table backing
    std::vector<double> bump(grid.nodes(), 0.0);
    for (int k = 0; k <= grid.N; ++k) {
        double z = grid.z(k);
        if (z > 0.2 && z < 0.8) {
            double s = (z - 0.2) / 0.6;
            bump[k] = std::sin(M_PI * s) * std::sin(M_PI * s);
        }
    }
    cfg.x0 = {ScalarFunction::from_samples(bump), ScalarFunction::constant(0.0)};
    cfg.xi0 = Vector::Zero(1);
    cfg.xhat0.assign(2, ScalarFunction::constant(0.0));
    cfg.xihat0 = Vector::Zero(1);

    Grid g(200);
    SpatialMatrixFunction zeroKx(g, 1, 2), zeroL(g, 2, 1);
    SimTrace tr = simulate_closed_loop(spec, g, Matrix::Zero(1, 1), zeroKx,
                                       Matrix::Zero(1, 1), zeroL, cfg, FeedbackMode::OpenLoop);
    REQUIRE_FALSE(tr.blew_up);
    double transit = 1.0; // phi_1(1) at unit speed
    CHECK(tr.tail_max(tr.sup_x, transit + 5 * g.h()) <= 1e-6);
    CHECK(tr.peak(tr.sup_x) >= 0.9); // the bump was actually there
}

TEST_CASE("CFL is respected") {
    auto cfg = example_config(64, 0.5);
    auto r = run_design(cfg);
    SimTrace tr = simulate_closed_loop(cfg.plant, r.grid, r.gains.K_xi, r.gains.K_x,
                                       r.obs_gains.L_xi, r.obs_gains.L, cfg.sim);
    double max_speed = 3.0;
    CHECK(tr.dt * max_speed / r.grid.h() <= cfg.sim.cfl + 1e-12);
    // uniform steps land exactly on t_final
    CHECK(tr.t.back() == doctest::Approx(cfg.sim.t_final).epsilon(1e-12));
}

TEST_CASE("closed-loop demo run settles") {
    auto cfg = example_config(100, 6.0);
    auto r = run_design(cfg);
    SimTrace tr = simulate_closed_loop(cfg.plant, r.grid, r.gains.K_xi, r.gains.K_x,
                                       r.obs_gains.L_xi, r.obs_gains.L, cfg.sim);
    REQUIRE_FALSE(tr.blew_up);
    CHECK(tr.tail_max(tr.eps_xi_norm, 2.5) <= 0.02 * tr.peak(tr.eps_xi_norm));
    CHECK(tr.tail_max(tr.sup_x, 4.5) <= 0.02 * tr.peak(tr.sup_x));
    CHECK(tr.tail_max(tr.xi_norm, 4.5) <= 0.02 * tr.peak(tr.xi_norm));
    // the recorded measurement is the top block of the plant state at z = 0
    for (size_t s = 0; s < tr.snapshot_t.size(); ++s) {
        const Vector& y = tr.y[tr.snapshot_step[s]];
        CHECK((y - tr.x_snaps[s].col(0).head(2)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("grid refinement tightens the post-settling residue") {
    auto run = [&](int N) {
        auto cfg = example_config(N, 6.0);
        auto r = run_design(cfg);
        SimTrace tr = simulate_closed_loop(cfg.plant, r.grid, r.gains.K_xi, r.gains.K_x,
                                           r.obs_gains.L_xi, r.obs_gains.L, cfg.sim);
        return tr.tail_max(tr.sup_x, 4.5);
    };
    double coarse = run(100), fine = run(200);
    CHECK(coarse / fine >= 1.5);
}

TEST_CASE("observer error system") {
    SUBCASE("zero initial error stays identically zero") {
        auto cfg = example_config(64, 2.0);
        cfg.sim.xhat0 = cfg.sim.x0;
        cfg.sim.xihat0 = cfg.sim.xi0;
        auto r = run_design(cfg);
        SimTrace tr = simulate_error_system(cfg.plant, r.grid, r.obs_gains.L_xi,
                                            r.obs_gains.L, cfg.sim);
        CHECK(tr.peak(tr.sup_x) == 0.0);
        CHECK(tr.peak(tr.eps_xi_norm) == 0.0);
    }
    SUBCASE("error decays and the lumped tail follows the observer poles") {
        auto cfg = example_config(100, 4.0);
        auto r = run_design(cfg);
        SimTrace tr = simulate_error_system(cfg.plant, r.grid, r.obs_gains.L_xi,
                                            r.obs_gains.L, cfg.sim);
        REQUIRE_FALSE(tr.blew_up);
        CHECK(tr.tail_max(tr.eps_xi_norm, 3.0) <= 0.02 * tr.peak(tr.eps_xi_norm));
    }
    SUBCASE("lumped error decays at the slowest observer pole rate") {
        // Least-squares log-slope of |eps_xi| over [t_o + 0.5, t_o + 1.5]
        // against the dominant pole -5, within 20%. Needs a parameter draw
        // whose slowest mode stays above the scheme's dissipation remnant
        // over that window; the default demo draw trades that visibility for
        // gentler closed-loop transients, so this check uses its own.
        auto cfg = example_config(200, 4.0);
        cfg.design.seed = (1ULL << 32) | 1ULL;
        auto r = run_design(cfg);
        SimTrace tr = simulate_error_system(cfg.plant, r.grid, r.obs_gains.L_xi,
                                            r.obs_gains.L, cfg.sim);
        double t_o = r.times.t_o;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (size_t k = 0; k < tr.t.size(); ++k)
            if (tr.t[k] >= t_o + 0.5 && tr.t[k] <= t_o + 1.5 && tr.eps_xi_norm[k] > 0) {
                double X = tr.t[k], Y = std::log(tr.eps_xi_norm[k]);
                sx += X;
                sy += Y;
                sxx += X * X;
                sxy += X * Y;
                ++cnt;
            }
        double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        CAPTURE(slope);
        CHECK(slope <= 0.8 * -5.0);
        CHECK(slope >= 1.2 * -5.0);
    }
}

TEST_CASE("blow-up guard aborts with a diagnostic") {
    // destabilize by flipping the sign of every gain
    auto cfg = example_config(64, 40.0);
    auto r = run_design(cfg);
    SpatialMatrixFunction negKx(r.grid, 2, 4), negL(r.grid, 4, 2);
    for (int k = 0; k <= r.grid.N; ++k) {
        negKx.at_node(k) = -r.gains.K_x.at_node(k);
        negL.at_node(k) = -r.obs_gains.L.at_node(k);
    }
    SimTrace tr = simulate_closed_loop(cfg.plant, r.grid, -r.gains.K_xi, negKx,
                                       -r.obs_gains.L_xi, negL, cfg.sim);
    CHECK(tr.blew_up);
    CHECK(tr.blowup_time > 0.0);
    CHECK(tr.blowup_time < 40.0);
}
