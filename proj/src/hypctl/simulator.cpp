#include "hypctl/simulator.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace hypctl {

double SimTrace::peak(const std::vector<double>& series) const {
    double m = 0.0;
    for (double v : series)
        m = std::max(m, v);
    return m;
}

double SimTrace::tail_max(const std::vector<double>& series, double t0) const {
    double m = 0.0;
    for (size_t k = 0; k < series.size(); ++k)
        if (t[k] > t0)
            m = std::max(m, series[k]);
    return m;
}

Vector evaluate_feedback(const Matrix& xhat, const Vector& xihat, const Matrix& K_xi,
                         const SpatialMatrixFunction& K_x, const Grid& grid) {
    Vector acc = -K_xi * xihat;
    const double h = grid.h();
    for (int k = 0; k <= grid.N; ++k)
        acc -= h * trapezoid_weight(k, grid.N) * (K_x.at_node(k) * xhat.col(k));
    return acc;
}

namespace {

struct StepWorkspace {
    const PlantSpec& spec;
    const Grid& grid;
    std::vector<Vector> lambda_nodes; // per node, n speeds
    std::vector<Matrix> A_nodes, C1_nodes;
    double max_speed = 0.0;

    StepWorkspace(const PlantSpec& s, const Grid& g) : spec(s), grid(g) {
        lambda_nodes.resize(g.nodes());
        A_nodes.resize(g.nodes());
        C1_nodes.resize(g.nodes());
        for (int k = 0; k <= g.N; ++k) {
            double z = g.z(k);
            Vector lam(s.n);
            for (int i = 0; i < s.n; ++i) {
                lam(i) = s.lambda[i](z);
                max_speed = std::max(max_speed, std::abs(lam(i)));
            }
            lambda_nodes[k] = lam;
            A_nodes[k] = s.A.eval(z);
            C1_nodes[k] = s.C1.eval(z);
        }
    }

    // One upwind transport step: forward difference for positive speeds
    // (inflow at z=1), backward for negative (inflow at z=0); `source`
    // supplies the zero-order terms at each node.
    template <typename SourceFn>
    void advect(const Matrix& X, Matrix& Xnew, double dt, SourceFn&& source) const {
        const int N = grid.N;
        const double h = grid.h();
        for (int k = 0; k <= N; ++k) {
            Vector s = source(k);
            for (int i = 0; i < spec.n; ++i) {
                double lam = lambda_nodes[k](i);
                if (i < spec.p) {
                    if (k == N)
                        continue; // set by the boundary condition
                    Xnew(i, k) = X(i, k) + dt * lam * (X(i, k + 1) - X(i, k)) / h + dt * s(i);
                } else {
                    if (k == 0)
                        continue;
                    Xnew(i, k) = X(i, k) + dt * lam * (X(i, k) - X(i, k - 1)) / h + dt * s(i);
                }
            }
        }
    }
};

Vector rk4_step(const Vector& x, double dt, const std::function<Vector(const Vector&)>& f) {
    Vector k1 = f(x);
    Vector k2 = f(x + 0.5 * dt * k1);
    Vector k3 = f(x + 0.5 * dt * k2);
    Vector k4 = f(x + dt * k3);
    return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

Matrix initial_profile(const std::vector<ScalarFunction>& profile, int n, const Grid& grid) {
    Matrix X = Matrix::Zero(n, grid.nodes());
    if (profile.empty())
        return X;
    if (static_cast<int>(profile.size()) != n)
        throw std::invalid_argument("simulate: initial profile needs n components");
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= grid.N; ++k)
            X(i, k) = profile[i](grid.z(k));
    return X;
}

constexpr double kBlowupGuard = 1e12;

} // namespace

SimTrace simulate_closed_loop(const PlantSpec& spec, const Grid& grid, const Matrix& K_xi,
                              const SpatialMatrixFunction& K_x, const Matrix& L_xi,
                              const SpatialMatrixFunction& L, const SimConfig& cfg,
                              FeedbackMode mode) {
    StepWorkspace ws(spec, grid);
    const double h = grid.h();
    double dt = cfg.cfl * h / ws.max_speed;
    const int steps = std::max(1, static_cast<int>(std::ceil(cfg.t_final / dt)));
    dt = cfg.t_final / steps; // land exactly on t_final, CFL only tightens

    SimTrace trace;
    trace.dt = dt;
    trace.grid_N = grid.N;

    Matrix X = initial_profile(cfg.x0, spec.n, grid);
    Matrix Xh = initial_profile(cfg.xhat0, spec.n, grid);
    Vector xi = cfg.xi0.size() ? cfg.xi0 : Vector::Zero(spec.n_xi);
    Vector xih = cfg.xihat0.size() ? cfg.xihat0 : Vector::Zero(spec.n_xi);

    const bool with_observer = mode == FeedbackMode::OutputFeedback;
    Matrix Xnew = X, Xhnew = Xh;
    Vector u = Vector::Zero(spec.p);

    auto record = [&](int step, double time) {
        trace.t.push_back(time);
        trace.xi.push_back(xi);
        trace.xihat.push_back(xih);
        trace.u.push_back(u);
        trace.y.push_back(X.col(0).head(spec.p));
        trace.eps_xi_norm.push_back((xi - xih).norm());
        trace.xi_norm.push_back(xi.norm());
        trace.sup_x.push_back(X.cwiseAbs().maxCoeff());
        trace.sup_xhat.push_back(Xh.cwiseAbs().maxCoeff());
        if (step % std::max(1, cfg.output_decimation) == 0 || step == steps) {
            trace.snapshot_t.push_back(time);
            trace.snapshot_step.push_back(step);
            trace.x_snaps.push_back(X);
            trace.xhat_snaps.push_back(Xh);
        }
    };

    // Initial u consistent with the stored state.
    Vector y = X.col(0).head(spec.p);
    auto control_value = [&]() -> Vector {
        switch (mode) {
        case FeedbackMode::OutputFeedback:
            return -spec.Q1 * Xh.col(grid.N).tail(spec.m) +
                   evaluate_feedback(Xh, xih, K_xi, K_x, grid);
        case FeedbackMode::StateFeedback:
            return -spec.Q1 * X.col(grid.N).tail(spec.m) +
                   evaluate_feedback(X, xi, K_xi, K_x, grid);
        case FeedbackMode::OpenLoop:
            return Vector::Zero(spec.p);
        }
        return Vector::Zero(spec.p);
    };
    u = control_value();
    record(0, 0.0);

    for (int step = 1; step <= steps; ++step) {
        y = X.col(0).head(spec.p);
        const Vector innov = y - Xh.col(0).head(spec.p);

        Vector xi_new = rk4_step(xi, dt, [&](const Vector& s) -> Vector {
            return spec.F * s + spec.B * y;
        });
        Vector xih_new = xih;
        if (with_observer)
            xih_new = rk4_step(xih, dt, [&](const Vector& s) -> Vector {
                return spec.F * s + spec.B * y + L_xi * innov;
            });

        ws.advect(X, Xnew, dt, [&](int k) -> Vector {
            return ws.A_nodes[k] * X.col(k) + ws.C1_nodes[k] * xi;
        });
        if (with_observer)
            ws.advect(Xh, Xhnew, dt, [&](int k) -> Vector {
                return ws.A_nodes[k] * Xh.col(k) + ws.C1_nodes[k] * xih + L.at_node(k) * innov;
            });

        xi = xi_new;
        X.swap(Xnew);
        if (with_observer) {
            xih = xih_new;
            Xh.swap(Xhnew);
        }

        // Boundary conditions at the new time level.
        Vector y_new = X.col(0).head(spec.p);
        X.col(0).tail(spec.m) = spec.Q0 * y_new + spec.C2 * xi;
        if (with_observer)
            Xh.col(0).tail(spec.m) = spec.Q0 * y_new + spec.C2 * xih;
        u = control_value();
        X.col(grid.N).head(spec.p) = spec.Q1 * X.col(grid.N).tail(spec.m) + u;
        if (with_observer)
            Xh.col(grid.N).head(spec.p) = spec.Q1 * Xh.col(grid.N).tail(spec.m) + u;

        record(step, step * dt);

        if (X.cwiseAbs().maxCoeff() > kBlowupGuard || xi.cwiseAbs().maxCoeff() > kBlowupGuard ||
            (with_observer && Xh.cwiseAbs().maxCoeff() > kBlowupGuard)) {
            trace.blew_up = true;
            trace.blowup_time = step * dt;
            break;
        }
    }
    return trace;
}

SimTrace simulate_error_system(const PlantSpec& spec, const Grid& grid, const Matrix& L_xi,
                               const SpatialMatrixFunction& L, const SimConfig& cfg) {
    StepWorkspace ws(spec, grid);
    const double h = grid.h();
    double dt = cfg.cfl * h / ws.max_speed;
    const int steps = std::max(1, static_cast<int>(std::ceil(cfg.t_final / dt)));
    dt = cfg.t_final / steps;

    SimTrace trace;
    trace.dt = dt;
    trace.grid_N = grid.N;

    Matrix E = initial_profile(cfg.x0, spec.n, grid) - initial_profile(cfg.xhat0, spec.n, grid);
    Vector exi = (cfg.xi0.size() ? cfg.xi0 : Vector::Zero(spec.n_xi)) -
                 (cfg.xihat0.size() ? cfg.xihat0 : Vector::Zero(spec.n_xi));
    Matrix Enew = E;

    auto record = [&](int step, double time) {
        trace.t.push_back(time);
        trace.xi.push_back(exi);
        trace.eps_xi_norm.push_back(exi.norm());
        trace.xi_norm.push_back(exi.norm());
        trace.sup_x.push_back(E.cwiseAbs().maxCoeff());
        if (step % std::max(1, cfg.output_decimation) == 0 || step == steps) {
            trace.snapshot_t.push_back(time);
            trace.snapshot_step.push_back(step);
            trace.x_snaps.push_back(E);
        }
    };
    record(0, 0.0);

    for (int step = 1; step <= steps; ++step) {
        const Vector e1_0 = E.col(0).head(spec.p);
        Vector exi_new = rk4_step(exi, dt, [&](const Vector& s) -> Vector {
            return spec.F * s - L_xi * e1_0;
        });
        ws.advect(E, Enew, dt, [&](int k) -> Vector {
            return ws.A_nodes[k] * E.col(k) + ws.C1_nodes[k] * exi - L.at_node(k) * e1_0;
        });
        exi = exi_new;
        E.swap(Enew);

        E.col(0).tail(spec.m) = spec.C2 * exi;
        E.col(grid.N).head(spec.p) = spec.Q1 * E.col(grid.N).tail(spec.m);

        record(step, step * dt);
        if (E.cwiseAbs().maxCoeff() > kBlowupGuard || exi.cwiseAbs().maxCoeff() > kBlowupGuard) {
            trace.blew_up = true;
            trace.blowup_time = step * dt;
            break;
        }
    }
    return trace;
}

} // namespace hypctl
