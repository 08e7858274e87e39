#include "drddpc/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace drddpc {

void PastWindow::push(const VectorXd &u_k, const VectorXd &y_k) {
    const int Tp = static_cast<int>(u.rows());
    if (Tp > 1) {
        u.topRows(Tp - 1) = u.bottomRows(Tp - 1).eval();
        y.topRows(Tp - 1) = y.bottomRows(Tp - 1).eval();
    }
    u.row(Tp - 1) = u_k.transpose();
    y.row(Tp - 1) = y_k.transpose();
}

VectorXd PastWindow::u_vec() const {
    VectorXd out(u.size());
    for (int t = 0; t < u.rows(); ++t)
        out.segment(t * u.cols(), u.cols()) = u.row(t).transpose();
    return out;
}

VectorXd PastWindow::y_vec() const {
    VectorXd out(y.size());
    for (int t = 0; t < y.rows(); ++t)
        out.segment(t * y.cols(), y.cols()) = y.row(t).transpose();
    return out;
}

ControllerContext make_context(const Trajectory &offline, int Tp, int Tf) {
    ControllerContext ctx;
    ctx.part = partition(offline, Tp, Tf);
    ctx.pred = fit(ctx.part);
    return ctx;
}

void warm_up(const StateSpaceModel &model, const NoiseRealization &noise,
             int Tp, VectorXd &state, PastWindow &window) {
    if (Tp < 1) throw std::invalid_argument("warm_up: Tp < 1");
    if (noise.e.rows() < Tp)
        throw std::invalid_argument("warm_up: noise realization too short");
    const MatrixXd u0 = MatrixXd::Zero(Tp, model.m);
    const Trajectory traj =
        simulate(model, noise.x0, u0, noise.e.topRows(Tp), &state);
    window.u = traj.u;
    window.y = traj.y;
}

namespace {

const char *status_word(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIterations: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

VectorXd clamp_to_box(VectorXd v, const VectorXd &lo, const VectorXd &hi) {
    for (int i = 0; i < v.size(); ++i) {
        if (std::isfinite(hi(i))) v(i) = std::min(v(i), hi(i));
        if (std::isfinite(lo(i))) v(i) = std::max(v(i), lo(i));
    }
    return v;
}

} // namespace

StepResult control_step(const ControllerConfig &cfg,
                        const ControllerContext &ctx,
                        const PastWindow &window, const VectorXd &yr_window,
                        const VectorXd &u_plan_prev) {
    const int m = ctx.part.m;
    const int mTf = m * cfg.Tf;
    const VectorXd u_p = window.u_vec();
    const VectorXd y_p = window.y_vec();

    // Surrogate future-input block for the data-dependent radius: the
    // previous optimal plan shifted one step with the last block repeated.
    VectorXd u_guess = VectorXd::Zero(mTf);
    if (u_plan_prev.size() == mTf) {
        u_guess.head(mTf - m) = u_plan_prev.tail(mTf - m);
        u_guess.tail(m) = u_plan_prev.tail(m);
    }
    VectorXd m_f(u_p.size() + y_p.size() + mTf);
    m_f << u_p, y_p, u_guess;

    CostSpec costs = cfg.costs;
    costs.output.y_ref = yr_window;

    OcpProgram ocp;
    switch (cfg.kind) {
    case ControllerKind::SPC:
        ocp = build_spc_baseline(ctx.pred, m_f, costs, cfg.cons);
        break;
    case ControllerKind::RegDeePC:
        ocp = build_reg_deepc(ctx.part, u_p, y_p, costs, cfg.cons,
                              cfg.lambda_g);
        break;
    case ControllerKind::DRDDPC: {
        const RadiusPair eps =
            radius(cfg.radius, ctx.part.M, m_f, ctx.part.N,
                   ctx.part.p * cfg.Tf);
        if (cfg.use_direct)
            ocp = build_direct_form(ctx.part, ctx.pred, u_p, y_p, costs,
                                    cfg.cons, eps.eps_obj, eps.eps_con);
        else
            ocp = build_spc_form(ctx.pred, m_f, costs, cfg.cons, eps.eps_obj,
                                 eps.eps_con);
        break;
    }
    }

    const Solution sol = solve(ocp.prog, cfg.solver);

    StepResult res;
    res.status = sol.status;
    if (sol.status == SolveStatus::Infeasible ||
        sol.status == SolveStatus::Unbounded || !sol.z.allFinite()) {
        res.fallback = true;
        VectorXd hold = u_plan_prev.size() == mTf
                            ? VectorXd(u_plan_prev.head(m))
                            : VectorXd::Zero(m);
        res.u = clamp_to_box(std::move(hold), cfg.cons.u_lo.head(m),
                             cfg.cons.u_hi.head(m));
        res.u_plan = u_guess;
        return res;
    }

    const ControlSolution cs = extract_solution(ocp, sol.z);
    res.u_plan = cs.u_f;
    res.u = clamp_to_box(cs.u_f.head(m), cfg.cons.u_lo.head(m),
                         cfg.cons.u_hi.head(m));
    res.objective = cs.objective;
    res.cvar_slack = cs.cvar_soft;
    return res;
}

ClosedLoopTrace run_closed_loop(const StateSpaceModel &model,
                                const ControllerConfig &cfg,
                                const ControllerContext &ctx,
                                const NoiseRealization &noise,
                                const Reference &reference, int T_run) {
    if (noise.e.rows() < cfg.Tp + T_run)
        throw std::invalid_argument(
            "run_closed_loop: noise realization too short");

    VectorXd x;
    PastWindow window;
    warm_up(model, noise, cfg.Tp, x, window);

    ClosedLoopTrace trace;
    trace.u = MatrixXd::Zero(T_run, model.m);
    trace.y = MatrixXd::Zero(T_run, model.p);
    trace.yr = MatrixXd::Zero(T_run, model.p);
    trace.objective = VectorXd::Zero(T_run);
    trace.cvar_slack = VectorXd::Zero(T_run);
    trace.status.resize(T_run);
    trace.fallback.assign(T_run, 0);

    VectorXd u_plan_prev;
    for (int k = 0; k < T_run; ++k) {
        VectorXd yr_window(model.p * cfg.Tf);
        for (int j = 0; j < cfg.Tf; ++j)
            yr_window.segment(j * model.p, model.p) = reference(k + j);

        const StepResult res =
            control_step(cfg, ctx, window, yr_window, u_plan_prev);
        u_plan_prev = res.u_plan;

        VectorXd x_next, y_k;
        step(model, x, res.u, noise.e.row(cfg.Tp + k).transpose(), x_next,
             y_k);
        x = x_next;

        trace.u.row(k) = res.u.transpose();
        trace.y.row(k) = y_k.transpose();
        trace.yr.row(k) = reference(k).transpose();
        trace.status[k] = res.status;
        trace.fallback[k] = res.fallback ? 1 : 0;
        trace.objective(k) = res.objective;
        trace.cvar_slack(k) = res.cvar_slack;

        window.push(res.u, y_k);
    }
    return trace;
}

void ClosedLoopTrace::write_csv(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("ClosedLoopTrace: cannot open " + path);
    const int m = static_cast<int>(u.cols());
    const int p = static_cast<int>(y.cols());
    out << "k";
    auto cols = [&](const char *base, int count) {
        if (count == 1)
            out << "," << base;
        else
            for (int i = 1; i <= count; ++i) out << "," << base << "_" << i;
    };
    cols("u", m);
    cols("y", p);
    cols("yr", p);
    out << ",status,objective,cvar_slack\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        out << buf;
    };
    for (int k = 0; k < length(); ++k) {
        out << k;
        for (int i = 0; i < m; ++i) put(u(k, i));
        for (int i = 0; i < p; ++i) put(y(k, i));
        for (int i = 0; i < p; ++i) put(yr(k, i));
        out << "," << status_word(status[k]) << (fallback[k] ? "_hold" : "");
        put(objective(k));
        put(cvar_slack(k));
        out << "\n";
    }
}

} // namespace drddpc
