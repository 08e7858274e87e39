#include "drddpc/solver.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <vector>

namespace drddpc {

namespace {

double inf_norm(const VectorXd &v) {
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

// Largest alpha in (0, 1] keeping v + alpha * dv strictly positive, with
// the usual fraction-to-boundary damping.
double step_length(const VectorXd &v, const VectorXd &dv) {
    double alpha = 1.0;
    for (int i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
    return std::min(1.0, 0.995 * alpha);
}

} // namespace

Solution solve(const ConvexProgram &prog, const SolveOptions &opts) {
    const int n = prog.num_vars();
    const int ne = static_cast<int>(prog.A_eq.rows());
    const int mi = static_cast<int>(prog.A_in.rows());
    const double reg = 1e-10;

    Solution sol;
    sol.z = opts.warm_start && opts.warm_start->size() == n
                ? *opts.warm_start
                : VectorXd::Zero(n);

    // Equality-only programs reduce to one KKT linear solve.
    if (mi == 0) {
        MatrixXd K = MatrixXd::Zero(n + ne, n + ne);
        K.topLeftCorner(n, n) = prog.H + reg * MatrixXd::Identity(n, n);
        if (ne > 0) {
            K.topRightCorner(n, ne) = prog.A_eq.transpose();
            K.bottomLeftCorner(ne, n) = prog.A_eq;
            K.bottomRightCorner(ne, ne) = -reg * MatrixXd::Identity(ne, ne);
        }
        VectorXd rhs(n + ne);
        rhs.head(n) = -prog.f;
        if (ne > 0) rhs.tail(ne) = prog.b_eq;
        const VectorXd sv = K.partialPivLu().solve(rhs);
        sol.z = sv.head(n);
        sol.y_eq = ne > 0 ? VectorXd(sv.tail(ne)) : VectorXd();
        sol.y_in = VectorXd();
        sol.objective = prog.objective(sol.z);
        sol.dual_residual = inf_norm(prog.H * sol.z + prog.f +
                                     (ne > 0 ? VectorXd(prog.A_eq.transpose() *
                                                        sol.y_eq)
                                             : VectorXd::Zero(n)));
        sol.primal_residual =
            ne > 0 ? inf_norm(prog.A_eq * sol.z - prog.b_eq) : 0.0;
        sol.iterations = 1;
        const double sc = 1.0 + std::abs(sol.objective);
        sol.status = (sol.dual_residual <= opts.tol_d * sc &&
                      sol.primal_residual <= opts.tol_p * sc)
                         ? SolveStatus::Optimal
                         : SolveStatus::Unbounded;
        return sol;
    }

    VectorXd x = sol.z;
    VectorXd y = VectorXd::Zero(ne);
    VectorXd s(mi), lam(mi);
    {
        const VectorXd slack0 = prog.b_in - prog.A_in * x;
        for (int i = 0; i < mi; ++i) s(i) = std::max(slack0(i), 1.0);
        lam.setOnes();
    }

    const double bscale = 1.0 + std::max(inf_norm(prog.b_eq),
                                         inf_norm(prog.b_in));
    

    // Rows of A_in touching a single variable (bounds) contribute only a
    // diagonal term to the normal matrix; splitting them out keeps the per
    // iteration cost low for programs dominated by sign constraints.
    std::vector<int> bound_col(mi, -1);
    VectorXd bound_coef = VectorXd::Zero(mi);
    std::vector<int> general_rows;
    for (int i = 0; i < mi; ++i) {
        int nnz = 0, col = -1;
        for (int j = 0; j < n; ++j)
            if (prog.A_in(i, j) != 0.0) {
                ++nnz;
                col = j;
                if (nnz > 1) break;
            }
        if (nnz <= 1) {
            bound_col[i] = col;
            if (col >= 0) bound_coef(i) = prog.A_in(i, col);
        } else {
            general_rows.push_back(i);
        }
    }
    MatrixXd A_gen(static_cast<int>(general_rows.size()), n);
    for (int k = 0; k < static_cast<int>(general_rows.size()); ++k)
        A_gen.row(k) = prog.A_in.row(general_rows[k]);

    int stall = 0;
    const int iter_cap = std::min(opts.max_iter, 500);
    for (int it = 1; it <= iter_cap; ++it) {
        const VectorXd rd = prog.H * x + prog.f +
                            (ne > 0 ? VectorXd(prog.A_eq.transpose() * y)
                                    : VectorXd::Zero(n)) +
                            prog.A_in.transpose() * lam;
        const VectorXd re =
            ne > 0 ? VectorXd(prog.A_eq * x - prog.b_eq) : VectorXd();
        const VectorXd ri = prog.A_in * x + s - prog.b_in;
        const double mu = s.dot(lam) / mi;

        sol.iterations = it;
        sol.dual_residual = inf_norm(rd);
        sol.primal_residual =
            std::max(inf_norm(re),
                     inf_norm((prog.A_in * x - prog.b_in).cwiseMax(0.0)));
        sol.objective = prog.objective(x);
        const double objscale = 1.0 + std::abs(sol.objective);
        if (sol.primal_residual <= opts.tol_p &&
            sol.dual_residual <= opts.tol_d &&
            mu * mi <= 1e-8 * objscale) {
            sol.status = SolveStatus::Optimal;
            break;
        }

        // Divergence-based certificates.
        if (std::max(inf_norm(lam), inf_norm(y)) > 1e10 &&
            sol.primal_residual > opts.tol_p * bscale) {
            sol.status = SolveStatus::Infeasible;
            break;
        }
        if (inf_norm(x) > 1e12 || sol.objective < -1e14) {
            sol.status = SolveStatus::Unbounded;
            break;
        }

        const VectorXd d = (lam.array() / s.array()).matrix();
        MatrixXd K = MatrixXd::Zero(n + ne, n + ne);
        K.topLeftCorner(n, n) = prog.H;
        K.topLeftCorner(n, n).diagonal().array() += reg;
        for (int i = 0; i < mi; ++i)
            if (bound_col[i] >= 0)
                K(bound_col[i], bound_col[i]) +=
                    d(i) * bound_coef(i) * bound_coef(i);
        if (A_gen.rows() > 0) {
            VectorXd d_gen(A_gen.rows());
            for (int k = 0; k < A_gen.rows(); ++k)
                d_gen(k) = d(general_rows[k]);
            K.topLeftCorner(n, n).noalias() +=
                A_gen.transpose() * d_gen.asDiagonal() * A_gen;
        }
        if (ne > 0) {
            K.topRightCorner(n, ne) = prog.A_eq.transpose();
            K.bottomLeftCorner(ne, n) = prog.A_eq;
            K.bottomRightCorner(ne, ne) = -reg * MatrixXd::Identity(ne, ne);
        }
        Eigen::PartialPivLU<MatrixXd> lu(K);

        auto solve_dir = [&](const VectorXd &rhs_c, VectorXd &dx,
                             VectorXd &dy, VectorXd &ds, VectorXd &dlam) {
            const VectorXd t =
                ((rhs_c.array() + lam.array() * ri.array()) / s.array())
                    .matrix();
            VectorXd rhs(n + ne);
            rhs.head(n) = -rd - prog.A_in.transpose() * t;
            if (ne > 0) rhs.tail(ne) = -re;
            const VectorXd sv = lu.solve(rhs);
            dx = sv.head(n);
            dy = ne > 0 ? VectorXd(sv.tail(ne)) : VectorXd();
            ds = -ri - prog.A_in * dx;
            dlam = ((rhs_c.array() - lam.array() * ds.array()) / s.array())
                       .matrix();
        };

        // Predictor.
        VectorXd dx_a, dy_a, ds_a, dlam_a;
        solve_dir((-(s.array() * lam.array())).matrix(), dx_a, dy_a, ds_a,
                  dlam_a);
        const double ap_a = step_length(s, ds_a);
        const double ad_a = step_length(lam, dlam_a);
        const double mu_aff =
            (s + ap_a * ds_a).dot(lam + ad_a * dlam_a) / mi;
        const double sigma = std::pow(mu_aff / mu, 3.0);

        // Corrector.
        VectorXd rhs_c =
            (sigma * mu - (s.array() * lam.array()) -
             (ds_a.array() * dlam_a.array()))
                .matrix();
        VectorXd dx, dy, ds, dlam;
        solve_dir(rhs_c, dx, dy, ds, dlam);
        // A numerically singular KKT system yields non-finite directions;
        // keep the last finite iterate instead of stepping into NaN.
        if (!dx.allFinite() || !ds.allFinite() || !dlam.allFinite() ||
            !dx_a.allFinite() || (ne > 0 && !dy.allFinite())) {
            sol.status = SolveStatus::MaxIterations;
            break;
        }
        const double ap = step_length(s, ds);
        const double ad = step_length(lam, dlam);

        x += ap * dx;
        s += ap * ds;
        if (ne > 0) y += ad * dy;
        lam += ad * dlam;

        if (ap < 1e-10 && ad < 1e-10) {
            if (++stall >= 5) {
                sol.status = sol.primal_residual > opts.tol_p * bscale
                                 ? SolveStatus::Infeasible
                                 : SolveStatus::MaxIterations;
                break;
            }
        } else {
            stall = 0;
        }
        if (it == iter_cap) sol.status = SolveStatus::MaxIterations;
    }

    sol.z = x;
    sol.y_eq = y;
    sol.y_in = lam;
    sol.objective = prog.objective(x);
    return sol;
}

KktResiduals check_kkt(const ConvexProgram &prog, const VectorXd &z,
                       const VectorXd &y_eq, const VectorXd &y_in) {
    const int n = prog.num_vars();
    KktResiduals r;
    VectorXd stat = prog.H * z + prog.f;
    if (prog.A_eq.rows() > 0) stat += prog.A_eq.transpose() * y_eq;
    if (prog.A_in.rows() > 0) stat += prog.A_in.transpose() * y_in;
    r.stationarity = inf_norm(stat);
    double primal = 0.0;
    if (prog.A_eq.rows() > 0)
        primal = inf_norm(prog.A_eq * z - prog.b_eq);
    double comp = 0.0;
    if (prog.A_in.rows() > 0) {
        const VectorXd slack = prog.b_in - prog.A_in * z;
        primal = std::max(primal, inf_norm(slack.cwiseMin(0.0)));
        comp = inf_norm((y_in.array() * slack.array()).matrix());
        comp = std::max(comp, inf_norm(y_in.cwiseMin(0.0)));
    }
    r.primal = primal;
    r.complementarity = comp;
    (void)n;
    return r;
}

} // namespace drddpc
