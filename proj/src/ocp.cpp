#include "drddpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drddpc {

std::vector<int> constraint_subset(int N, int n_con) {
    if (n_con < 1 || n_con > N)
        throw std::invalid_argument("constraint_subset: need 1 <= n_con <= N");
    std::vector<int> idx(n_con);
    for (int j = 1; j <= n_con; ++j)
        idx[j - 1] =
            static_cast<int>((static_cast<long long>(j) * N + n_con - 1) /
                             n_con) -
            1;
    return idx;
}

namespace {

// Shared assembly input: every formulation is an affine map from base
// variables to u_f and to the nominal output window, plus optional
// equalities, extra linear cost, sign constraints, and ambiguity terms.
struct AssemblySpec {
    int nb = 0;
    MatrixXd Fu;
    VectorXd fu0;
    MatrixXd Gy;
    VectorXd gy0;
    MatrixXd Aeq; // columns over base variables only
    VectorXd beq;
    VectorXd lin;                // extra linear cost on base (empty = none)
    std::vector<int> nonneg_base;
    const MatrixXd *Xi = nullptr; // residual scenarios; nullptr = nominal
    bool dr = false;
    double eps_obj = 0.0, eps_con = 0.0;
    MatrixXd Fg; // bookkeeping map to g, may be empty
};

struct RowBuffer {
    std::vector<VectorXd> rows;
    std::vector<double> rhs;
    int nv = 0;

    VectorXd &add(double b) {
        rows.emplace_back(VectorXd::Zero(nv));
        rhs.push_back(b);
        return rows.back();
    }
};

OcpProgram assemble(const AssemblySpec &spec, const CostSpec &costs,
                    const ConstraintSpec &cons) {
    const int nb = spec.nb;
    const int pTf = static_cast<int>(spec.Gy.rows());
    const int mTf = static_cast<int>(spec.Fu.rows());
    if (spec.Gy.cols() != nb || spec.Fu.cols() != nb)
        throw std::invalid_argument("assemble: base map width mismatch");
    if (costs.output.y_ref.size() != pTf ||
        costs.input.r_weights.size() != mTf)
        throw std::invalid_argument("assemble: cost dimension mismatch");
    if (cons.y_lo.size() != pTf || cons.y_hi.size() != pTf ||
        cons.u_lo.size() != mTf || cons.u_hi.size() != mTf)
        throw std::invalid_argument("assemble: constraint dimension mismatch");
    if (spec.eps_obj < 0.0 || spec.eps_con < 0.0)
        throw std::invalid_argument("assemble: negative radius");

    const bool epi = costs.output.variant != OutputCostVariant::Quadratic;
    const bool box = cons.has_output_box();
    const bool cvar = spec.dr && box;
    const int n_con = cvar ? cons.n_con_residuals : 0;
    const int N_xi = spec.Xi ? static_cast<int>(spec.Xi->cols()) : 0;
    if (cvar && (N_xi < 1 || n_con > N_xi))
        throw std::invalid_argument("assemble: bad constraint subset size");

    OcpProgram out;
    out.base_dim = nb;
    out.mTf = mTf;
    out.pTf = pTf;
    out.n_con = n_con;
    out.beta = cons.beta;
    out.Fu = spec.Fu;
    out.fu0 = spec.fu0;
    out.Fg = spec.Fg;
    out.eps_obj = spec.eps_obj;
    out.eps_con = spec.eps_con;
    if (spec.dr) {
        const VectorXd dom_lo = VectorXd::Constant(pTf, -5.0);
        const VectorXd dom_hi = VectorXd::Constant(pTf, 5.0);
        out.L_obj = lipschitz(costs.output, costs.wasserstein_r, dom_lo,
                              dom_hi);
        out.L_con = lipschitz_box(costs.wasserstein_r);
    }

    ConvexProgram &prog = out.prog;
    int off = nb;
    prog.layout.push_back({"base", 0, nb});
    const int off_epi = off;
    if (epi) {
        prog.layout.push_back({"epi", off, pTf});
        off += pTf;
    }
    const int off_sbh = off;
    const int off_sbl = off + pTf;
    if (box) {
        prog.layout.push_back({"sbox_hi", off_sbh, pTf});
        prog.layout.push_back({"sbox_lo", off_sbl, pTf});
        off += 2 * pTf;
    }
    const int off_tau = off;
    const int off_s = off + 1;
    const int off_v = off + 1 + n_con;
    if (cvar) {
        prog.layout.push_back({"tau", off_tau, 1});
        prog.layout.push_back({"s", off_s, n_con});
        prog.layout.push_back({"v", off_v, 1});
        off += n_con + 2;
    }
    const int nv = off;

    prog.H = MatrixXd::Zero(nv, nv);
    prog.f = VectorXd::Zero(nv);
    prog.c0 = 0.0;
    RowBuffer buf;
    buf.nv = nv;

    // Input cost f1(u_f) = u' R u through the affine map.
    {
        const MatrixXd RF = costs.input.r_weights.asDiagonal() * spec.Fu;
        prog.H.topLeftCorner(nb, nb).noalias() +=
            2.0 * spec.Fu.transpose() * RF;
        prog.f.head(nb).noalias() += 2.0 * RF.transpose() * spec.fu0;
        prog.c0 += spec.fu0.dot(costs.input.r_weights.asDiagonal() *
                                spec.fu0);
    }

    // Output cost, scenario-averaged when residual atoms are supplied.
    const int n_sc = spec.dr && spec.Xi ? N_xi : 1;
    if (costs.output.variant == OutputCostVariant::Quadratic) {
        VectorXd xi_bar = VectorXd::Zero(pTf);
        double spread = 0.0;
        if (spec.dr && spec.Xi) {
            xi_bar = spec.Xi->rowwise().mean();
            for (int i = 0; i < N_xi; ++i) {
                const VectorXd dev = spec.Xi->col(i) - xi_bar;
                spread += dev.array().square().matrix().dot(
                    costs.output.q_weights);
            }
            spread /= N_xi;
        }
        const VectorXd gsh = spec.gy0 + xi_bar - costs.output.y_ref;
        const MatrixXd QG = costs.output.q_weights.asDiagonal() * spec.Gy;
        prog.H.topLeftCorner(nb, nb).noalias() +=
            2.0 * spec.Gy.transpose() * QG;
        prog.f.head(nb).noalias() += 2.0 * QG.transpose() * gsh;
        prog.c0 += gsh.dot(costs.output.q_weights.asDiagonal() * gsh) +
                   spread;
    } else {
        // Scenario-averaged piecewise-linear cost is separable per output
        // coordinate; lift each coordinate with one epigraph variable and
        // one supporting line per slope segment.
        const double wo = costs.output.variant == OutputCostVariant::L1
                              ? 1.0
                              : costs.output.w_over;
        const double wu = costs.output.variant == OutputCostVariant::L1
                              ? 1.0
                              : costs.output.w_under;
        for (int j = 0; j < pTf; ++j) {
            prog.f(off_epi + j) = 1.0;
            std::vector<double> b(n_sc);
            for (int i = 0; i < n_sc; ++i) {
                const double xi = spec.dr && spec.Xi ? (*spec.Xi)(j, i) : 0.0;
                b[i] = costs.output.y_ref(j) - spec.gy0(j) - xi;
            }
            std::sort(b.begin(), b.end());
            // Value of the averaged cost at the smallest breakpoint, then
            // walk the segments left to right.
            std::vector<double> phi(n_sc);
            phi[0] = 0.0;
            for (int i = 0; i < n_sc; ++i) phi[0] += wu * (b[i] - b[0]);
            phi[0] /= n_sc;
            for (int k = 1; k < n_sc; ++k) {
                const double slope = (k * wo - (n_sc - k) * wu) / n_sc;
                phi[k] = phi[k - 1] + slope * (b[k] - b[k - 1]);
            }
            for (int k = 0; k <= n_sc; ++k) {
                const double slope = (k * wo - (n_sc - k) * wu) / n_sc;
                // Breakpoints already live in (Gy u) space: b absorbs gy0.
                const int anchor = std::max(k - 1, 0);
                const double intercept = phi[anchor] - slope * b[anchor];
                VectorXd &row = buf.add(-intercept);
                row.head(nb) = slope * spec.Gy.row(j);
                row(off_epi + j) = -1.0;
            }
        }
    }

    if (spec.lin.size() > 0) prog.f.head(nb) += spec.lin;
    for (int i : spec.nonneg_base) buf.add(0.0)(i) = -1.0;

    // Hard input box.
    for (int j = 0; j < mTf; ++j) {
        if (std::isfinite(cons.u_hi(j))) {
            VectorXd &row = buf.add(cons.u_hi(j) - spec.fu0(j));
            row.head(nb) = spec.Fu.row(j);
        }
        if (std::isfinite(cons.u_lo(j))) {
            VectorXd &row = buf.add(spec.fu0(j) - cons.u_lo(j));
            row.head(nb) = -spec.Fu.row(j);
        }
    }

    // Soft output box on the nominal prediction.
    if (box) {
        for (int j = 0; j < pTf; ++j) {
            prog.H(off_sbh + j, off_sbh + j) += 2.0 * cons.soft_penalty_box;
            prog.H(off_sbl + j, off_sbl + j) += 2.0 * cons.soft_penalty_box;
            buf.add(0.0)(off_sbh + j) = -1.0;
            buf.add(0.0)(off_sbl + j) = -1.0;
            if (std::isfinite(cons.y_hi(j))) {
                VectorXd &row = buf.add(cons.y_hi(j) - spec.gy0(j));
                row.head(nb) = spec.Gy.row(j);
                row(off_sbh + j) = -1.0;
            }
            if (std::isfinite(cons.y_lo(j))) {
                VectorXd &row = buf.add(spec.gy0(j) - cons.y_lo(j));
                row.head(nb) = -spec.Gy.row(j);
                row(off_sbl + j) = -1.0;
            }
        }
    }

    // CVaR block over the deterministic residual subset, with a scalar
    // soft slack v on the budget row.
    if (cvar) {
        const std::vector<int> sel = constraint_subset(N_xi, n_con);
        for (int c = 0; c < n_con; ++c) {
            const VectorXd xi = spec.Xi->col(sel[c]);
            buf.add(0.0)(off_s + c) = -1.0;
            for (int j = 0; j < pTf; ++j) {
                if (std::isfinite(cons.y_hi(j))) {
                    VectorXd &row =
                        buf.add(cons.y_hi(j) - spec.gy0(j) - xi(j));
                    row.head(nb) = spec.Gy.row(j);
                    row(off_tau) = 1.0;
                    row(off_s + c) = -1.0;
                }
                if (std::isfinite(cons.y_lo(j))) {
                    VectorXd &row =
                        buf.add(spec.gy0(j) + xi(j) - cons.y_lo(j));
                    row.head(nb) = -spec.Gy.row(j);
                    row(off_tau) = 1.0;
                    row(off_s + c) = -1.0;
                }
            }
        }
        VectorXd &budget = buf.add(-out.L_con * spec.eps_con);
        budget(off_tau) = -cons.beta;
        for (int c = 0; c < n_con; ++c) budget(off_s + c) = 1.0 / n_con;
        budget(off_v) = -1.0;
        buf.add(0.0)(off_v) = -1.0;
        prog.H(off_v, off_v) += 2.0 * cons.soft_penalty_cvar;
    }

    if (spec.dr) prog.c0 += out.L_obj * spec.eps_obj;

    // Equalities act on base variables only.
    const int ne = static_cast<int>(spec.Aeq.rows());
    prog.A_eq = MatrixXd::Zero(ne, nv);
    if (ne > 0) {
        prog.A_eq.leftCols(nb) = spec.Aeq;
        prog.b_eq = spec.beq;
    } else {
        prog.b_eq = VectorXd();
    }

    const int mi = static_cast<int>(buf.rows.size());
    prog.A_in = MatrixXd::Zero(mi, nv);
    prog.b_in = VectorXd::Zero(mi);
    for (int i = 0; i < mi; ++i) {
        prog.A_in.row(i) = buf.rows[i];
        prog.b_in(i) = buf.rhs[i];
    }
    return out;
}

void check_window(const VectorXd &u_p, const VectorXd &y_p, int mTp,
                  int pTp) {
    if (u_p.size() != mTp || y_p.size() != pTp)
        throw std::invalid_argument("builder: past window length mismatch");
}

} // namespace

OcpProgram build_spc_form(const SpcPredictor &pred, const VectorXd &m_f,
                          const CostSpec &costs, const ConstraintSpec &cons,
                          double eps_obj, double eps_con) {
    const int mTf = pred.m * pred.Tf;
    const int n_past = pred.m * pred.Tp + pred.p * pred.Tp;
    if (m_f.size() != n_past + mTf)
        throw std::invalid_argument("build_spc_form: m_f length mismatch");

    AssemblySpec spec;
    spec.nb = mTf;
    spec.Fu = MatrixXd::Identity(mTf, mTf);
    spec.fu0 = VectorXd::Zero(mTf);
    spec.Gy = pred.Khat.rightCols(mTf);
    spec.gy0 = pred.Khat.leftCols(n_past) * m_f.head(n_past);
    spec.Xi = &pred.Xi;
    spec.dr = true;
    spec.eps_obj = eps_obj;
    spec.eps_con = eps_con;
    return assemble(spec, costs, cons);
}

OcpProgram build_direct_form(const HankelPartition &part,
                             const SpcPredictor &pred, const VectorXd &u_p,
                             const VectorXd &y_p, const CostSpec &costs,
                             const ConstraintSpec &cons, double eps_obj,
                             double eps_con) {
    check_window(u_p, y_p, part.m * part.Tp, part.p * part.Tp);
    const int rho = pred.rank;

    AssemblySpec spec;
    spec.nb = rho;
    spec.Fu = part.Uf * pred.V;
    spec.fu0 = VectorXd::Zero(part.m * part.Tf);
    spec.Gy = part.Yf * pred.V;
    spec.gy0 = VectorXd::Zero(part.p * part.Tf);
    spec.Aeq = MatrixXd(u_p.size() + y_p.size(), rho);
    spec.Aeq.topRows(u_p.size()) = part.Up * pred.V;
    spec.Aeq.bottomRows(y_p.size()) = part.Yp * pred.V;
    spec.beq = VectorXd(u_p.size() + y_p.size());
    spec.beq << u_p, y_p;
    spec.Xi = &pred.Xi;
    spec.dr = true;
    spec.eps_obj = eps_obj;
    spec.eps_con = eps_con;
    spec.Fg = pred.V;
    return assemble(spec, costs, cons);
}

OcpProgram build_reg_deepc(const HankelPartition &part, const VectorXd &u_p,
                           const VectorXd &y_p, const CostSpec &costs,
                           const ConstraintSpec &cons, double lambda_g) {
    check_window(u_p, y_p, part.m * part.Tp, part.p * part.Tp);
    if (lambda_g < 0.0)
        throw std::invalid_argument("build_reg_deepc: lambda_g < 0");
    const int N = part.N;

    // g = g_plus - g_minus with both parts nonnegative makes the l1
    // penalty linear.
    AssemblySpec spec;
    spec.nb = 2 * N;
    spec.Fu = MatrixXd(part.m * part.Tf, 2 * N);
    spec.Fu << part.Uf, -part.Uf;
    spec.fu0 = VectorXd::Zero(part.m * part.Tf);
    spec.Gy = MatrixXd(part.p * part.Tf, 2 * N);
    spec.Gy << part.Yf, -part.Yf;
    spec.gy0 = VectorXd::Zero(part.p * part.Tf);
    const int ne = static_cast<int>(u_p.size() + y_p.size());
    spec.Aeq = MatrixXd(ne, 2 * N);
    spec.Aeq.topLeftCorner(u_p.size(), N) = part.Up;
    spec.Aeq.topRightCorner(u_p.size(), N) = -part.Up;
    spec.Aeq.bottomLeftCorner(y_p.size(), N) = part.Yp;
    spec.Aeq.bottomRightCorner(y_p.size(), N) = -part.Yp;
    spec.beq = VectorXd(ne);
    spec.beq << u_p, y_p;
    spec.lin = VectorXd::Constant(2 * N, lambda_g);
    spec.nonneg_base.resize(2 * N);
    for (int i = 0; i < 2 * N; ++i) spec.nonneg_base[i] = i;
    spec.Fg = MatrixXd(N, 2 * N);
    spec.Fg << MatrixXd::Identity(N, N), -MatrixXd::Identity(N, N);
    return assemble(spec, costs, cons);
}

OcpProgram build_spc_baseline(const SpcPredictor &pred, const VectorXd &m_f,
                              const CostSpec &costs,
                              const ConstraintSpec &cons) {
    const int mTf = pred.m * pred.Tf;
    const int n_past = pred.m * pred.Tp + pred.p * pred.Tp;
    if (m_f.size() != n_past + mTf)
        throw std::invalid_argument("build_spc_baseline: m_f length mismatch");

    AssemblySpec spec;
    spec.nb = mTf;
    spec.Fu = MatrixXd::Identity(mTf, mTf);
    spec.fu0 = VectorXd::Zero(mTf);
    spec.Gy = pred.Khat.rightCols(mTf);
    spec.gy0 = pred.Khat.leftCols(n_past) * m_f.head(n_past);
    return assemble(spec, costs, cons);
}

ControlSolution extract_solution(const OcpProgram &ocp, const VectorXd &raw) {
    if (raw.size() != ocp.prog.num_vars())
        throw std::invalid_argument("extract_solution: layout mismatch");
    ControlSolution sol;
    const VectorXd base = raw.head(ocp.base_dim);
    sol.u_f = ocp.Fu * base + ocp.fu0;
    if (ocp.Fg.size() > 0) sol.g = ocp.Fg * base;
    sol.objective = ocp.prog.objective(raw);
    if (const VarSlice *sb = ocp.prog.find("sbox_hi")) {
        double mx = raw.segment(sb->offset, sb->size).maxCoeff();
        const VarSlice *sl = ocp.prog.find("sbox_lo");
        mx = std::max(mx, raw.segment(sl->offset, sl->size).maxCoeff());
        sol.box_soft_max = std::max(mx, 0.0);
    }
    if (const VarSlice *st = ocp.prog.find("tau")) {
        sol.tau = raw(st->offset);
        const VarSlice *ss = ocp.prog.find("s");
        sol.s = raw.segment(ss->offset, ss->size);
        sol.cvar_soft = std::max(raw(ocp.prog.find("v")->offset), 0.0);
        sol.cvar_lhs = -ocp.beta * sol.tau + ocp.L_con * ocp.eps_con +
                       sol.s.mean() - sol.cvar_soft;
    }
    return sol;
}

} // namespace drddpc
