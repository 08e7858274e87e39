#include "drddpc/ambiguity.hpp"

#include "drddpc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace drddpc {

double lr_norm(const VectorXd &v, double r) {
    if (r < 1.0)
        throw std::invalid_argument("lr_norm: r < 1");
    if (std::isinf(r)) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    if (r == 1.0) return v.cwiseAbs().sum();
    if (r == 2.0) return v.norm();
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), r);
    return std::pow(s, 1.0 / r);
}

double psi_N(const MatrixXd &M, const VectorXd &m_f, double r) {
    if (M.rows() != m_f.size())
        throw std::invalid_argument("psi_N: dimension mismatch");
    if (r < 1.0)
        throw std::invalid_argument("psi_N: r < 1");
    const int N = static_cast<int>(M.cols());
    double acc = 0.0;
    for (int i = 0; i < N; ++i)
        acc += std::pow(lr_norm(M.col(i) - m_f, r), r);
    return acc / N;
}

double gamma_N(int N, double r, int d, double q, double C) {
    if (N < 1 || r < 1.0 || q <= r || d < 1)
        throw std::invalid_argument("gamma_N: invalid parameters");
    const double moment = std::pow(N, -(q - r) / q);
    const double half_d = 0.5 * d;
    double rate;
    if (r > half_d)
        rate = std::pow(N, -0.5);
    else if (r == half_d)
        rate = std::pow(N, -0.5) * std::log1p(static_cast<double>(N));
    else
        rate = std::pow(N, -r / d);
    return C * (rate + moment);
}

RadiusPair radius(const RadiusParams &prm, const MatrixXd &M,
                  const VectorXd &m_f, int N, int d) {
    if (prm.alpha <= 0.0 || prm.alpha >= 1.0)
        throw std::invalid_argument("radius: alpha outside (0,1)");
    const double psi_root = std::pow(psi_N(M, m_f, prm.r), 1.0 / prm.r);
    RadiusPair out;
    if (prm.mode == RadiusMode::Theoretical) {
        const double g = gamma_N(N, prm.r, d, prm.q, prm.C);
        const double eps = prm.gamma_alpha * psi_root +
                           std::pow(2.0 * g / prm.alpha, 1.0 / prm.r);
        out.eps_obj = eps;
        out.eps_con = eps;
    } else {
        out.eps_obj = prm.eps1 * psi_root + prm.eps2;
        out.eps_con = prm.eps_con;
    }
    return out;
}

namespace {

// Exact uniform-weight optimal transport cost via the assignment LP; the
// constraint matrix is totally unimodular so the LP optimum is attained at
// a permutation.
double assignment_lp_cost(const MatrixXd &cost) {
    const int k = static_cast<int>(cost.rows());
    ConvexProgram lp;
    const int nv = k * k;
    lp.H = MatrixXd::Zero(nv, nv);
    lp.f.resize(nv);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) lp.f(i * k + j) = cost(i, j);
    // Row and column sums equal one; the last column constraint is
    // redundant and dropped to keep the equality rows full rank.
    const int ne = 2 * k - 1;
    lp.A_eq = MatrixXd::Zero(ne, nv);
    lp.b_eq = VectorXd::Ones(ne);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) lp.A_eq(i, i * k + j) = 1.0;
    for (int j = 0; j + 1 < k; ++j)
        for (int i = 0; i < k; ++i) lp.A_eq(k + j, i * k + j) = 1.0;
    lp.A_in = -MatrixXd::Identity(nv, nv);
    lp.b_in = VectorXd::Zero(nv);
    SolveOptions opts;
    opts.tol_p = 1e-9;
    opts.tol_d = 1e-9;
    const Solution sol = solve(lp, opts);
    return sol.objective / k;
}

} // namespace

double wasserstein_discrete(const MatrixXd &atomsA, const MatrixXd &atomsB,
                            double r) {
    if (atomsA.cols() != atomsB.cols() || atomsA.rows() != atomsB.rows())
        throw std::invalid_argument(
            "wasserstein_discrete: atom sets must have equal shape");
    const int k = static_cast<int>(atomsA.cols());
    if (k < 1)
        throw std::invalid_argument("wasserstein_discrete: empty atom sets");
    MatrixXd cost(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            cost(i, j) =
                std::pow(lr_norm(atomsA.col(i) - atomsB.col(j), r), r);

    double best;
    if (k <= 8) {
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        best = std::numeric_limits<double>::infinity();
        do {
            double c = 0.0;
            for (int i = 0; i < k; ++i) c += cost(i, perm[i]);
            best = std::min(best, c / k);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        best = assignment_lp_cost(cost);
    }
    return std::pow(best, 1.0 / r);
}

double empirical_cvar(const VectorXd &samples, double beta) {
    const int k = static_cast<int>(samples.size());
    if (k < 1)
        throw std::invalid_argument("empirical_cvar: empty samples");
    if (beta <= 0.0 || beta >= 1.0)
        throw std::invalid_argument("empirical_cvar: beta outside (0,1)");
    // The objective t + (1/(beta k)) sum (phi_i - t)_+ is piecewise linear
    // and convex in t with breakpoints at the samples.
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        const double t = samples(i);
        double acc = 0.0;
        for (int j = 0; j < k; ++j)
            acc += std::max(samples(j) - t, 0.0);
        best = std::min(best, t + acc / (beta * k));
    }
    return best;
}

} // namespace drddpc
