#include "drddpc/model.hpp"

#include "drddpc/rng.hpp"

#include <Eigen/SVD>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace drddpc {

namespace {

MatrixXd extended_observability(const MatrixXd &A, const MatrixXd &C, int L) {
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(C.rows());
    MatrixXd O(p * L, n);
    MatrixXd Ak = MatrixXd::Identity(n, n);
    for (int i = 0; i < L; ++i) {
        O.middleRows(i * p, p) = C * Ak;
        Ak = Ak * A;
    }
    return O;
}

// Block lower-triangular input-to-output Toeplitz matrix: block (i,j) is
// D for i==j and C A^{i-j-1} B for i>j.
MatrixXd input_toeplitz(const StateSpaceModel &md, int L) {
    MatrixXd G = MatrixXd::Zero(md.p * L, md.m * L);
    MatrixXd CAkB = md.C * md.B; // C A^0 B
    std::vector<MatrixXd> markov(L);
    markov[0] = md.D;
    MatrixXd Ak = MatrixXd::Identity(md.n, md.n);
    for (int k = 1; k < L; ++k) {
        markov[k] = md.C * Ak * md.B;
        Ak = Ak * md.A;
    }
    for (int i = 0; i < L; ++i)
        for (int j = 0; j <= i; ++j)
            G.block(i * md.p, j * md.m, md.p, md.m) = markov[i - j];
    return G;
}

} // namespace

StateSpaceModel::StateSpaceModel(MatrixXd A_, MatrixXd B_, MatrixXd C_,
                                 MatrixXd D_, MatrixXd Ke_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)),
      Ke(std::move(Ke_)) {
    n = static_cast<int>(A.rows());
    m = static_cast<int>(B.cols());
    p = static_cast<int>(C.rows());
    if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != p ||
        D.cols() != m || Ke.rows() != n || Ke.cols() != p || n < 1 || m < 1 ||
        p < 1)
        throw std::invalid_argument("StateSpaceModel: inconsistent dimensions");
    const MatrixXd O = extended_observability(A, C, n);
    Eigen::JacobiSVD<MatrixXd> svd(O);
    const double tol = svd.singularValues()(0) *
                       std::max(O.rows(), O.cols()) *
                       std::numeric_limits<double>::epsilon();
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++rank;
    if (rank < n)
        throw std::invalid_argument("StateSpaceModel: (A,C) not observable");
}

StateSpaceModel StateSpaceModel::from_json_text(const std::string &text) {
    const auto j = nlohmann::json::parse(text);
    auto mat = [&](const char *key) {
        const auto &v = j.at(key);
        MatrixXd M(v.size(), v.at(0).size());
        for (size_t r = 0; r < v.size(); ++r)
            for (size_t c = 0; c < v[r].size(); ++c)
                M(static_cast<int>(r), static_cast<int>(c)) = v[r][c].get<double>();
        return M;
    };
    MatrixXd A = mat("A"), B = mat("B"), C = mat("C");
    MatrixXd D, Ke;
    if (j.contains("D"))
        D = mat("D");
    else
        D = MatrixXd::Zero(C.rows(), B.cols());
    if (j.contains("Ke"))
        Ke = mat("Ke");
    else
        Ke = MatrixXd::Zero(A.rows(), C.rows());
    return StateSpaceModel(A, B, C, D, Ke);
}

StateSpaceModel StateSpaceModel::from_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

NoiseSpec::NoiseSpec(VectorXd mean_, MatrixXd covariance_)
    : mean(std::move(mean_)), covariance(std::move(covariance_)) {
    const int p = static_cast<int>(mean.size());
    if (covariance.rows() != p || covariance.cols() != p)
        throw std::invalid_argument("NoiseSpec: covariance dimension mismatch");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("NoiseSpec: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(covariance);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw std::invalid_argument("NoiseSpec: covariance not PSD");
    VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    sqrt_cov = es.eigenvectors() * lam.asDiagonal() *
               es.eigenvectors().transpose();
}

NoiseSpec NoiseSpec::zero(int p) {
    return NoiseSpec(VectorXd::Zero(p), MatrixXd::Zero(p, p));
}

NoiseRealization make_noise_realization(const NoiseSpec &spec, int n_state,
                                        std::uint64_t seed, int T,
                                        std::uint64_t noise_stream,
                                        std::uint64_t init_stream) {
    const int p = static_cast<int>(spec.mean.size());
    NoiseRealization r;
    r.seed = seed;
    r.e.resize(T, p);
    for (int k = 0; k < T; ++k) {
        VectorXd z(p);
        for (int c = 0; c < p; ++c)
            z(c) = rng::standard_normal(seed, noise_stream,
                                        static_cast<std::uint64_t>(k) * p + c);
        r.e.row(k) = (spec.mean + spec.sqrt_cov * z).transpose();
    }
    r.x0.resize(n_state);
    for (int c = 0; c < n_state; ++c)
        r.x0(c) = rng::standard_normal(seed, init_stream, c);
    return r;
}

void step(const StateSpaceModel &md, const VectorXd &x, const VectorXd &u,
          const VectorXd &e, VectorXd &x_next, VectorXd &y) {
    if (x.size() != md.n || u.size() != md.m || e.size() != md.p)
        throw std::invalid_argument("step: dimension mismatch");
    y = md.C * x + md.D * u + e;
    x_next = md.A * x + md.B * u + md.Ke * e;
}

Trajectory simulate(const StateSpaceModel &md, const VectorXd &x0,
                    const MatrixXd &u_seq, const MatrixXd &e,
                    VectorXd *x_final) {
    const int T = static_cast<int>(u_seq.rows());
    if (e.rows() != T)
        throw std::invalid_argument("simulate: input/noise length mismatch");
    Trajectory traj;
    traj.u = u_seq;
    traj.y.resize(T, md.p);
    VectorXd x = x0, xn, y;
    for (int k = 0; k < T; ++k) {
        step(md, x, u_seq.row(k).transpose(), e.row(k).transpose(), xn, y);
        traj.y.row(k) = y.transpose();
        x = xn;
    }
    if (x_final) *x_final = x;
    return traj;
}

MatrixXd true_predictor(const StateSpaceModel &md, int Tp, int Tf) {
    if (Tp < md.n)
        throw std::invalid_argument("true_predictor: Tp < n");
    const int m = md.m, p = md.p, n = md.n;
    const MatrixXd O_Tp = extended_observability(md.A, md.C, Tp);
    const MatrixXd O_Tf = extended_observability(md.A, md.C, Tf);
    const MatrixXd G_p = input_toeplitz(md, Tp);
    const MatrixXd G_f = input_toeplitz(md, Tf);

    MatrixXd A_Tp = MatrixXd::Identity(n, n);
    for (int i = 0; i < Tp; ++i) A_Tp = md.A * A_Tp;
    MatrixXd reach(n, m * Tp); // [A^{Tp-1}B ... AB B]
    MatrixXd Ak = MatrixXd::Identity(n, n);
    for (int j = Tp - 1; j >= 0; --j) {
        reach.middleCols(j * m, m) = Ak * md.B;
        Ak = md.A * Ak;
    }
    const MatrixXd O_pinv =
        O_Tp.completeOrthogonalDecomposition().pseudoInverse();

    const int cols = m * Tp + p * Tp + m * Tf;
    MatrixXd K(p * Tf, cols);
    K.leftCols(m * Tp) = O_Tf * (reach - A_Tp * O_pinv * G_p);
    K.middleCols(m * Tp, p * Tp) = O_Tf * A_Tp * O_pinv;
    K.rightCols(m * Tf) = G_f;

    // Restrict the row functionals to the subspace of windows reachable by
    // noise-free trajectories, span of (u, x0) -> (u_p, O x0 + G u_p, u_f).
    // This is the representative identifiable from data; the action on
    // noise-free windows is unchanged.
    const int L = Tp + Tf;
    MatrixXd Phi = MatrixXd::Zero(cols, m * L + n);
    Phi.block(0, 0, m * Tp, m * Tp).setIdentity();
    Phi.block(m * Tp, 0, p * Tp, m * Tp) = G_p;
    Phi.block(m * Tp, m * L, p * Tp, n) = O_Tp;
    Phi.block(m * Tp + p * Tp, m * Tp, m * Tf, m * Tf).setIdentity();
    Eigen::JacobiSVD<MatrixXd> svd(Phi, Eigen::ComputeThinU);
    const double tol = svd.singularValues()(0) *
                       std::max(Phi.rows(), Phi.cols()) * 1e-13;
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    const MatrixXd U = svd.matrixU().leftCols(r);
    return (K * U) * U.transpose();
}

} // namespace drddpc
