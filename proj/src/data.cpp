#include "drddpc/data.hpp"

#include "drddpc/rng.hpp"

#include <Eigen/SVD>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drddpc {

MatrixXd hankel(const MatrixXd &z, int L) {
    const int T = static_cast<int>(z.rows());
    const int eta = static_cast<int>(z.cols());
    if (L < 1 || T < L)
        throw std::invalid_argument("hankel: need T >= L >= 1");
    const int N = T - L + 1;
    MatrixXd H(eta * L, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < L; ++i)
            H.block(i * eta, j, eta, 1) = z.row(j + i).transpose();
    return H;
}

HankelPartition partition(const Trajectory &traj, int Tp, int Tf) {
    const int T = traj.length();
    const int L = Tp + Tf;
    if (Tp < 1 || Tf < 1 || T < L)
        throw std::invalid_argument("partition: horizon too long for data");
    const int m = static_cast<int>(traj.u.cols());
    const int p = static_cast<int>(traj.y.cols());
    HankelPartition part;
    part.Tp = Tp;
    part.Tf = Tf;
    part.m = m;
    part.p = p;
    part.N = T - L + 1;
    const MatrixXd Hu = hankel(traj.u, L);
    const MatrixXd Hy = hankel(traj.y, L);
    part.Up = Hu.topRows(m * Tp);
    part.Uf = Hu.bottomRows(m * Tf);
    part.Yp = Hy.topRows(p * Tp);
    part.Yf = Hy.bottomRows(p * Tf);
    part.M.resize(m * L + p * Tp, part.N);
    part.M << part.Up, part.Yp, part.Uf;

    Eigen::JacobiSVD<MatrixXd> svd(part.M);
    const double tol = svd.singularValues()(0) *
                       std::max(part.M.rows(), part.M.cols()) * 1e-12;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++rank;
    part.full_row_rank = (rank == part.M.rows());
    return part;
}

Trajectory excite_and_collect(const StateSpaceModel &model,
                              const NoiseSpec &noise, int T, double input_std,
                              std::uint64_t seed) {
    if (T < 1)
        throw std::invalid_argument("excite_and_collect: T < 1");
    NoiseRealization real = make_noise_realization(
        noise, model.n, seed, T, rng::kOfflineNoise, rng::kOfflineInit);
    MatrixXd u(T, model.m);
    for (int k = 0; k < T; ++k)
        for (int c = 0; c < model.m; ++c)
            u(k, c) = input_std *
                      rng::standard_normal(seed, rng::kOfflineInput,
                                           static_cast<std::uint64_t>(k) *
                                                   model.m +
                                               c);
    return simulate(model, real.x0, u, real.e);
}

void write_csv(const Trajectory &traj, const std::string &path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_csv: cannot open " + path);
    const int m = static_cast<int>(traj.u.cols());
    const int p = static_cast<int>(traj.y.cols());
    out << "k";
    for (int c = 0; c < m; ++c) out << ",u_" << (c + 1);
    for (int c = 0; c < p; ++c) out << ",y_" << (c + 1);
    out << "\n";
    char buf[64];
    for (int k = 0; k < traj.length(); ++k) {
        out << k;
        for (int c = 0; c < m; ++c) {
            std::snprintf(buf, sizeof(buf), ",%.17g", traj.u(k, c));
            out << buf;
        }
        for (int c = 0; c < p; ++c) {
            std::snprintf(buf, sizeof(buf), ",%.17g", traj.y(k, c));
            out << buf;
        }
        out << "\n";
    }
}

Trajectory read_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw std::runtime_error("read_csv: empty file " + path);
    int m = 0, p = 0;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.rfind("u_", 0) == 0) ++m;
            else if (tok.rfind("y_", 0) == 0) ++p;
        }
    }
    if (m < 1 || p < 1)
        throw std::runtime_error("read_csv: malformed header in " + path);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (static_cast<int>(vals.size()) != 1 + m + p)
            throw std::runtime_error("read_csv: inconsistent column count");
        rows.push_back(std::move(vals));
    }
    if (rows.empty())
        throw std::runtime_error("read_csv: no data rows in " + path);
    Trajectory traj;
    const int T = static_cast<int>(rows.size());
    traj.u.resize(T, m);
    traj.y.resize(T, p);
    for (int k = 0; k < T; ++k) {
        for (int c = 0; c < m; ++c) traj.u(k, c) = rows[k][1 + c];
        for (int c = 0; c < p; ++c) traj.y(k, c) = rows[k][1 + m + c];
    }
    return traj;
}

} // namespace drddpc
