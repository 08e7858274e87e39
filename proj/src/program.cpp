#include "drddpc/program.hpp"

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace drddpc {

void ConvexProgram::validate() const {
    const int n = num_vars();
    if (H.rows() != n || H.cols() != n)
        throw std::invalid_argument("ConvexProgram: H dimension mismatch");
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("ConvexProgram: H not symmetric");
    if (A_eq.rows() > 0 && (A_eq.cols() != n ||
                            A_eq.rows() != b_eq.size()))
        throw std::invalid_argument("ConvexProgram: equality dimension mismatch");
    if (A_in.rows() > 0 && (A_in.cols() != n ||
                            A_in.rows() != b_in.size()))
        throw std::invalid_argument("ConvexProgram: inequality dimension mismatch");
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(H,
                                                   Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9)
            throw std::invalid_argument("ConvexProgram: H not PSD");
    }
}

void ConvexProgram::export_text(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("export_text: cannot open " + path);
    auto dump = [&](const char *name, const MatrixXd &M) {
        out << name << " " << M.rows() << " " << M.cols() << "\n";
        char buf[64];
        for (int r = 0; r < M.rows(); ++r) {
            for (int c = 0; c < M.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g%c", M(r, c),
                              c + 1 == M.cols() ? '\n' : ' ');
                out << buf;
            }
        }
    };
    out << "convex_program v1\n";
    out << "c0 " << c0 << "\n";
    dump("H", H);
    dump("f", f);
    dump("A_eq", A_eq);
    dump("b_eq", b_eq);
    dump("A_in", A_in);
    dump("b_in", b_in);
    out << "layout";
    for (const auto &s : layout)
        out << " " << s.name << ":" << s.offset << ":" << s.size;
    out << "\n";
}

} // namespace drddpc
