#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace drddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Named contiguous block of decision variables.
struct VarSlice {
    std::string name;
    int offset = 0;
    int size = 0;
};

// Canonical convex program
//   min 0.5 z' H z + f' z + c0
//   s.t. A_eq z = b_eq,  A_in z <= b_in.
// LPs are the H = 0 special case.
struct ConvexProgram {
    MatrixXd H;
    VectorXd f;
    double c0 = 0.0;
    MatrixXd A_eq;
    VectorXd b_eq;
    MatrixXd A_in;
    VectorXd b_in;
    std::vector<VarSlice> layout;

    int num_vars() const { return static_cast<int>(f.size()); }

    double objective(const VectorXd &z) const {
        return 0.5 * z.dot(H * z) + f.dot(z) + c0;
    }

    const VarSlice *find(const std::string &name) const {
        for (const auto &s : layout)
            if (s.name == name) return &s;
        return nullptr;
    }

    // Throws std::invalid_argument if H is asymmetric, dimensions are
    // inconsistent, or H is not PSD within tolerance.
    void validate() const;

    // Plain-text canonical-form dump for cross-checking against external
    // solvers.
    void export_text(const std::string &path) const;
};

} // namespace drddpc
