#pragma once

#include "drddpc/program.hpp"

#include <optional>

namespace drddpc {

enum class SolveStatus { Optimal, MaxIterations, Infeasible, Unbounded };

struct Solution {
    VectorXd z;
    VectorXd y_eq; // equality multipliers
    VectorXd y_in; // inequality multipliers, nonnegative
    double objective = 0.0;
    SolveStatus status = SolveStatus::MaxIterations;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tol_p = 1e-6;
    double tol_d = 1e-6;
    int max_iter = 50000;
    std::optional<VectorXd> warm_start; // optional initial primal point
};

// Primal-dual interior-point solve. Deterministic: identical inputs yield
// bit-identical iterates and iteration counts.
Solution solve(const ConvexProgram &program, const SolveOptions &opts = {});

struct KktResiduals {
    double stationarity = 0.0;
    double primal = 0.0;
    double complementarity = 0.0;
};

KktResiduals check_kkt(const ConvexProgram &program, const VectorXd &z,
                       const VectorXd &y_eq, const VectorXd &y_in);

} // namespace drddpc
