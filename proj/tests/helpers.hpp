#pragma once

#include "drddpc/control.hpp"
#include "drddpc/data.hpp"
#include "drddpc/rng.hpp"

#include <cmath>
#include <limits>

namespace testutil {

using drddpc::MatrixXd;
using drddpc::VectorXd;

inline drddpc::StateSpaceModel benchmark_model() {
    MatrixXd A(2, 2), B(2, 1), C(1, 2), D(1, 1), Ke(2, 1);
    A << 0.7326, -0.0861, 0.1722, 0.9909;
    B << 0.0609, 0.0064;
    C << 0.0, 1.4142;
    D << 0.0;
    Ke << -0.5, 0.5;
    return drddpc::StateSpaceModel(A, B, C, D, Ke);
}

// Random stable model with spectral radius scaled below 0.95; dimensions
// kept small so observability holds generically.
inline drddpc::StateSpaceModel random_stable_model(std::uint64_t seed, int n,
                                                   int m, int p) {
    auto g = [&](std::uint64_t idx) {
        return drddpc::rng::standard_normal(seed, 97, idx);
    };
    std::uint64_t c = 0;
    MatrixXd A(n, n), B(n, m), C(p, n), D = MatrixXd::Zero(p, m),
                                        Ke = MatrixXd::Zero(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = g(c++);
    const double radius =
        std::sqrt(A.cwiseProduct(A).sum()); // crude spectral bound
    A *= 0.9 / std::max(radius, 1e-9);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) B(i, j) = g(c++);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = g(c++);
    return drddpc::StateSpaceModel(A, B, C, D, Ke);
}

inline double inf() { return std::numeric_limits<double>::infinity(); }

// Window-sized cost/constraint defaults matching the benchmark protocol.
inline drddpc::CostSpec benchmark_costs(int mTf, int pTf) {
    drddpc::CostSpec costs;
    costs.input.r_weights = VectorXd::Constant(mTf, 0.05);
    costs.output.variant = drddpc::OutputCostVariant::Quadratic;
    costs.output.q_weights = VectorXd::Constant(pTf, 1.0);
    costs.output.y_ref = VectorXd::Zero(pTf);
    return costs;
}

inline drddpc::ConstraintSpec benchmark_cons(int mTf, int pTf) {
    drddpc::ConstraintSpec cons;
    cons.y_lo = VectorXd::Constant(pTf, -2.0);
    cons.y_hi = VectorXd::Constant(pTf, 2.0);
    cons.u_lo = VectorXd::Constant(mTf, -2.0);
    cons.u_hi = VectorXd::Constant(mTf, 2.0);
    return cons;
}

inline drddpc::ConstraintSpec unbounded_cons(int mTf, int pTf) {
    drddpc::ConstraintSpec cons;
    cons.y_lo = VectorXd::Constant(pTf, -inf());
    cons.y_hi = VectorXd::Constant(pTf, inf());
    cons.u_lo = VectorXd::Constant(mTf, -inf());
    cons.u_hi = VectorXd::Constant(mTf, inf());
    return cons;
}

} // namespace testutil
