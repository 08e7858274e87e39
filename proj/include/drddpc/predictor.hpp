#pragma once

#include "drddpc/data.hpp"

namespace drddpc {

// Least-squares multi-step predictor together with the row-space projector
// of the regressor and the empirical residual scenarios.
struct SpcPredictor {
    MatrixXd Khat; // (p Tf) x (m(Tp+Tf) + p Tp)
    MatrixXd P;    // N x N orthogonal projector onto the row space of M
    MatrixXd V;    // N x rho orthonormal basis of the row space, P = V V^T
    MatrixXd Xi;   // (p Tf) x N residual scenarios, Yf (I - P)
    double svd_cutoff = 0.0;
    int rank = 0;
    int Tp = 0, Tf = 0, m = 0, p = 0, N = 0;
};

// Uniform-weight scenario atoms for a given window vector m_f.
struct ScenarioSet {
    MatrixXd atoms;  // (p Tf) x N, atom i = center + Xi column i
    VectorXd center; // Khat m_f
    double weight = 0.0;
};

// Least-squares fit Khat = Yf M^+ via SVD with relative cutoff
// sigma_max * max(rows, cols) * cutoff_rel.
SpcPredictor fit(const HankelPartition &part, double cutoff_rel = 1e-12);

VectorXd predict(const SpcPredictor &pred, const VectorXd &m_f);

ScenarioSet scenarios(const SpcPredictor &pred, const VectorXd &m_f);

// Oracle residuals Yf - K_true M, used as the intermediate reference in
// finite-sample tests.
MatrixXd oracle_residuals(const MatrixXd &K_true, const HankelPartition &part);

} // namespace drddpc
