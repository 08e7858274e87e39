#pragma once

#include "drddpc/costs.hpp"
#include "drddpc/predictor.hpp"
#include "drddpc/program.hpp"

namespace drddpc {

// Canonical program plus the affine maps needed to interpret its minimizer:
// u_f = Fu z_base + fu0 and, when a behavioral vector g exists, g = Fg z_base.
struct OcpProgram {
    ConvexProgram prog;
    MatrixXd Fu;
    VectorXd fu0;
    MatrixXd Fg; // empty when the formulation has no g
    int base_dim = 0;
    int mTf = 0, pTf = 0;
    int n_con = 0;
    double beta = 0.0;
    double L_obj = 0.0, L_con = 0.0;
    double eps_obj = 0.0, eps_con = 0.0;
};

struct ControlSolution {
    VectorXd u_f;
    VectorXd g; // empty for predictor-based forms
    VectorXd s; // CVaR scenario slacks (empty without a CVaR block)
    double tau = 0.0;
    double cvar_soft = 0.0;    // scalar CVaR constraint violation v
    double box_soft_max = 0.0; // largest soft box slack
    double cvar_lhs = 0.0;     // -tau*beta + L_con*eps_con + mean(s) - v
    double objective = 0.0;
};

// Deterministic evenly spaced residual subset ceil(j*N/n_con), j = 1..n_con,
// as zero-based column indices.
std::vector<int> constraint_subset(int N, int n_con);

// Tractable DR program over u_f: scenario-averaged cost, CVaR rows over the
// residual subset, additive L_obj*eps_obj constant, soft constraints.
OcpProgram build_spc_form(const SpcPredictor &pred, const VectorXd &m_f,
                          const CostSpec &costs, const ConstraintSpec &cons,
                          double eps_obj, double eps_con);

// Equivalent direct data-driven program with g = V z; equality rows pin the
// past window and (I - P) g = 0 holds by construction.
OcpProgram build_direct_form(const HankelPartition &part,
                             const SpcPredictor &pred, const VectorXd &u_p,
                             const VectorXd &y_p, const CostSpec &costs,
                             const ConstraintSpec &cons, double eps_obj,
                             double eps_con);

// l1-regularized DeePC baseline with g split into nonnegative parts.
OcpProgram build_reg_deepc(const HankelPartition &part, const VectorXd &u_p,
                           const VectorXd &y_p, const CostSpec &costs,
                           const ConstraintSpec &cons, double lambda_g);

// Certainty-equivalent SPC baseline: nominal prediction only, soft output
// box, no ambiguity terms.
OcpProgram build_spc_baseline(const SpcPredictor &pred, const VectorXd &m_f,
                              const CostSpec &costs,
                              const ConstraintSpec &cons);

ControlSolution extract_solution(const OcpProgram &ocp, const VectorXd &raw);

} // namespace drddpc
