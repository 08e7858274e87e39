#pragma once

#include <Eigen/Dense>

namespace drddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class OutputCostVariant { Quadratic, L1, Asymmetric };

// Stage cost on the predicted output window y_f (length p*Tf).
struct OutputCost {
    OutputCostVariant variant = OutputCostVariant::Quadratic;
    VectorXd y_ref;     // reference window, length p*Tf
    VectorXd q_weights; // per-component weights (Quadratic only)
    double w_over = 2.0;  // slope above reference (Asymmetric)
    double w_under = 1.0; // slope below reference (Asymmetric)

    double eval(const VectorXd &y) const;
};

// Quadratic input cost f1(u_f) = sum r_j u_j^2 over the horizon window.
struct InputCost {
    VectorXd r_weights; // per-component weights, length m*Tf

    double eval(const VectorXd &u) const;
};

struct CostSpec {
    InputCost input;
    OutputCost output;
    double wasserstein_r = 2.0;
};

// Box constraints plus CVaR parameters. Infinite bounds mark inactive
// components.
struct ConstraintSpec {
    VectorXd y_lo, y_hi; // length p*Tf, +-inf where inactive
    VectorXd u_lo, u_hi; // length m*Tf, +-inf where inactive
    double beta = 0.2;   // CVaR risk level in (0,1)
    int n_con_residuals = 20;
    double soft_penalty_cvar = 1e4;
    double soft_penalty_box = 1e4;

    bool has_output_box() const;
    // Worst componentwise box violation h(y); nonpositive iff y is inside.
    double h_box(const VectorXd &y) const;
};

// Lipschitz constant of the output cost w.r.t. the l_r norm, via the dual
// norm of the gradient over the domain box. The quadratic variant requires
// finite domain bounds.
double lipschitz(const OutputCost &cost, double r, const VectorXd &dom_lo,
                 const VectorXd &dom_hi);

// Lipschitz constant of the box-violation function h w.r.t. the l_r norm.
double lipschitz_box(double r);

} // namespace drddpc
