#pragma once

#include <Eigen/Dense>

namespace drddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class RadiusMode { Theoretical, Tuned };

struct RadiusParams {
    double alpha = 0.1;      // risk level in (0,1)
    double r = 2.0;          // Wasserstein order >= 1
    double gamma_alpha = 1.0; // predictor-error bound, configuration input
    double C = 1.0;          // concentration constant
    double q = 4.0;          // moment order, q > r
    RadiusMode mode = RadiusMode::Tuned;
    double eps1 = 1e-3;      // tuned objective radius, data-dependent part
    double eps2 = 1e-3;      // tuned objective radius, constant part
    double eps_con = 1e-4;   // tuned constraint radius, fixed scalar
};

struct RadiusPair {
    double eps_obj = 0.0;
    double eps_con = 0.0;
};

double lr_norm(const VectorXd &v, double r);

// Average r-th power distance between regressor columns and m_f.
double psi_N(const MatrixXd &M, const VectorXd &m_f, double r);

// Finite-sample Wasserstein concentration rate; three branches on r vs d/2.
double gamma_N(int N, double r, int d, double q, double C);

RadiusPair radius(const RadiusParams &params, const MatrixXd &M,
                  const VectorXd &m_f, int N, int d);

// Exact r-Wasserstein distance between two uniform discrete distributions
// with equally many atoms: brute force over permutations for k <= 8, linear
// assignment program otherwise.
double wasserstein_discrete(const MatrixXd &atomsA, const MatrixXd &atomsB,
                            double r);

// Exact empirical CVaR at confidence 1-beta via breakpoint scan.
double empirical_cvar(const VectorXd &samples, double beta);

} // namespace drddpc
