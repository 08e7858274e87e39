#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace drddpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Ground-truth stochastic LTI system in innovation form:
//   x+ = A x + B u + Ke e,   y = C x + D u + e.
// Used only for simulation and as a testing oracle; the controllers never
// see the matrices.
struct StateSpaceModel {
    MatrixXd A, B, C, D, Ke;
    int n = 0, m = 0, p = 0;

    // Throws std::invalid_argument on inconsistent dimensions or if (A,C)
    // is not observable.
    StateSpaceModel(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D,
                    MatrixXd Ke);

    static StateSpaceModel from_json_file(const std::string &path);
    static StateSpaceModel from_json_text(const std::string &text);
};

// Gaussian innovation specification; covariance must be symmetric PSD.
struct NoiseSpec {
    VectorXd mean;
    MatrixXd covariance;
    MatrixXd sqrt_cov; // symmetric PSD square root, computed at construction

    NoiseSpec(VectorXd mean, MatrixXd covariance);
    static NoiseSpec zero(int p);
};

// A frozen noise realization: regenerating with the same seed reproduces
// e and x0 bit-identically.
struct NoiseRealization {
    std::uint64_t seed = 0;
    MatrixXd e;  // T x p innovation samples
    VectorXd x0; // initial state
};

// Draws T innovation samples and an initial state. `stream` selects the
// counter stream (offline vs closed-loop), `run_index` shifts the counters
// so that Monte-Carlo runs never overlap.
NoiseRealization make_noise_realization(const NoiseSpec &spec, int n_state,
                                        std::uint64_t seed, int T,
                                        std::uint64_t noise_stream,
                                        std::uint64_t init_stream);

struct Trajectory {
    MatrixXd u; // T x m
    MatrixXd y; // T x p
    int length() const { return static_cast<int>(u.rows()); }
};

// One simulation step of the innovation-form system.
void step(const StateSpaceModel &model, const VectorXd &x, const VectorXd &u,
          const VectorXd &e, VectorXd &x_next, VectorXd &y);

// Iterates step over u_seq (T x m) with innovations e (T x p); also returns
// the terminal state through x_final when non-null.
Trajectory simulate(const StateSpaceModel &model, const VectorXd &x0,
                    const MatrixXd &u_seq, const MatrixXd &e,
                    VectorXd *x_final = nullptr);

// Multi-step predictor K with y_f = K [u_p; y_p; u_f] exact on noise-free
// trajectories. Returns the minimum-norm representative: the blockwise
// construction (extended observability + input Toeplitz blocks) restricted
// to the subspace of windows realizable by noise-free trajectories, which
// is the unique predictor identifiable from noise-free data.
MatrixXd true_predictor(const StateSpaceModel &model, int Tp, int Tf);

} // namespace drddpc
