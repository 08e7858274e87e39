#pragma once

#include "drddpc/ambiguity.hpp"
#include "drddpc/ocp.hpp"
#include "drddpc/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace drddpc {

enum class ControllerKind { SPC, RegDeePC, DRDDPC };

// Reference generator: maps a time index to the p-vector y_r at that index;
// defined for all k >= 0 (the horizon looks past the run end).
using Reference = std::function<VectorXd(int)>;

struct ControllerConfig {
    ControllerKind kind = ControllerKind::DRDDPC;
    int Tp = 5, Tf = 10;
    CostSpec costs;      // window-sized weights; y_ref filled per step
    ConstraintSpec cons; // window-sized bounds
    RadiusParams radius; // DRDDPC only
    double lambda_g = 1.0; // RegDeePC only
    bool use_direct = false; // DRDDPC: solve the g-parametrized form
    SolveOptions solver;
};

// Ring buffer of the last Tp inputs and outputs, oldest first.
struct PastWindow {
    MatrixXd u; // Tp x m
    MatrixXd y; // Tp x p

    void push(const VectorXd &u_k, const VectorXd &y_k);
    VectorXd u_vec() const; // stacked u_{[k-Tp, k-1]}
    VectorXd y_vec() const;
};

struct ClosedLoopTrace {
    MatrixXd u, y, yr; // T_run rows
    std::vector<SolveStatus> status;
    std::vector<char> fallback; // step held the previous input
    VectorXd objective;
    VectorXd cvar_slack;

    int length() const { return static_cast<int>(u.rows()); }
    void write_csv(const std::string &path) const;
};

// Frozen per-run identification artifacts shared by every controller kind.
struct ControllerContext {
    HankelPartition part;
    SpcPredictor pred;
};

ControllerContext make_context(const Trajectory &offline, int Tp, int Tf);

// Simulate Tp steps from the realization's x0 with zero input; the window
// is filled with the simulated pairs and the plant state is returned.
void warm_up(const StateSpaceModel &model, const NoiseRealization &noise,
             int Tp, VectorXd &state, PastWindow &window);

struct StepResult {
    VectorXd u;       // applied input (first block of the optimal plan)
    VectorXd u_plan;  // full horizon plan
    SolveStatus status = SolveStatus::MaxIterations;
    bool fallback = false;
    double objective = 0.0;
    double cvar_slack = 0.0;
};

// One receding-horizon step. `yr_window` stacks the reference over the
// horizon; `u_plan_prev` is the previous optimal plan (used for the
// data-dependent radius and as infeasibility fallback), empty at k = 0.
StepResult control_step(const ControllerConfig &cfg,
                        const ControllerContext &ctx,
                        const PastWindow &window, const VectorXd &yr_window,
                        const VectorXd &u_plan_prev);

ClosedLoopTrace run_closed_loop(const StateSpaceModel &model,
                                const ControllerConfig &cfg,
                                const ControllerContext &ctx,
                                const NoiseRealization &noise,
                                const Reference &reference, int T_run);

} // namespace drddpc
