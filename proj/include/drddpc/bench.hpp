#pragma once

#include "drddpc/control.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace drddpc {

enum class ReferenceKind { Zero, Sine };

struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::Sine;
    double period = 50.0;
    double amplitude = 1.0;

    Reference make(int p) const;
};

// One controller entry in the experiment config; optional fields override
// the shared cost/constraint/radius settings.
struct ControllerEntry {
    std::string name;
    ControllerKind kind = ControllerKind::DRDDPC;
    double lambda_g = 1.0;
    bool use_direct = false;
    std::optional<double> beta;
    std::optional<double> eps_con;
};

// Parsed experiment configuration (JSON, field "schema_version" = 1).
struct ExperimentConfig {
    int schema_version = 1;
    std::optional<StateSpaceModel> model;
    VectorXd noise_mean;
    std::vector<MatrixXd> covariance_grid;
    int T = 200, Tp = 5, Tf = 10, T_run = 50, n_runs = 50;
    std::uint64_t base_seed = 1000;
    double input_std = 3.0;
    int jobs = 1;
    ReferenceSpec reference;

    OutputCostVariant cost_variant = OutputCostVariant::Quadratic;
    double R = 0.05, Q = 1.0;
    double w_over = 2.0, w_under = 1.0;

    double y_lo = -2.0, y_hi = 2.0, u_lo = -2.0, u_hi = 2.0;
    double beta = 0.2;
    int n_con_residuals = 20;
    double soft_penalty_cvar = 1e4, soft_penalty_box = 1e4;

    RadiusParams radius;
    SolveOptions solver;

    std::vector<ControllerEntry> controllers;

    std::vector<double> sweep_eps_con{1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    std::vector<double> sweep_beta{0.1, 0.2, 0.5, 0.7, 0.9};
    int sweep_n_runs = 20;
    double sweep_y_lo = 0.0, sweep_y_hi = 2.0;

    static ExperimentConfig from_json_file(const std::string &path);
    static ExperimentConfig from_json_text(const std::string &text);

    // Window-sized controller configuration for one entry.
    ControllerConfig controller_config(const ControllerEntry &entry) const;
};

// Cumulative average closed-loop cost: (1/T_run) sum of the input
// quadratic term plus the active output cost variant per step.
double j_test(const ClosedLoopTrace &trace, const CostSpec &costs);

// Percent of steps with any output component outside the box.
double violation_rate(const ClosedLoopTrace &trace, const VectorXd &y_lo,
                      const VectorXd &y_hi);

struct MethodStats {
    std::string method;
    VectorXd per_run_jtest;
    VectorXd per_run_violation;
    std::vector<std::uint64_t> seeds;
    std::vector<int> fallback_counts;
    double mean_jtest = 0.0, std_jtest = 0.0, mean_violation = 0.0;
    int failed_runs = 0; // runs containing fallback steps
};

struct MonteCarloReport {
    std::vector<MethodStats> methods;
    int n_runs = 0;
    std::uint64_t base_seed = 0;
    double runtime_seconds = 0.0;
};

// Runs every configured controller over n_runs shared realizations with
// seed = base_seed + run_index; `jobs` worker threads, aggregation joins
// runs in index order so the result is independent of scheduling.
MonteCarloReport run_monte_carlo(const ExperimentConfig &cfg,
                                 const NoiseSpec &noise);

// Per-cell DR-DDPC campaigns over the (eps_con, beta) grids with the
// sweep box and zero reference; writes violation/cost matrices and a
// metadata sidecar under out_dir.
struct SweepResult {
    MatrixXd violation; // rows: beta grid, cols: eps_con grid
    MatrixXd cost;
};

SweepResult sweep(const ExperimentConfig &cfg, const NoiseSpec &noise);

void write_report_csv(const MonteCarloReport &report, const std::string &path,
                      const std::string &label);
void write_runs_csv(const MonteCarloReport &report, const std::string &path);
// Re-aggregates a per-run CSV produced by write_runs_csv.
MonteCarloReport read_runs_csv(const std::string &path);

void write_sweep_csv(const SweepResult &res, const ExperimentConfig &cfg,
                     const std::string &dir);

} // namespace drddpc
