#include "drddpc/bench.hpp"
#include "drddpc/data.hpp"
#include "drddpc/rng.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCampaign = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> method;
    std::optional<int> jobs;
};

void add_common(CLI::App *cmd, CommonArgs &args, bool needs_config = true) {
    auto *c = cmd->add_option("--config", args.config_path,
                              "experiment config JSON");
    if (needs_config) c->required();
    cmd->add_option("--out-dir", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override base seed");
    cmd->add_option("--method", args.method, "controller name from config");
    cmd->add_option("--jobs", args.jobs, "parallel Monte-Carlo workers");
}

std::string resolve_out_dir(const CommonArgs &args) {
    const char *env = std::getenv("DRDDPC_OUT_DIR");
    const std::string dir = env && *env ? env : args.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

drddpc::ExperimentConfig load_config(const CommonArgs &args) {
    auto cfg = drddpc::ExperimentConfig::from_json_file(args.config_path);
    if (args.seed) cfg.base_seed = *args.seed;
    if (args.jobs) cfg.jobs = *args.jobs;
    return cfg;
}

const drddpc::ControllerEntry &pick_method(
    const drddpc::ExperimentConfig &cfg, const CommonArgs &args) {
    if (!args.method) return cfg.controllers.front();
    for (const auto &e : cfg.controllers)
        if (e.name == *args.method) return e;
    throw std::invalid_argument("unknown controller name: " + *args.method);
}

int cmd_collect(const CommonArgs &args) {
    const auto cfg = load_config(args);
    const std::string dir = resolve_out_dir(args);
    const drddpc::NoiseSpec noise(cfg.noise_mean, cfg.covariance_grid[0]);
    const drddpc::Trajectory traj = drddpc::excite_and_collect(
        *cfg.model, noise, cfg.T, cfg.input_std, cfg.base_seed);
    drddpc::write_csv(traj, dir + "/offline.csv");
    std::cout << "wrote " << dir << "/offline.csv (T=" << cfg.T << ")\n";
    return kExitOk;
}

int cmd_run(const CommonArgs &args) {
    const auto cfg = load_config(args);
    const auto &entry = pick_method(cfg, args);
    const std::string dir = resolve_out_dir(args);
    const drddpc::NoiseSpec noise(cfg.noise_mean, cfg.covariance_grid[0]);

    const drddpc::Trajectory offline = drddpc::excite_and_collect(
        *cfg.model, noise, cfg.T, cfg.input_std, cfg.base_seed);
    const drddpc::ControllerContext ctx =
        drddpc::make_context(offline, cfg.Tp, cfg.Tf);
    const drddpc::NoiseRealization loop = drddpc::make_noise_realization(
        noise, cfg.model->n, cfg.base_seed, cfg.Tp + cfg.T_run,
        drddpc::rng::kLoopNoise, drddpc::rng::kLoopInit);
    const drddpc::ControllerConfig cc = cfg.controller_config(entry);
    const drddpc::ClosedLoopTrace trace = drddpc::run_closed_loop(
        *cfg.model, cc, ctx, loop, cfg.reference.make(cfg.model->p),
        cfg.T_run);
    const std::string path = dir + "/trace_" + entry.name + ".csv";
    trace.write_csv(path);
    const drddpc::CostSpec costs = cc.costs;
    std::cout << "wrote " << path
              << " jtest=" << drddpc::j_test(trace, costs) << "\n";
    return kExitOk;
}

int cmd_bench(const CommonArgs &args) {
    auto cfg = load_config(args);
    if (args.method) {
        const auto entry = pick_method(cfg, args);
        cfg.controllers = {entry};
    }
    const std::string dir = resolve_out_dir(args);
    for (size_t i = 0; i < cfg.covariance_grid.size(); ++i) {
        const drddpc::NoiseSpec noise(cfg.noise_mean,
                                      cfg.covariance_grid[i]);
        const drddpc::MonteCarloReport rep =
            drddpc::run_monte_carlo(cfg, noise);
        const std::string tag = "sigma" + std::to_string(i);
        drddpc::write_runs_csv(rep, dir + "/runs_" + tag + ".csv");
        drddpc::write_report_csv(rep, dir + "/report_" + tag + ".csv", tag);
        std::cout << "level " << i << ":";
        for (const auto &st : rep.methods)
            std::cout << " " << st.method << " jtest=" << st.mean_jtest
                      << " viol%=" << st.mean_violation;
        std::cout << " (" << rep.runtime_seconds << "s)\n";
    }
    return kExitOk;
}

int cmd_sweep(const CommonArgs &args) {
    const auto cfg = load_config(args);
    const std::string dir = resolve_out_dir(args);
    const drddpc::NoiseSpec noise(cfg.noise_mean, cfg.covariance_grid[0]);
    const drddpc::SweepResult res = drddpc::sweep(cfg, noise);
    drddpc::write_sweep_csv(res, cfg, dir);
    std::cout << "wrote sweep matrices to " << dir << "\n";
    return kExitOk;
}

int cmd_report(const CommonArgs &args, const std::string &input) {
    const std::string dir = resolve_out_dir(args);
    const drddpc::MonteCarloReport rep = drddpc::read_runs_csv(input);
    drddpc::write_report_csv(rep, dir + "/report.csv", "reaggregated");
    std::cout << "wrote " << dir << "/report.csv\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Distributionally robust data-driven predictive control"};
    app.require_subcommand(1);

    CommonArgs collect_args, run_args, bench_args, sweep_args, report_args;
    std::string report_input;

    auto *collect = app.add_subcommand("collect", "generate offline data CSV");
    add_common(collect, collect_args);
    auto *run = app.add_subcommand("run", "single closed-loop trace");
    add_common(run, run_args);
    auto *bench = app.add_subcommand("bench", "Monte-Carlo campaign");
    add_common(bench, bench_args);
    auto *sweep_cmd = app.add_subcommand("sweep", "eps_con x beta grid");
    add_common(sweep_cmd, sweep_args);
    auto *report = app.add_subcommand("report", "re-aggregate per-run CSV");
    add_common(report, report_args, false);
    report->add_option("--input", report_input, "per-run CSV path")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (collect->parsed()) return cmd_collect(collect_args);
        if (run->parsed()) return cmd_run(run_args);
        if (bench->parsed()) return cmd_bench(bench_args);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (report->parsed()) return cmd_report(report_args, report_input);
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error &e) {
        // Missing files and parse failures are configuration problems;
        // anything surfacing mid-campaign is a campaign failure.
        const std::string what = e.what();
        if (what.find("cannot open") != std::string::npos ||
            what.find("parse") != std::string::npos) {
            std::cerr << "config error: " << what << "\n";
            return kExitConfig;
        }
        std::cerr << "campaign error: " << what << "\n";
        return kExitCampaign;
    } catch (const std::exception &e) {
        std::cerr << "campaign error: " << e.what() << "\n";
        return kExitCampaign;
    }
    return kExitOk;
}
