#include "drddpc/bench.hpp"

#include "drddpc/data.hpp"
#include "drddpc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace drddpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Reference ReferenceSpec::make(int p) const {
    if (kind == ReferenceKind::Zero)
        return [p](int) { return VectorXd::Zero(p); };
    const double period_ = period, amplitude_ = amplitude;
    return [p, period_, amplitude_](int k) {
        return VectorXd::Constant(
            p, amplitude_ * std::sin(2.0 * kPi * k / period_));
    };
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string &text) {
    using nlohmann::json;
    const json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
        throw std::invalid_argument("ExperimentConfig: unsupported schema");

    cfg.model = StateSpaceModel::from_json_text(j.at("model").dump());
    const int p = cfg.model->p;

    if (j.contains("noise")) {
        const json &n = j["noise"];
        if (n.contains("mean")) {
            if (n["mean"].is_number()) {
                cfg.noise_mean = VectorXd::Constant(p, n["mean"].get<double>());
            } else {
                cfg.noise_mean.resize(n["mean"].size());
                for (size_t i = 0; i < n["mean"].size(); ++i)
                    cfg.noise_mean(static_cast<int>(i)) =
                        n["mean"][i].get<double>();
            }
        }
        if (n.contains("covariance_grid")) {
            for (const auto &c : n["covariance_grid"]) {
                if (c.is_number()) {
                    cfg.covariance_grid.push_back(
                        c.get<double>() * MatrixXd::Identity(p, p));
                } else {
                    MatrixXd M(c.size(), c.at(0).size());
                    for (size_t r = 0; r < c.size(); ++r)
                        for (size_t cc = 0; cc < c[r].size(); ++cc)
                            M(static_cast<int>(r), static_cast<int>(cc)) =
                                c[r][cc].get<double>();
                    cfg.covariance_grid.push_back(M);
                }
            }
        }
    }
    if (cfg.noise_mean.size() == 0) cfg.noise_mean = VectorXd::Zero(p);
    if (cfg.covariance_grid.empty())
        cfg.covariance_grid.push_back(0.012 * MatrixXd::Identity(p, p));

    auto opt = [&](const json &o, const char *key, auto &field) {
        if (o.contains(key)) field = o[key].template get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("data")) {
        const json &d = j["data"];
        opt(d, "T", cfg.T);
        opt(d, "Tp", cfg.Tp);
        opt(d, "Tf", cfg.Tf);
        opt(d, "input_std", cfg.input_std);
    }
    if (j.contains("run")) {
        const json &r = j["run"];
        opt(r, "T_run", cfg.T_run);
        opt(r, "n_runs", cfg.n_runs);
        opt(r, "base_seed", cfg.base_seed);
        opt(r, "jobs", cfg.jobs);
    }
    if (j.contains("reference")) {
        const json &r = j["reference"];
        const std::string type = r.value("type", "sine");
        if (type == "zero")
            cfg.reference.kind = ReferenceKind::Zero;
        else if (type == "sine")
            cfg.reference.kind = ReferenceKind::Sine;
        else
            throw std::invalid_argument("ExperimentConfig: unknown reference");
        opt(r, "period", cfg.reference.period);
        opt(r, "amplitude", cfg.reference.amplitude);
    }
    if (j.contains("cost")) {
        const json &c = j["cost"];
        const std::string variant = c.value("variant", "quadratic");
        if (variant == "quadratic")
            cfg.cost_variant = OutputCostVariant::Quadratic;
        else if (variant == "l1")
            cfg.cost_variant = OutputCostVariant::L1;
        else if (variant == "asymmetric")
            cfg.cost_variant = OutputCostVariant::Asymmetric;
        else
            throw std::invalid_argument("ExperimentConfig: unknown cost");
        opt(c, "R", cfg.R);
        opt(c, "Q", cfg.Q);
        opt(c, "w_over", cfg.w_over);
        opt(c, "w_under", cfg.w_under);
    }
    if (j.contains("constraints")) {
        const json &c = j["constraints"];
        opt(c, "y_lo", cfg.y_lo);
        opt(c, "y_hi", cfg.y_hi);
        opt(c, "u_lo", cfg.u_lo);
        opt(c, "u_hi", cfg.u_hi);
        opt(c, "beta", cfg.beta);
        opt(c, "n_con_residuals", cfg.n_con_residuals);
        opt(c, "soft_penalty_cvar", cfg.soft_penalty_cvar);
        opt(c, "soft_penalty_box", cfg.soft_penalty_box);
    }
    if (j.contains("radius")) {
        const json &r = j["radius"];
        const std::string mode = r.value("mode", "tuned");
        if (mode == "tuned")
            cfg.radius.mode = RadiusMode::Tuned;
        else if (mode == "theoretical")
            cfg.radius.mode = RadiusMode::Theoretical;
        else
            throw std::invalid_argument("ExperimentConfig: unknown radius mode");
        opt(r, "alpha", cfg.radius.alpha);
        opt(r, "r", cfg.radius.r);
        opt(r, "gamma_alpha", cfg.radius.gamma_alpha);
        opt(r, "C", cfg.radius.C);
        opt(r, "q", cfg.radius.q);
        opt(r, "eps1", cfg.radius.eps1);
        opt(r, "eps2", cfg.radius.eps2);
        opt(r, "eps_con", cfg.radius.eps_con);
    }
    if (j.contains("solver")) {
        const json &s = j["solver"];
        opt(s, "tol_p", cfg.solver.tol_p);
        opt(s, "tol_d", cfg.solver.tol_d);
        opt(s, "max_iter", cfg.solver.max_iter);
    }
    if (j.contains("controllers")) {
        for (const auto &c : j["controllers"]) {
            ControllerEntry e;
            e.name = c.at("name").get<std::string>();
            const std::string kind = c.at("kind").get<std::string>();
            if (kind == "spc")
                e.kind = ControllerKind::SPC;
            else if (kind == "regdeepc")
                e.kind = ControllerKind::RegDeePC;
            else if (kind == "drddpc")
                e.kind = ControllerKind::DRDDPC;
            else
                throw std::invalid_argument(
                    "ExperimentConfig: unknown controller kind");
            opt(c, "lambda_g", e.lambda_g);
            opt(c, "use_direct", e.use_direct);
            if (c.contains("beta")) e.beta = c["beta"].get<double>();
            if (c.contains("eps_con")) e.eps_con = c["eps_con"].get<double>();
            cfg.controllers.push_back(std::move(e));
        }
    }
    if (cfg.controllers.empty())
        throw std::invalid_argument("ExperimentConfig: no controllers");
    if (j.contains("sweep")) {
        const json &s = j["sweep"];
        if (s.contains("eps_con_grid"))
            cfg.sweep_eps_con =
                s["eps_con_grid"].get<std::vector<double>>();
        if (s.contains("beta_grid"))
            cfg.sweep_beta = s["beta_grid"].get<std::vector<double>>();
        opt(s, "n_runs", cfg.sweep_n_runs);
        opt(s, "y_lo", cfg.sweep_y_lo);
        opt(s, "y_hi", cfg.sweep_y_hi);
    }
    if (cfg.sweep_eps_con.empty() || cfg.sweep_beta.empty())
        throw std::invalid_argument("ExperimentConfig: empty sweep grid");
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

ControllerConfig ExperimentConfig::controller_config(
    const ControllerEntry &entry) const {
    const int m = model->m, p = model->p;
    const int mTf = m * Tf, pTf = p * Tf;

    ControllerConfig cc;
    cc.kind = entry.kind;
    cc.Tp = Tp;
    cc.Tf = Tf;
    cc.lambda_g = entry.lambda_g;
    cc.use_direct = entry.use_direct;
    cc.solver = solver;
    cc.radius = radius;
    if (entry.eps_con) cc.radius.eps_con = *entry.eps_con;

    cc.costs.input.r_weights = VectorXd::Constant(mTf, R);
    cc.costs.output.variant = cost_variant;
    cc.costs.output.q_weights = VectorXd::Constant(pTf, Q);
    cc.costs.output.y_ref = VectorXd::Zero(pTf);
    cc.costs.output.w_over = w_over;
    cc.costs.output.w_under = w_under;
    cc.costs.wasserstein_r = radius.r;

    cc.cons.y_lo = VectorXd::Constant(pTf, y_lo);
    cc.cons.y_hi = VectorXd::Constant(pTf, y_hi);
    cc.cons.u_lo = VectorXd::Constant(mTf, u_lo);
    cc.cons.u_hi = VectorXd::Constant(mTf, u_hi);
    cc.cons.beta = entry.beta ? *entry.beta : beta;
    cc.cons.n_con_residuals = n_con_residuals;
    cc.cons.soft_penalty_cvar = soft_penalty_cvar;
    cc.cons.soft_penalty_box = soft_penalty_box;
    return cc;
}

double j_test(const ClosedLoopTrace &trace, const CostSpec &costs) {
    const int T_run = trace.length();
    const int m = static_cast<int>(trace.u.cols());
    const int p = static_cast<int>(trace.y.cols());
    const VectorXd r = costs.input.r_weights.head(m);
    OutputCost step_cost = costs.output;
    step_cost.y_ref = VectorXd::Zero(p);
    if (step_cost.variant == OutputCostVariant::Quadratic)
        step_cost.q_weights = costs.output.q_weights.head(p);
    double acc = 0.0;
    for (int k = 0; k < T_run; ++k) {
        const VectorXd u = trace.u.row(k).transpose();
        const VectorXd y = trace.y.row(k).transpose();
        step_cost.y_ref = trace.yr.row(k).transpose();
        acc += u.array().square().matrix().dot(r) + step_cost.eval(y);
    }
    return acc / T_run;
}

double violation_rate(const ClosedLoopTrace &trace, const VectorXd &y_lo,
                      const VectorXd &y_hi) {
    const int T_run = trace.length();
    int bad = 0;
    for (int k = 0; k < T_run; ++k) {
        bool out = false;
        for (int i = 0; i < trace.y.cols() && !out; ++i) {
            const double y = trace.y(k, i);
            if ((std::isfinite(y_hi(i)) && y > y_hi(i)) ||
                (std::isfinite(y_lo(i)) && y < y_lo(i)))
                out = true;
        }
        if (out) ++bad;
    }
    return 100.0 * bad / T_run;
}

MonteCarloReport run_monte_carlo(const ExperimentConfig &cfg,
                                 const NoiseSpec &noise) {
    const auto t0 = std::chrono::steady_clock::now();
    const StateSpaceModel &model = *cfg.model;
    const int n_methods = static_cast<int>(cfg.controllers.size());
    const int n_runs = cfg.n_runs;
    const Reference ref = cfg.reference.make(model.p);

    std::vector<ControllerConfig> ccs;
    ccs.reserve(n_methods);
    for (const auto &e : cfg.controllers)
        ccs.push_back(cfg.controller_config(e));

    // results[method][run]
    std::vector<std::vector<double>> jt(n_methods,
                                        std::vector<double>(n_runs, 0.0));
    std::vector<std::vector<double>> vr = jt;
    std::vector<std::vector<int>> fb(n_methods,
                                     std::vector<int>(n_runs, 0));

    auto do_run = [&](int run) {
        const std::uint64_t seed = cfg.base_seed + run;
        const Trajectory offline = excite_and_collect(
            model, noise, cfg.T, cfg.input_std, seed);
        const ControllerContext ctx = make_context(offline, cfg.Tp, cfg.Tf);
        const NoiseRealization loop = make_noise_realization(
            noise, model.n, seed, cfg.Tp + cfg.T_run, rng::kLoopNoise,
            rng::kLoopInit);
        for (int mth = 0; mth < n_methods; ++mth) {
            const ClosedLoopTrace trace = run_closed_loop(
                model, ccs[mth], ctx, loop, ref, cfg.T_run);
            jt[mth][run] = j_test(trace, ccs[mth].costs);
            vr[mth][run] = violation_rate(trace, ccs[mth].cons.y_lo.head(model.p),
                                          ccs[mth].cons.y_hi.head(model.p));
            for (char f : trace.fallback) fb[mth][run] += f;
        }
    };

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (int run = 0; run < n_runs; ++run) do_run(run);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int run = next.fetch_add(1); run < n_runs;
                 run = next.fetch_add(1))
                do_run(run);
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto &t : pool) t.join();
    }

    MonteCarloReport rep;
    rep.n_runs = n_runs;
    rep.base_seed = cfg.base_seed;
    for (int mth = 0; mth < n_methods; ++mth) {
        MethodStats st;
        st.method = cfg.controllers[mth].name;
        st.per_run_jtest =
            Eigen::Map<const VectorXd>(jt[mth].data(), n_runs);
        st.per_run_violation =
            Eigen::Map<const VectorXd>(vr[mth].data(), n_runs);
        st.fallback_counts = fb[mth];
        st.seeds.resize(n_runs);
        for (int run = 0; run < n_runs; ++run)
            st.seeds[run] = cfg.base_seed + run;
        st.mean_jtest = st.per_run_jtest.mean();
        st.std_jtest = n_runs > 1
                           ? std::sqrt((st.per_run_jtest.array() -
                                        st.mean_jtest)
                                           .square()
                                           .sum() /
                                       (n_runs - 1))
                           : 0.0;
        st.mean_violation = st.per_run_violation.mean();
        for (int c : st.fallback_counts)
            if (c > 0) ++st.failed_runs;
        rep.methods.push_back(std::move(st));
    }
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rep;
}

SweepResult sweep(const ExperimentConfig &cfg, const NoiseSpec &noise) {
    const int nb = static_cast<int>(cfg.sweep_beta.size());
    const int ne = static_cast<int>(cfg.sweep_eps_con.size());
    SweepResult res;
    res.violation = MatrixXd::Zero(nb, ne);
    res.cost = MatrixXd::Zero(nb, ne);

    ExperimentConfig cell = cfg;
    cell.n_runs = cfg.sweep_n_runs;
    cell.y_lo = cfg.sweep_y_lo;
    cell.y_hi = cfg.sweep_y_hi;
    cell.reference.kind = ReferenceKind::Zero;
    cell.controllers.clear();
    ControllerEntry dr;
    dr.name = "drddpc";
    dr.kind = ControllerKind::DRDDPC;
    cell.controllers.push_back(dr);

    for (int bi = 0; bi < nb; ++bi)
        for (int ei = 0; ei < ne; ++ei) {
            cell.beta = cfg.sweep_beta[bi];
            cell.radius.eps_con = cfg.sweep_eps_con[ei];
            const MonteCarloReport rep = run_monte_carlo(cell, noise);
            res.violation(bi, ei) = rep.methods[0].mean_violation;
            res.cost(bi, ei) = rep.methods[0].mean_jtest;
        }
    return res;
}

void write_report_csv(const MonteCarloReport &report, const std::string &path,
                      const std::string &label) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# label=" << label << " base_seed=" << report.base_seed
        << " seed_scheme=base_seed+run_index\n";
    out << "method,mean_jtest,std_jtest,mean_violation_pct,n_runs,"
           "failed_runs\n";
    for (const auto &st : report.methods)
        out << st.method << "," << fmt17(st.mean_jtest) << ","
            << fmt17(st.std_jtest) << "," << fmt17(st.mean_violation) << ","
            << report.n_runs << "," << st.failed_runs << "\n";
}

void write_runs_csv(const MonteCarloReport &report, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "method,run,seed,jtest,violation_pct,fallback_steps\n";
    for (const auto &st : report.methods)
        for (int run = 0; run < report.n_runs; ++run)
            out << st.method << "," << run << "," << st.seeds[run] << ","
                << fmt17(st.per_run_jtest(run)) << ","
                << fmt17(st.per_run_violation(run)) << ","
                << st.fallback_counts[run] << "\n";
}

MonteCarloReport read_runs_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("method,run,seed,", 0) != 0)
        throw std::runtime_error("read_runs_csv: bad header in " + path);

    MonteCarloReport rep;
    std::vector<std::string> order;
    struct Acc {
        std::vector<double> jt, vr;
        std::vector<int> fb;
        std::vector<std::uint64_t> seeds;
    };
    std::vector<Acc> accs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string method, tok;
        std::getline(ss, method, ',');
        int idx = -1;
        for (size_t i = 0; i < order.size(); ++i)
            if (order[i] == method) idx = static_cast<int>(i);
        if (idx < 0) {
            idx = static_cast<int>(order.size());
            order.push_back(method);
            accs.emplace_back();
        }
        std::getline(ss, tok, ','); // run index, rows are ordered
        std::getline(ss, tok, ',');
        accs[idx].seeds.push_back(std::stoull(tok));
        std::getline(ss, tok, ',');
        accs[idx].jt.push_back(std::stod(tok));
        std::getline(ss, tok, ',');
        accs[idx].vr.push_back(std::stod(tok));
        std::getline(ss, tok, ',');
        accs[idx].fb.push_back(std::stoi(tok));
    }
    for (size_t i = 0; i < order.size(); ++i) {
        MethodStats st;
        st.method = order[i];
        const int n = static_cast<int>(accs[i].jt.size());
        rep.n_runs = n;
        st.per_run_jtest = Eigen::Map<const VectorXd>(accs[i].jt.data(), n);
        st.per_run_violation =
            Eigen::Map<const VectorXd>(accs[i].vr.data(), n);
        st.fallback_counts = accs[i].fb;
        st.seeds = accs[i].seeds;
        st.mean_jtest = st.per_run_jtest.mean();
        st.std_jtest =
            n > 1 ? std::sqrt((st.per_run_jtest.array() - st.mean_jtest)
                                  .square()
                                  .sum() /
                              (n - 1))
                  : 0.0;
        st.mean_violation = st.per_run_violation.mean();
        for (int c : st.fallback_counts)
            if (c > 0) ++st.failed_runs;
        rep.methods.push_back(std::move(st));
    }
    if (!rep.methods.empty() && !rep.methods[0].seeds.empty())
        rep.base_seed = rep.methods[0].seeds[0];
    return rep;
}

void write_sweep_csv(const SweepResult &res, const ExperimentConfig &cfg,
                     const std::string &dir) {
    auto write_matrix = [&](const MatrixXd &M, const std::string &path) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << "beta_eps_con";
        for (double e : cfg.sweep_eps_con) out << "," << fmt17(e);
        out << "\n";
        for (int bi = 0; bi < M.rows(); ++bi) {
            out << fmt17(cfg.sweep_beta[bi]);
            for (int ei = 0; ei < M.cols(); ++ei)
                out << "," << fmt17(M(bi, ei));
            out << "\n";
        }
    };
    write_matrix(res.violation, dir + "/sweep_violation.csv");
    write_matrix(res.cost, dir + "/sweep_cost.csv");

    nlohmann::json meta;
    meta["eps_con_grid"] = cfg.sweep_eps_con;
    meta["beta_grid"] = cfg.sweep_beta;
    meta["n_runs_per_cell"] = cfg.sweep_n_runs;
    meta["base_seed"] = cfg.base_seed;
    meta["y_box"] = {cfg.sweep_y_lo, cfg.sweep_y_hi};
    meta["reference"] = "zero";
    std::ofstream out(dir + "/sweep_meta.json");
    if (!out) throw std::runtime_error("cannot open sweep_meta.json");
    out << meta.dump(2) << "\n";
}

} // namespace drddpc
