#include "drddpc/ocp.hpp"
#include "drddpc/solver.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace drddpc;
using testutil::benchmark_model;
using testutil::benchmark_costs;
using testutil::benchmark_cons;
using testutil::unbounded_cons;

namespace {

struct Instance {
    HankelPartition part;
    SpcPredictor pred;
    VectorXd m_f, u_p, y_p;
};

Instance noisy_instance(std::uint64_t seed) {
    const StateSpaceModel md = benchmark_model();
    const NoiseSpec noise(VectorXd::Zero(1),
                          0.012 * MatrixXd::Identity(1, 1));
    Instance inst;
    inst.part = partition(excite_and_collect(md, noise, 200, 3.0, seed), 5,
                          10);
    inst.pred = fit(inst.part);
    inst.u_p = VectorXd(5);
    inst.y_p = VectorXd(5);
    for (int i = 0; i < 5; ++i) {
        inst.u_p(i) = 0.5 * rng::standard_normal(seed, 81, i);
        inst.y_p(i) = 0.5 * rng::standard_normal(seed, 82, i);
    }
    inst.m_f = VectorXd::Zero(20);
    inst.m_f.head(5) = inst.u_p;
    inst.m_f.segment(5, 5) = inst.y_p;
    return inst;
}

double solve_opt(const OcpProgram &ocp) {
    const Solution sol = solve(ocp.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    return sol.objective;
}

} // namespace

TEST_CASE("lipschitz: catalog values") {
    OutputCost cost;
    cost.y_ref = VectorXd::Zero(10);
    cost.variant = OutputCostVariant::L1;
    const VectorXd lo = VectorXd::Constant(10, -5.0);
    const VectorXd hi = VectorXd::Constant(10, 5.0);
    CHECK(lipschitz(cost, 2, lo, hi) == doctest::Approx(std::sqrt(10.0)));
    CHECK(lipschitz(cost, 1, lo, hi) == doctest::Approx(1.0));

    cost.variant = OutputCostVariant::Asymmetric;
    cost.w_over = 2.0;
    cost.w_under = 1.0;
    CHECK(lipschitz(cost, 2, lo, hi) ==
          doctest::Approx(2.0 * std::sqrt(10.0)));

    CHECK(lipschitz_box(2) == 1.0);
    CHECK(lipschitz_box(1) == 1.0);

    cost.variant = OutputCostVariant::Quadratic;
    cost.q_weights = VectorXd::Ones(10);
    // Gradient bound 2 * max|y - ref| = 10 per component.
    CHECK(lipschitz(cost, 2, lo, hi) ==
          doctest::Approx(10.0 * std::sqrt(10.0)));
    const VectorXd unb = VectorXd::Constant(10, testutil::inf());
    CHECK_THROWS_AS(lipschitz(cost, 2, lo, unb), std::invalid_argument);
}

TEST_CASE("output cost: evaluation and Lipschitz bound on samples") {
    OutputCost cost;
    cost.y_ref = VectorXd::Zero(4);
    cost.variant = OutputCostVariant::Asymmetric;
    VectorXd y(4);
    y << 1, -1, 2, -0.5;
    CHECK(cost.eval(y) == doctest::Approx(2 + 1 + 4 + 0.5));

    const double L = lipschitz(cost, 2, VectorXd::Constant(4, -5.0),
                               VectorXd::Constant(4, 5.0));
    for (std::uint64_t t = 0; t < 50; ++t) {
        VectorXd a(4), b(4), mid(4);
        for (int i = 0; i < 4; ++i) {
            a(i) = 3.0 * rng::standard_normal(t, 83, i);
            b(i) = 3.0 * rng::standard_normal(t, 84, i);
        }
        CHECK(std::abs(cost.eval(a) - cost.eval(b)) <=
              L * (a - b).norm() + 1e-12);
        // Midpoint convexity.
        mid = 0.5 * (a + b);
        CHECK(cost.eval(mid) <=
              0.5 * cost.eval(a) + 0.5 * cost.eval(b) + 1e-12);
    }
}

TEST_CASE("constraint_subset: deterministic evenly spaced indices") {
    const std::vector<int> idx = constraint_subset(186, 20);
    CHECK(idx.size() == 20);
    CHECK(idx.front() == 9);  // ceil(1*186/20) = 10, zero-based 9
    CHECK(idx.back() == 185); // ceil(20*186/20) = 186, zero-based 185
    for (size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
    CHECK(constraint_subset(5, 5) == std::vector<int>{0, 1, 2, 3, 4});
    CHECK_THROWS_AS(constraint_subset(5, 6), std::invalid_argument);
}

TEST_CASE("build_spc_form: unconstrained certainty equivalence") {
    // Noise-free predictor, eps = 0, no active constraints: minimizer is
    // the analytic least-squares tracking solution.
    const StateSpaceModel md = benchmark_model();
    const Trajectory tr =
        excite_and_collect(md, NoiseSpec::zero(1), 200, 3.0, 301);
    const HankelPartition part = partition(tr, 5, 10);
    const SpcPredictor pred = fit(part);

    VectorXd m_f = VectorXd::Zero(20);
    for (int i = 0; i < 10; ++i)
        m_f(i) = 0.3 * rng::standard_normal(7, 85, i);
    CostSpec costs = benchmark_costs(10, 10);
    costs.output.y_ref = VectorXd::Constant(10, 0.7);
    const ConstraintSpec cons = unbounded_cons(10, 10);

    const OcpProgram ocp = build_spc_form(pred, m_f, costs, cons, 0.0, 0.0);
    ocp.prog.validate();
    const Solution sol = solve(ocp.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSolution cs = extract_solution(ocp, sol.z);

    const MatrixXd G = pred.Khat.rightCols(10);
    const VectorXd g0 = pred.Khat.leftCols(10) * m_f.head(10);
    const MatrixXd Rbar = 0.05 * MatrixXd::Identity(10, 10);
    const VectorXd u_star =
        (Rbar + G.transpose() * G)
            .ldlt()
            .solve(G.transpose() * (costs.output.y_ref - g0));
    CHECK((cs.u_f - u_star).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("build_spc_form: CVaR slack vector sizing") {
    const Instance inst = noisy_instance(302);
    CostSpec costs = benchmark_costs(10, 10);
    ConstraintSpec cons = benchmark_cons(10, 10);

    const OcpProgram ocp =
        build_spc_form(inst.pred, inst.m_f, costs, cons, 1e-3, 1e-4);
    ocp.prog.validate();
    REQUIRE(ocp.prog.find("s") != nullptr);
    CHECK(ocp.prog.find("s")->size == 20);

    cons.n_con_residuals = 1;
    const OcpProgram one =
        build_spc_form(inst.pred, inst.m_f, costs, cons, 1e-3, 1e-4);
    CHECK(one.prog.find("s")->size == 1);

    CHECK_THROWS_AS(
        build_spc_form(inst.pred, inst.m_f, costs, cons, -1.0, 0.0),
        std::invalid_argument);
}

TEST_CASE("direct form: equivalence with the predictor form") {
    for (std::uint64_t seed : {401, 402, 403}) {
        const Instance inst = noisy_instance(seed);
        CostSpec costs = benchmark_costs(10, 10);
        costs.output.y_ref = VectorXd::Constant(10, 0.4);
        const ConstraintSpec cons = benchmark_cons(10, 10);

        const OcpProgram a = build_spc_form(inst.pred, inst.m_f, costs,
                                            cons, 1e-3, 1e-4);
        const OcpProgram b =
            build_direct_form(inst.part, inst.pred, inst.u_p, inst.y_p,
                              costs, cons, 1e-3, 1e-4);
        CHECK(b.base_dim == inst.pred.rank);
        const double fa = solve_opt(a);
        const double fb = solve_opt(b);
        CHECK(std::abs(fa - fb) <= 1e-5 * (1.0 + std::abs(fa)));
    }
}

TEST_CASE("direct form: solution satisfies the window equalities") {
    const Instance inst = noisy_instance(404);
    const CostSpec costs = benchmark_costs(10, 10);
    const ConstraintSpec cons = benchmark_cons(10, 10);
    const OcpProgram ocp = build_direct_form(
        inst.part, inst.pred, inst.u_p, inst.y_p, costs, cons, 1e-3, 1e-4);
    const Solution sol = solve(ocp.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSolution cs = extract_solution(ocp, sol.z);
    REQUIRE(cs.g.size() == 186);
    CHECK((inst.part.Up * cs.g - inst.u_p).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((inst.part.Yp * cs.g - inst.y_p).cwiseAbs().maxCoeff() <= 1e-5);
    // (I - P) g = 0 by the null-space parametrization.
    const MatrixXd I = MatrixXd::Identity(186, 186);
    CHECK(((I - inst.pred.P) * cs.g).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((cs.u_f - inst.part.Uf * cs.g).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("build_reg_deepc: penalty domination drives g to zero") {
    const Instance inst = noisy_instance(405);
    const CostSpec costs = benchmark_costs(10, 10);
    const ConstraintSpec cons = unbounded_cons(10, 10);
    // Consistent zero window keeps the equalities satisfiable at g = 0.
    const VectorXd zero5 = VectorXd::Zero(5);
    const OcpProgram ocp = build_reg_deepc(inst.part, zero5, zero5, costs,
                                           cons, 1e5);
    const Solution sol = solve(ocp.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSolution cs = extract_solution(ocp, sol.z);
    CHECK(cs.g.cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((inst.part.Yf * cs.g).cwiseAbs().maxCoeff() <= 1e-5);

    CHECK_THROWS_AS(build_reg_deepc(inst.part, zero5, zero5, costs, cons,
                                    -1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_reg_deepc(inst.part, VectorXd::Zero(4), zero5,
                                    costs, cons, 1.0),
                    std::invalid_argument);
}

TEST_CASE("build_reg_deepc: lambda 0 on noise-free data matches SPC") {
    const StateSpaceModel md = benchmark_model();
    const Trajectory tr =
        excite_and_collect(md, NoiseSpec::zero(1), 200, 3.0, 406);
    const HankelPartition part = partition(tr, 5, 10);
    const SpcPredictor pred = fit(part);

    // A window consistent with the plant: zero past, so g = 0 matches the
    // equalities and the optimal u_f is the unconstrained tracking input.
    VectorXd m_f = VectorXd::Zero(20);
    CostSpec costs = benchmark_costs(10, 10);
    costs.output.y_ref = VectorXd::Constant(10, 0.5);
    const ConstraintSpec cons = unbounded_cons(10, 10);

    const OcpProgram spc = build_spc_baseline(pred, m_f, costs, cons);
    const OcpProgram dee = build_reg_deepc(part, VectorXd::Zero(5),
                                           VectorXd::Zero(5), costs, cons,
                                           0.0);
    const Solution sa = solve(spc.prog);
    const Solution sb = solve(dee.prog);
    REQUIRE(sa.status == SolveStatus::Optimal);
    REQUIRE(sb.status == SolveStatus::Optimal);
    const VectorXd ua = extract_solution(spc, sa.z).u_f;
    const VectorXd ub = extract_solution(dee, sb.z).u_f;
    CHECK((ua - ub).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("extract_solution: layout round trip") {
    const Instance inst = noisy_instance(407);
    const CostSpec costs = benchmark_costs(10, 10);
    const ConstraintSpec cons = benchmark_cons(10, 10);
    const OcpProgram ocp =
        build_spc_form(inst.pred, inst.m_f, costs, cons, 1e-3, 1e-4);

    VectorXd raw = VectorXd::Zero(ocp.prog.num_vars());
    raw.head(10) = VectorXd::LinSpaced(10, 0.1, 1.0);
    raw(ocp.prog.find("tau")->offset) = 0.25;
    raw(ocp.prog.find("v")->offset) = 0.5;
    const ControlSolution cs = extract_solution(ocp, raw);
    CHECK(cs.u_f == raw.head(10));
    CHECK(cs.tau == 0.25);
    CHECK(cs.cvar_soft == 0.5);
    CHECK(cs.s.size() == 20);
    CHECK(cs.cvar_lhs ==
          doctest::Approx(-0.2 * 0.25 + ocp.L_con * ocp.eps_con + 0.0 -
                          0.5));
    CHECK_THROWS_AS(extract_solution(ocp, VectorXd::Zero(3)),
                    std::invalid_argument);
}

TEST_CASE("objective equals manual cost evaluation (quadratic, DR)") {
    const Instance inst = noisy_instance(408);
    CostSpec costs = benchmark_costs(10, 10);
    costs.output.y_ref = VectorXd::Constant(10, 0.3);
    const ConstraintSpec cons = unbounded_cons(10, 10);
    const double eps_obj = 2e-3;
    const OcpProgram ocp =
        build_spc_form(inst.pred, inst.m_f, costs, cons, eps_obj, 1e-4);
    const Solution sol = solve(ocp.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSolution cs = extract_solution(ocp, sol.z);

    // Manual: f1 + scenario average of f2 + L_obj * eps_obj.
    double manual = cs.u_f.array().square().sum() * 0.05;
    VectorXd m_f = inst.m_f;
    m_f.tail(10) = cs.u_f;
    const VectorXd center = predict(inst.pred, m_f);
    for (int i = 0; i < 186; ++i)
        manual += costs.output.eval(center + inst.pred.Xi.col(i)) / 186.0;
    manual += ocp.L_obj * eps_obj;
    CHECK(cs.objective == doctest::Approx(manual).epsilon(1e-8));
}

TEST_CASE("epigraph exactness for scenario-averaged l1 cost") {
    const Instance inst = noisy_instance(409);
    CostSpec costs = benchmark_costs(10, 10);
    costs.output.variant = OutputCostVariant::L1;
    costs.output.y_ref = VectorXd::Constant(10, 0.2);
    const ConstraintSpec cons = unbounded_cons(10, 10);
    const OcpProgram ocp =
        build_spc_form(inst.pred, inst.m_f, costs, cons, 0.0, 0.0);

    // Structural exactness: for random inputs, the smallest feasible
    // epigraph value per coordinate equals the scenario-averaged cost.
    const VarSlice *epi = ocp.prog.find("epi");
    REQUIRE(epi != nullptr);
    REQUIRE(epi->size == 10);
    for (std::uint64_t t = 0; t < 10; ++t) {
        VectorXd u(10);
        for (int i = 0; i < 10; ++i)
            u(i) = rng::standard_normal(t, 88, i);
        VectorXd m_f = inst.m_f;
        m_f.tail(10) = u;
        const VectorXd center = predict(inst.pred, m_f);
        VectorXd z = VectorXd::Zero(ocp.prog.num_vars());
        z.head(10) = u;
        for (int j = 0; j < 10; ++j) {
            double want = 0.0;
            for (int i = 0; i < 186; ++i) {
                const double dev =
                    center(j) + inst.pred.Xi(j, i) - costs.output.y_ref(j);
                want += std::abs(dev) / 186.0;
            }
            double got = -testutil::inf();
            for (int r = 0; r < ocp.prog.A_in.rows(); ++r) {
                if (ocp.prog.A_in(r, epi->offset + j) != -1.0) continue;
                got = std::max(got, ocp.prog.A_in.row(r).dot(z) -
                                        ocp.prog.b_in(r));
            }
            CHECK(got == doctest::Approx(want).epsilon(1e-9));
        }
    }

    const Solution sol = solve(ocp.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSolution cs = extract_solution(ocp, sol.z);

    double manual = cs.u_f.array().square().sum() * 0.05;
    VectorXd m_f = inst.m_f;
    m_f.tail(10) = cs.u_f;
    const VectorXd center = predict(inst.pred, m_f);
    for (int i = 0; i < 186; ++i)
        manual += costs.output.eval(center + inst.pred.Xi.col(i)) / 186.0;
    CHECK(cs.objective == doctest::Approx(manual).epsilon(1e-6));
}

TEST_CASE("monotonicity in the ambiguity radii") {
    const Instance inst = noisy_instance(410);
    const CostSpec costs = benchmark_costs(10, 10);
    const ConstraintSpec cons = benchmark_cons(10, 10);

    double prev = -1e100;
    for (double eps_obj : {0.0, 1e-3, 1e-2, 1e-1}) {
        const double val = solve_opt(build_spc_form(
            inst.pred, inst.m_f, costs, cons, eps_obj, 1e-4));
        CHECK(val >= prev - 1e-9);
        prev = val;
    }

    // Growing eps_con shrinks the CVaR-feasible set: a candidate feasible
    // at large eps_con stays feasible at small eps_con, and the budget row
    // left-hand side is monotone in eps_con for a fixed candidate.
    const OcpProgram big = build_spc_form(inst.pred, inst.m_f, costs, cons,
                                          1e-3, 0.5);
    const Solution sol = solve(big.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSolution cs = extract_solution(big, sol.z);
    const double lhs_big = -cs.tau * big.beta + big.L_con * 0.5 +
                           cs.s.mean();
    const double lhs_small = -cs.tau * big.beta + big.L_con * 1e-4 +
                             cs.s.mean();
    CHECK(lhs_small <= lhs_big);
}

TEST_CASE("Theorem-1 upper bound dominates sampled ball perturbations") {
    // Tiny synthetic instance: d = 2 atoms dimensions, N = 4 scenarios.
    SpcPredictor pred;
    pred.Tp = 1;
    pred.Tf = 2;
    pred.m = 1;
    pred.p = 1;
    pred.N = 4;
    pred.rank = 2;
    pred.Khat = MatrixXd(2, 4);
    pred.Khat << 0.2, 0.4, 1.0, 0.1, -0.3, 0.5, 0.2, 0.9;
    pred.Xi = MatrixXd(2, 4);
    pred.Xi << 0.1, -0.2, 0.05, 0.0, -0.1, 0.15, 0.0, 0.05;

    CostSpec costs;
    costs.input.r_weights = VectorXd::Constant(2, 0.05);
    costs.output.variant = OutputCostVariant::L1;
    costs.output.y_ref = VectorXd::Zero(2);
    ConstraintSpec cons = unbounded_cons(2, 2);

    VectorXd m_f(4);
    m_f << 0.3, -0.2, 0.0, 0.0;
    const double eps_obj = 0.05;
    const OcpProgram ocp =
        build_spc_form(pred, m_f, costs, cons, eps_obj, 0.0);
    const Solution sol = solve(ocp.prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSolution cs = extract_solution(ocp, sol.z);

    VectorXd mf2 = m_f;
    mf2.tail(2) = cs.u_f;
    const VectorXd center = pred.Khat * mf2;
    const double f1 = cs.u_f.array().square().sum() * 0.05;
    for (std::uint64_t t = 0; t < 200; ++t) {
        // Random perturbation with average squared norm within eps^2.
        MatrixXd delta(2, 4);
        for (int i = 0; i < 8; ++i)
            delta(i % 2, i / 2) = rng::standard_normal(t, 86, i);
        double pw = 0.0;
        for (int i = 0; i < 4; ++i) pw += delta.col(i).squaredNorm();
        delta *= eps_obj / std::sqrt(pw / 4.0) *
                 (0.2 + 0.8 * rng::uniform01(rng::hash_key(t, 87, 0, 0)));
        double perturbed = f1;
        for (int i = 0; i < 4; ++i)
            perturbed += costs.output.eval(center + pred.Xi.col(i) +
                                           delta.col(i)) /
                         4.0;
        CHECK(cs.objective >= perturbed - 1e-9);
    }
}
