#include "helpers.hpp"

#include <doctest.h>

using namespace drddpc;
using testutil::benchmark_model;

TEST_CASE("step: zero fixed point") {
    const StateSpaceModel md = benchmark_model();
    VectorXd x = VectorXd::Zero(2), xn, y;
    step(md, x, VectorXd::Zero(1), VectorXd::Zero(1), xn, y);
    CHECK(xn.norm() == 0.0);
    CHECK(y.norm() == 0.0);
}

TEST_CASE("step: benchmark matrices act as expected") {
    const StateSpaceModel md = benchmark_model();
    VectorXd x(2), xn, y;
    x << 0.0, 1.0;
    step(md, x, VectorXd::Zero(1), VectorXd::Zero(1), xn, y);
    CHECK(y(0) == doctest::Approx(1.4142).epsilon(1e-12));

    step(md, VectorXd::Zero(2), VectorXd::Ones(1), VectorXd::Zero(1), xn, y);
    CHECK(xn(0) == doctest::Approx(0.0609).epsilon(1e-12));
    CHECK(xn(1) == doctest::Approx(0.0064).epsilon(1e-12));
}

TEST_CASE("step: dimension mismatch throws") {
    const StateSpaceModel md = benchmark_model();
    VectorXd xn, y;
    CHECK_THROWS_AS(step(md, VectorXd::Zero(3), VectorXd::Zero(1),
                         VectorXd::Zero(1), xn, y),
                    std::invalid_argument);
}

TEST_CASE("model construction: observability enforced") {
    MatrixXd A = MatrixXd::Zero(2, 2), B = MatrixXd::Zero(2, 1);
    MatrixXd C = MatrixXd::Zero(1, 2), D = MatrixXd::Zero(1, 1);
    MatrixXd Ke = MatrixXd::Zero(2, 1);
    CHECK_THROWS_AS(StateSpaceModel(A, B, C, D, Ke), std::invalid_argument);
}

TEST_CASE("simulate: T=1 reduces to step") {
    const StateSpaceModel md = benchmark_model();
    MatrixXd u(1, 1), e(1, 1);
    u << 0.7;
    e << -0.3;
    VectorXd x0(2);
    x0 << 0.2, -0.5;
    const Trajectory tr = simulate(md, x0, u, e);
    VectorXd xn, y;
    step(md, x0, u.row(0).transpose(), e.row(0).transpose(), xn, y);
    CHECK(tr.y(0, 0) == y(0));
    CHECK(tr.u(0, 0) == 0.7);
}

TEST_CASE("simulate: zero input, zero noise, zero state stays zero") {
    const StateSpaceModel md = benchmark_model();
    const Trajectory tr = simulate(md, VectorXd::Zero(2),
                                   MatrixXd::Zero(20, 1),
                                   MatrixXd::Zero(20, 1));
    CHECK(tr.y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate: linearity in the input") {
    const StateSpaceModel md = benchmark_model();
    const int T = 30;
    MatrixXd u1(T, 1), u2(T, 1);
    for (int k = 0; k < T; ++k) {
        u1(k, 0) = rng::standard_normal(11, 70, k);
        u2(k, 0) = rng::standard_normal(11, 71, k);
    }
    const MatrixXd e = MatrixXd::Zero(T, 1);
    VectorXd x0(2);
    x0 << 0.4, -0.2;
    const Trajectory a = simulate(md, x0, u1 + u2, e);
    const Trajectory b = simulate(md, x0, u1, e);
    const Trajectory c = simulate(md, VectorXd::Zero(2), u2, e);
    CHECK((a.y - b.y - c.y).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("noise realization: bit-identical per seed") {
    const NoiseSpec spec(VectorXd::Zero(1),
                         0.012 * MatrixXd::Identity(1, 1));
    const NoiseRealization a =
        make_noise_realization(spec, 2, 42, 100, rng::kLoopNoise,
                               rng::kLoopInit);
    const NoiseRealization b =
        make_noise_realization(spec, 2, 42, 100, rng::kLoopNoise,
                               rng::kLoopInit);
    CHECK(a.e == b.e);
    CHECK(a.x0 == b.x0);

    const NoiseRealization c =
        make_noise_realization(spec, 2, 43, 100, rng::kLoopNoise,
                               rng::kLoopInit);
    CHECK(a.e != c.e);
}

TEST_CASE("simulate: offline SNR near 10 dB at the benchmark noise level") {
    const StateSpaceModel md = benchmark_model();
    const NoiseSpec noise(VectorXd::Zero(1),
                          0.012 * MatrixXd::Identity(1, 1));
    const int T = 200;
    const Trajectory noisy = excite_and_collect(md, noise, T, 3.0, 5);
    // Replay the same inputs and initial state through the noise-free
    // plant; by linearity the difference isolates the noise contribution.
    const NoiseRealization real = make_noise_realization(
        noise, 2, 5, T, rng::kOfflineNoise, rng::kOfflineInit);
    const Trajectory clean =
        simulate(md, real.x0, noisy.u, MatrixXd::Zero(T, 1));
    const VectorXd sig = clean.y.col(0);
    const VectorXd dif = noisy.y.col(0) - sig;
    const double snr_db =
        10.0 * std::log10(sig.squaredNorm() / dif.squaredNorm());
    CHECK(snr_db >= 7.0);
    CHECK(snr_db <= 13.0);
}

TEST_CASE("true_predictor: memoryless zero system maps windows to zero") {
    MatrixXd A = MatrixXd::Zero(2, 2), B = MatrixXd::Zero(2, 1);
    MatrixXd C = MatrixXd::Identity(2, 2), D = MatrixXd::Zero(2, 1);
    MatrixXd Ke = MatrixXd::Zero(2, 2);
    const StateSpaceModel md(A, B, C, D, Ke);
    const MatrixXd K = true_predictor(md, 2, 3);
    CHECK(K.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("true_predictor: pure feedthrough puts identity in the u_f block") {
    MatrixXd A = MatrixXd::Zero(1, 1), B = MatrixXd::Zero(1, 1);
    MatrixXd C = MatrixXd::Identity(1, 1), D = MatrixXd::Identity(1, 1);
    MatrixXd Ke = MatrixXd::Zero(1, 1);
    const StateSpaceModel md(A, B, C, D, Ke);
    const int Tp = 2, Tf = 2;
    const MatrixXd K = true_predictor(md, Tp, Tf);
    const MatrixXd uf_block = K.rightCols(Tf);
    CHECK((uf_block - MatrixXd::Identity(Tf, Tf)).cwiseAbs().maxCoeff() <=
          1e-10);
}

TEST_CASE("true_predictor: exact on noise-free benchmark windows") {
    const StateSpaceModel md = benchmark_model();
    const int Tp = 5, Tf = 10;
    const MatrixXd K = true_predictor(md, Tp, Tf);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int T = Tp + Tf;
        MatrixXd u(T, 1);
        for (int k = 0; k < T; ++k)
            u(k, 0) = rng::standard_normal(900 + trial, 7, k);
        VectorXd x0(2);
        x0 << rng::standard_normal(900 + trial, 8, 0),
            rng::standard_normal(900 + trial, 8, 1);
        const Trajectory tr = simulate(md, x0, u, MatrixXd::Zero(T, 1));
        VectorXd m_f(Tp + Tp + Tf);
        m_f << u.topRows(Tp), tr.y.topRows(Tp), u.bottomRows(Tf);
        const VectorXd y_f = K * m_f;
        worst = std::max(worst,
                         (y_f - VectorXd(tr.y.bottomRows(Tf)))
                             .cwiseAbs()
                             .maxCoeff());
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("true_predictor: exact for randomized stable models") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const StateSpaceModel md =
            testutil::random_stable_model(seed, 3, 1, 1);
        const int Tp = 4, Tf = 5;
        const MatrixXd K = true_predictor(md, Tp, Tf);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const int T = Tp + Tf;
            MatrixXd u(T, 1);
            for (int k = 0; k < T; ++k)
                u(k, 0) = rng::standard_normal(seed * 100 + trial, 9, k);
            VectorXd x0(3);
            for (int i = 0; i < 3; ++i)
                x0(i) = rng::standard_normal(seed * 100 + trial, 10, i);
            const Trajectory tr = simulate(md, x0, u, MatrixXd::Zero(T, 1));
            VectorXd m_f(Tp + Tp + Tf);
            m_f << u.topRows(Tp), tr.y.topRows(Tp), u.bottomRows(Tf);
            worst = std::max(worst, (K * m_f - VectorXd(tr.y.bottomRows(Tf)))
                                        .cwiseAbs()
                                        .maxCoeff());
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("true_predictor: Tp below the state dimension is rejected") {
    const StateSpaceModel md = benchmark_model();
    CHECK_THROWS_AS(true_predictor(md, 1, 5), std::invalid_argument);
}

TEST_CASE("model JSON round trip") {
    const std::string text = R"({
      "A": [[0.7326, -0.0861], [0.1722, 0.9909]],
      "B": [[0.0609], [0.0064]],
      "C": [[0.0, 1.4142]],
      "Ke": [[-0.5], [0.5]]
    })";
    const StateSpaceModel md = StateSpaceModel::from_json_text(text);
    CHECK(md.n == 2);
    CHECK(md.m == 1);
    CHECK(md.p == 1);
    CHECK(md.A(0, 1) == doctest::Approx(-0.0861));
    CHECK(md.D.cwiseAbs().maxCoeff() == 0.0);
}
