#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "mipt/mitigation.hpp"

using namespace mipt;

namespace {

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
    return 0.5 * tv;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

TEST_CASE("readout noise flips bits at the modeled rates") {
    Rng rng(3);
    const long long N = 200000;

    ReadoutNoiseModel m1 = ReadoutNoiseModel::uniform(1, 0.2, 0.0);
    auto noisy = apply_readout_noise({N, 0}, m1, rng);
    CHECK(noisy[0] + noisy[1] == N);
    double sigma = std::sqrt(0.2 * 0.8 / N);
    CHECK(std::abs(double(noisy[1]) / N - 0.2) < 4.0 * sigma);

    // independent per-qubit flips: all shots at |01> (qubit 0 = 1, qubit 1 = 0)
    ReadoutNoiseModel m2;
    m2.p01 = {0.05, 0.3};
    m2.p10 = {0.1, 0.2};
    auto out = apply_readout_noise({0, N, 0, 0}, m2, rng);
    for (int r = 0; r < 4; ++r) {
        double p0 = (r & 1) ? 1.0 - m2.p10[0] : m2.p10[0];  // true bit 0 is 1
        double p1 = (r & 2) ? m2.p01[1] : 1.0 - m2.p01[1];  // true bit 1 is 0
        double p = p0 * p1;
        double s = std::sqrt(p * (1 - p) / N);
        CHECK(std::abs(double(out[r]) / N - p) < 4.0 * s + 1e-9);
    }

    ReadoutNoiseModel noiseless = ReadoutNoiseModel::uniform(2, 0.0, 0.0);
    std::vector<long long> counts{5, 7, 11, 13};
    CHECK(apply_readout_noise(counts, noiseless, rng) == counts);

    ReadoutNoiseModel bad = ReadoutNoiseModel::uniform(1, 0.6, 0.0);
    CHECK_THROWS_AS(apply_readout_noise({1, 0}, bad, rng), std::invalid_argument);
    CHECK_THROWS_AS(apply_readout_noise({1, 0, 0}, noiseless, rng), std::invalid_argument);
}

TEST_CASE("calibration matrices") {
    Eigen::Matrix2d a = single_qubit_calibration(0.1, 0.2);
    CHECK(a(1, 0) == Catch::Approx(0.1));
    CHECK(a(0, 1) == Catch::Approx(0.2));
    CHECK(a.colwise().sum().isApproxToConstant(1.0, 1e-14));

    ReadoutNoiseModel model;
    model.p01 = {0.02, 0.1, 0.07};
    model.p10 = {0.05, 0.03, 0.12};
    Calibration complete = calibration_matrix(model, CalibrationMode::complete);
    Calibration tensored = calibration_matrix(model, CalibrationMode::tensored);
    Eigen::MatrixXd mc = complete.matrix();
    CHECK((mc - tensored.matrix()).cwiseAbs().maxCoeff() < 1e-14);

    // explicit Kronecker oracle with qubit 0 as the innermost factor
    Eigen::MatrixXd oracle = kron(kron(single_qubit_calibration(0.07, 0.12),
                                       single_qubit_calibration(0.1, 0.03)),
                                  single_qubit_calibration(0.02, 0.05));
    CHECK((mc - oracle).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(mc.colwise().sum().isApproxToConstant(1.0, 1e-12));

    // the calibration matrix maps the true distribution to the expected
    // reported distribution measured via Monte Carlo
    Rng rng(7);
    const long long N = 400000;
    std::vector<long long> counts{N / 2, N / 4, N / 8, N / 8, 0, 0, 0, 0};
    auto noisy = apply_readout_noise(counts, model, rng);
    Eigen::VectorXd truth(8);
    for (int i = 0; i < 8; ++i) truth[i] = double(counts[i]) / N;
    Eigen::VectorXd expected = mc * truth;
    for (int i = 0; i < 8; ++i) {
        double s = std::sqrt(expected[i] * (1 - expected[i]) / N);
        CHECK(std::abs(double(noisy[i]) / N - expected[i]) < 4.5 * s + 1e-9);
    }

    CHECK_THROWS_AS(
        calibration_matrix(ReadoutNoiseModel::uniform(6, 0.1, 0.1), CalibrationMode::complete),
        std::invalid_argument);
}

TEST_CASE("reduced calibration on a measured subset") {
    ReadoutNoiseModel model;
    model.p01 = {0.02, 0.1, 0.07};
    model.p10 = {0.05, 0.03, 0.12};
    Eigen::MatrixXd full = calibration_matrix(model, CalibrationMode::complete).matrix();

    // tensored noise: the reduction equals the Kronecker product over the
    // measured qubits alone
    Eigen::MatrixXd red02 = reduce_calibration(full, 3, {0, 2});
    Eigen::MatrixXd oracle02 = kron(single_qubit_calibration(0.07, 0.12),
                                    single_qubit_calibration(0.02, 0.05));
    CHECK((red02 - oracle02).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd red1 = reduce_calibration(full, 3, {1});
    CHECK((red1 - Eigen::MatrixXd(single_qubit_calibration(0.1, 0.03))).cwiseAbs().maxCoeff() <
          1e-12);

    // generic matrix: brute-force double sum oracle on n = 2, measured = {1}
    Rng rng(9);
    Eigen::MatrixXd m(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = rng.uniform();
    Eigen::MatrixXd red = reduce_calibration(m, 2, {1});
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            double acc = 0.0;
            for (int yr = 0; yr < 2; ++yr)
                for (int xr = 0; xr < 2; ++xr) acc += m(2 * y + yr, 2 * x + xr);
            CHECK(red(y, x) == Catch::Approx(acc / 2.0).margin(1e-12));
        }

    CHECK_THROWS_AS(reduce_calibration(full, 3, {}), std::invalid_argument);
    CHECK_THROWS_AS(reduce_calibration(full, 3, {3}), std::invalid_argument);
}

TEST_CASE("count mitigation inverts noiseless corruption exactly") {
    ReadoutNoiseModel model;
    model.p01 = {0.04, 0.09};
    model.p10 = {0.02, 0.11};
    Eigen::MatrixXd cal = calibration_matrix(model, CalibrationMode::complete).matrix();

    std::vector<double> truth{0.4, 0.3, 0.2, 0.1};
    const double total = 50000.0;
    Eigen::Vector4d t(truth.data());
    Eigen::Vector4d reported = cal * t;
    std::vector<double> raw(4);
    for (int i = 0; i < 4; ++i) raw[i] = reported[i] * total;
    auto fixed = mitigate_counts(raw, cal);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        CHECK(fixed[i] == Catch::Approx(truth[i] * total).margin(1e-6));
        sum += fixed[i];
    }
    CHECK(sum == Catch::Approx(total).margin(1e-8));

    // identity calibration is a no-op
    auto same = mitigate_counts(raw, Eigen::MatrixXd::Identity(4, 4));
    for (int i = 0; i < 4; ++i) CHECK(same[i] == Catch::Approx(raw[i]).margin(1e-9));

    CHECK_THROWS_AS(mitigate_counts(raw, Eigen::MatrixXd::Identity(3, 3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(mitigate_counts(std::vector<double>{0.0, 0.0, 0.0, 0.0}, cal),
                    std::invalid_argument);
}

TEST_CASE("count mitigation handles infeasible plain inversion") {
    // extreme counts push the unconstrained inverse negative
    Eigen::Matrix2d cal = single_qubit_calibration(0.3, 0.3);
    std::vector<double> raw{1000.0, 0.0};  // reported fraction below the noise floor
    auto fixed = mitigate_counts(raw, cal);
    double sum = 0.0;
    for (double v : fixed) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == Catch::Approx(1000.0).margin(1e-6));
    CHECK(fixed[0] == Catch::Approx(1000.0).margin(1e-3));  // best feasible point
}

TEST_CASE("finite-shot mitigation restores the true distribution") {
    Rng rng(13);
    ReadoutNoiseModel model = ReadoutNoiseModel::uniform(2, 0.08, 0.05);
    Eigen::MatrixXd cal = calibration_matrix(model, CalibrationMode::complete).matrix();
    const long long N = 1000000;
    std::vector<long long> truth{N / 2, N / 4, N / 8, N - N / 2 - N / 4 - N / 8};
    auto noisy = apply_readout_noise(truth, model, rng);

    std::vector<double> p_true(4), p_noisy(4), p_fixed(4);
    auto fixed = mitigate_counts(noisy, cal);
    for (int i = 0; i < 4; ++i) {
        p_true[i] = double(truth[i]) / N;
        p_noisy[i] = double(noisy[i]) / N;
        p_fixed[i] = fixed[i] / N;
    }
    CHECK(total_variation(p_noisy, p_true) > 0.03);  // noise is visible
    CHECK(total_variation(p_fixed, p_true) < 0.005);
}

TEST_CASE("gate counts of a brickwork circuit") {
    // L = 4, p = 1: layer A on (0,1),(2,3); layer B on (1,2); every qubit read
    CircuitSpec c = sample_circuit(4, 2, 1.0, 1.0, MeasureKind::projective, 5);
    GateCounts g = gate_counts(c);
    CHECK(g.n1q == std::vector<long long>{2, 4, 4, 2});
    CHECK(g.n2q == std::vector<long long>{2, 4, 4, 2});
    CHECK(g.nro == std::vector<long long>{2, 2, 2, 2});

    // weak measurements add one entangling coupling per readout
    CircuitSpec w = sample_circuit(4, 2, 1.0, 0.5, MeasureKind::weak, 5);
    GateCounts gw = gate_counts(w);
    CHECK(gw.n2q == std::vector<long long>{4, 6, 6, 4});
    CHECK(gw.nro == std::vector<long long>{2, 2, 2, 2});

    add_tomography_tail(g, {0, 1}, 9);
    CHECK(g.n1q == std::vector<long long>{11, 13, 4, 2});
    CHECK(g.nro == std::vector<long long>{11, 11, 2, 2});
}

TEST_CASE("estimated circuit error takes the per-qubit worst case") {
    GateCounts g = GateCounts::zeros(2);
    g.n1q = {4, 6};
    g.n2q = {2, 4};
    g.nro = {1, 2};
    // qubit 0: 4e-3 + 2e-2 + 5e-3 = 0.029; qubit 1: 6e-3 + 4e-2 + 1e-2 = 0.056
    CHECK(circuit_error(g, 1e-3, 1e-2, 5e-3) == Catch::Approx(0.056).margin(1e-12));
    CHECK(circuit_error(g, 0.0, 0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(circuit_error(g, -1e-3, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("residual entropy correction") {
    CHECK(residual_entropy_correct(1.0, 0.8, 0.5) == Catch::Approx(0.6));
    CHECK(residual_entropy_correct(0.1, 1.0, 0.5) == 0.0);  // floored at zero
    CHECK(residual_entropy_correct(0.7, 0.0, 2.0) == Catch::Approx(0.7));
    CHECK_THROWS_AS(residual_entropy_correct(1.0, -0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(residual_entropy_correct(1.0, 0.1, -0.5), std::invalid_argument);
}

TEST_CASE("device model text format") {
    std::istringstream in(
        "# four-qubit chain\n"
        "qubit 0 1e-4 2e-3 5e-3\n"
        "qubit 1 2e-4 3e-3 6e-3   # noisier\n"
        "qubit 2 1e-4 2e-3 5e-3\n"
        "qubit 3 3e-4 4e-3 9e-2\n"
        "edge 0 1\nedge 1 2\nedge 2 3\n");
    DeviceModel dev = DeviceModel::load(in);
    CHECK(dev.n_qubits == 4);
    CHECK(dev.eps2q[1] == Catch::Approx(3e-3));
    CHECK(dev.epsro[3] == Catch::Approx(9e-2));
    auto adj = dev.adjacency();
    CHECK(adj[1] == std::vector<int>{0, 2});
    CHECK(adj[3] == std::vector<int>{2});

    std::istringstream bad_tag("wire 0 1\n");
    CHECK_THROWS_AS(DeviceModel::load(bad_tag), ConfigError);
    std::istringstream bad_edge("qubit 0 1e-4 1e-3 1e-3\nedge 0 7\n");
    CHECK_THROWS_AS(DeviceModel::load(bad_edge), ConfigError);
    std::istringstream neg("qubit 0 -1e-4 1e-3 1e-3\n");
    CHECK_THROWS_AS(DeviceModel::load(neg), ConfigError);
    CHECK_THROWS_AS(DeviceModel::load_file("/nonexistent/device.txt"), ConfigError);
}

namespace {

DeviceModel chain_device(std::vector<double> epsro) {
    DeviceModel dev;
    dev.n_qubits = int(epsro.size());
    for (int q = 0; q + 1 < dev.n_qubits; ++q) dev.edges.emplace_back(q, q + 1);
    dev.eps1q.assign(dev.n_qubits, 1e-4);
    dev.eps2q.assign(dev.n_qubits, 1e-3);
    dev.epsro = std::move(epsro);
    return dev;
}

}  // namespace

TEST_CASE("qubit selection minimizes mean estimated error") {
    // qubit 3 has a much worse readout; a uniform-count circuit should pick a
    // chain avoiding it
    DeviceModel dev = chain_device({5e-3, 5e-3, 5e-3, 9e-2, 5e-3});
    GateCounts gc = GateCounts::zeros(2);
    gc.n1q = {4, 4};
    gc.n2q = {2, 2};
    gc.nro = {3, 3};
    std::vector<int> sel = select_qubits(dev, {gc}, 2, QubitLayout::chain);
    REQUIRE(sel.size() == 2);
    CHECK(sel == std::vector<int>{0, 1});  // cheapest, then lexicographic tie-break

    // brute-force oracle over all directed adjacent pairs
    double best = 1e18;
    for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}})
        for (auto [x, y] : {std::pair<int, int>{a, b}, std::pair<int, int>{b, a}}) {
            double cost = dev.eps1q[x] * 4 + dev.eps2q[x] * 2 + dev.epsro[x] * 3 +
                          dev.eps1q[y] * 4 + dev.eps2q[y] * 2 + dev.epsro[y] * 3;
            best = std::min(best, cost);
        }
    double sel_cost = dev.eps1q[sel[0]] * 4 + dev.eps2q[sel[0]] * 2 + dev.epsro[sel[0]] * 3 +
                      dev.eps1q[sel[1]] * 4 + dev.eps2q[sel[1]] * 2 + dev.epsro[sel[1]] * 3;
    CHECK(sel_cost == Catch::Approx(best));

    // asymmetric counts orient the chain: the heavy wire lands on the quiet end
    DeviceModel dev2 = chain_device({5e-3, 5e-2, 5e-3});
    GateCounts skew = GateCounts::zeros(2);
    skew.n1q = {10, 1};
    skew.n2q = {10, 1};
    skew.nro = {10, 1};
    std::vector<int> sel2 = select_qubits(dev2, {skew}, 2, QubitLayout::chain);
    CHECK((sel2 == std::vector<int>{0, 1} || sel2 == std::vector<int>{2, 1}));
    CHECK(sel2[0] != 1);
}

TEST_CASE("qubit selection with per-qubit ancillas") {
    // ladder: rail 0-2-4 with rungs to 1, 3, 5
    DeviceModel dev;
    dev.n_qubits = 6;
    dev.edges = {{0, 2}, {2, 4}, {0, 1}, {2, 3}, {4, 5}};
    dev.eps1q.assign(6, 1e-4);
    dev.eps2q.assign(6, 1e-3);
    dev.epsro.assign(6, 5e-3);

    GateCounts gc = GateCounts::zeros(4);  // 2 system wires + 2 ancilla wires
    gc.n1q = {4, 4, 0, 0};
    gc.n2q = {2, 2, 2, 2};
    gc.nro = {0, 0, 3, 3};
    std::vector<int> sel = select_qubits(dev, {gc}, 2, QubitLayout::chain_with_ancillas);
    REQUIRE(sel.size() == 4);
    auto adj = dev.adjacency();
    // system chain is adjacent; each ancilla is adjacent to its system qubit
    CHECK(std::binary_search(adj[sel[0]].begin(), adj[sel[0]].end(), sel[1]));
    CHECK(std::binary_search(adj[sel[0]].begin(), adj[sel[0]].end(), sel[2]));
    CHECK(std::binary_search(adj[sel[1]].begin(), adj[sel[1]].end(), sel[3]));
    std::set<int> distinct(sel.begin(), sel.end());
    CHECK(distinct.size() == 4);

    // a bare 3-chain cannot supply distinct ancillas for a full-length chain
    DeviceModel bare = chain_device({5e-3, 5e-3, 5e-3});
    GateCounts gc3 = GateCounts::zeros(6);
    CHECK_THROWS_AS(select_qubits(bare, {gc3}, 3, QubitLayout::chain_with_ancillas),
                    DiagnosticError);

    CHECK_THROWS_AS(select_qubits(dev, {}, 2, QubitLayout::chain), std::invalid_argument);
    CHECK_THROWS_AS(select_qubits(dev, {gc}, 7, QubitLayout::chain), std::invalid_argument);
}
