#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mipt/rng.hpp"
#include "mipt/state.hpp"

namespace mipt {

enum class MeasureKind { projective, weak };
enum class CxDirection { low_controls_high, high_controls_low };

// One brickwork gate: Haar single-qubit rotations on both wires followed by a
// randomly-directed CX.
struct TwoQubitGateSpec {
    int q_low = 0;   // lower chain index of the pair
    int q_high = 0;  // q_low + 1
    Matrix2cd u_low;
    Matrix2cd u_high;
    CxDirection cx_direction = CxDirection::low_controls_high;

    Matrix4cd matrix() const {
        Matrix4cd cx = cx_direction == CxDirection::low_controls_high
                           ? gates::cx_low_control()
                           : gates::cx_high_control();
        return cx * gates::kron2(u_high, u_low);
    }
};

struct CircuitStep {
    std::vector<TwoQubitGateSpec> layer_a;  // pairs (0,1),(2,3),...
    std::vector<TwoQubitGateSpec> layer_b;  // pairs (1,2),(3,4),...
    std::vector<int> measured;              // ascending qubit indices
};

// Sampled hybrid circuit for one trajectory family: brickwork entangling
// layers on an open chain interleaved with per-qubit measurements at rate p.
struct CircuitSpec {
    int L = 0;
    int T = 0;
    double p = 0.0;
    double eta = 1.0;
    MeasureKind kind = MeasureKind::projective;
    std::uint64_t seed = 0;
    std::vector<CircuitStep> steps;

    std::size_t total_measurements() const {
        std::size_t n = 0;
        for (const auto& s : steps) n += s.measured.size();
        return n;
    }
};

struct MeasurementEvent {
    int step;
    int qubit;
    int outcome;  // 0/1 projective, +1/-1 weak
};

struct TrajectoryRecord {
    StateVector final_state{1};
    std::vector<MeasurementEvent> outcomes;
    const CircuitSpec* circuit = nullptr;
};

// Haar-uniform 2x2 unitary. With u ~ U[0,1) and three uniform phases,
// U = e^{ia} [[e^{ib} cos t, e^{ic} sin t], [-e^{-ic} sin t, e^{-ib} cos t]]
// with cos^2 t = 1 - u gives the Haar measure on U(2); |U00|^2 is uniform.
inline Matrix2cd sample_haar_1q(Rng& rng) {
    double a = rng.uniform(0.0, 2.0 * M_PI);
    double b = rng.uniform(0.0, 2.0 * M_PI);
    double c = rng.uniform(0.0, 2.0 * M_PI);
    double t = std::asin(std::sqrt(rng.uniform()));
    cxd ea = std::polar(1.0, a), eb = std::polar(1.0, b), ec = std::polar(1.0, c);
    double ct = std::cos(t), st = std::sin(t);
    Matrix2cd u;
    u << ea * eb * ct, ea * ec * st, -ea * std::conj(ec) * st, ea * std::conj(eb) * ct;
    return u;
}

inline CircuitSpec sample_circuit(int L, int T, double p, double eta, MeasureKind kind,
                                  std::uint64_t seed) {
    if (L < 2) throw std::invalid_argument("sample_circuit: L must be >= 2");
    if (T < 1) throw std::invalid_argument("sample_circuit: T must be >= 1");
    if (p < 0.0 || p > 1.0 || eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("sample_circuit: p, eta must be in [0,1]");

    CircuitSpec spec;
    spec.L = L;
    spec.T = T;
    spec.p = p;
    spec.eta = eta;
    spec.kind = kind;
    spec.seed = seed;
    spec.steps.resize(T);

    // Sampling is strictly step-by-step so circuits with the same seed share
    // identical prefixes across different T.
    Rng rng(seed);
    auto sample_gate = [&](int q_low) {
        TwoQubitGateSpec g;
        g.q_low = q_low;
        g.q_high = q_low + 1;
        g.u_low = sample_haar_1q(rng);
        g.u_high = sample_haar_1q(rng);
        g.cx_direction =
            rng.bernoulli(0.5) ? CxDirection::low_controls_high : CxDirection::high_controls_low;
        return g;
    };

    for (int t = 0; t < T; ++t) {
        CircuitStep& step = spec.steps[t];
        for (int q = 0; q + 1 < L; q += 2) step.layer_a.push_back(sample_gate(q));
        for (int q = 1; q + 1 < L; q += 2) step.layer_b.push_back(sample_gate(q));
        for (int q = 0; q < L; ++q)
            if (rng.bernoulli(p)) step.measured.push_back(q);
    }
    return spec;
}

// Execute one trajectory from |0...0>. Weak measurements use the Kraus path;
// the ancilla construction is validated separately against it.
inline TrajectoryRecord run_trajectory(const CircuitSpec& circuit, std::uint64_t seed) {
    Rng rng(seed);
    TrajectoryRecord rec;
    rec.circuit = &circuit;
    rec.final_state = StateVector(circuit.L);
    KrausPair kraus = KrausPair::weak(circuit.eta);

    for (int t = 0; t < circuit.T; ++t) {
        const CircuitStep& step = circuit.steps[t];
        for (const auto& g : step.layer_a)
            rec.final_state.apply_2q(g.matrix(), g.q_low, g.q_high);
        for (const auto& g : step.layer_b)
            rec.final_state.apply_2q(g.matrix(), g.q_low, g.q_high);
        for (int q : step.measured) {
            int outcome = circuit.kind == MeasureKind::projective
                              ? rec.final_state.measure_z(q, rng)
                              : rec.final_state.apply_weak_kraus(kraus, q, rng);
            rec.outcomes.push_back({t, q, outcome});
        }
    }
    return rec;
}

}  // namespace mipt
