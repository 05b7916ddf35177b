#pragma once

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "mipt/circuit.hpp"
#include "mipt/entropy.hpp"
#include "mipt/errors.hpp"
#include "mipt/parallel.hpp"

namespace mipt {

struct EnsembleParams {
    int L = 4;
    int T = 1;
    double p = 0.0;
    double eta = 1.0;
    MeasureKind kind = MeasureKind::projective;
};

// Seed streams: trajectory i of an ensemble uses stream 2i for circuit
// sampling and stream 2i+1 for measurement outcomes, both derived from the
// master seed. Results are therefore independent of the worker count.
inline std::vector<double> trajectory_entropies(const EnsembleParams& params,
                                                const std::vector<int>& subsystem, double alpha,
                                                int n_samples, std::uint64_t master_seed) {
    std::vector<double> out(n_samples);
    parallel_for(std::size_t(n_samples), [&](std::size_t i) {
        CircuitSpec circuit = sample_circuit(params.L, params.T, params.p, params.eta, params.kind,
                                             derive_seed(master_seed, 2 * i));
        TrajectoryRecord rec = run_trajectory(circuit, derive_seed(master_seed, 2 * i + 1));
        out[i] = renyi_entropy(rec.final_state.reduced_density_matrix(subsystem), alpha);
    });
    return out;
}

inline EntropyEstimate ensemble_entropy(const EnsembleParams& params, SubsystemRule rule,
                                        double alpha, int n_samples, std::uint64_t seed,
                                        double ci_level = 0.90, int n_resamples = 1000) {
    if (n_samples < 2) throw std::invalid_argument("ensemble_entropy: need >= 2 samples");
    auto sub = subsystem_for(params.L, rule);
    auto vals = trajectory_entropies(params, sub, alpha, n_samples, seed);
    return summarize_entropies(vals, alpha, ci_level, n_resamples, derive_seed(seed, 0x600d));
}

namespace detail {

struct DepthStats {
    std::vector<double> mean;
    std::vector<double> sem;  // standard error of the ensemble mean per step
};

}  // namespace detail

// Ensemble half-chain S_alpha statistics after each of the first `max_t`
// steps.
inline detail::DepthStats entropy_vs_depth_stats(int L, double p, double eta, MeasureKind kind,
                                                 double alpha, int ensemble_size, int max_t,
                                                 std::uint64_t seed) {
    auto sub = subsystem_for(L, SubsystemRule::half);
    std::vector<std::vector<double>> curves(ensemble_size);
    parallel_for(std::size_t(ensemble_size), [&](std::size_t i) {
        CircuitSpec circuit =
            sample_circuit(L, max_t, p, eta, kind, derive_seed(seed, 2 * i));
        Rng rng(derive_seed(seed, 2 * i + 1));
        StateVector state(L);
        KrausPair kraus = KrausPair::weak(eta);
        std::vector<double> curve(max_t);
        for (int t = 0; t < max_t; ++t) {
            const CircuitStep& step = circuit.steps[t];
            for (const auto& g : step.layer_a) state.apply_2q(g.matrix(), g.q_low, g.q_high);
            for (const auto& g : step.layer_b) state.apply_2q(g.matrix(), g.q_low, g.q_high);
            for (int q : step.measured) {
                if (kind == MeasureKind::projective)
                    state.measure_z(q, rng);
                else
                    state.apply_weak_kraus(kraus, q, rng);
            }
            curve[t] = renyi_entropy(state.reduced_density_matrix(sub), alpha);
        }
        curves[i] = std::move(curve);
    });
    detail::DepthStats stats;
    stats.mean.assign(max_t, 0.0);
    stats.sem.assign(max_t, 0.0);
    for (const auto& c : curves)
        for (int t = 0; t < max_t; ++t) stats.mean[t] += c[t];
    for (double& m : stats.mean) m /= double(ensemble_size);
    if (ensemble_size > 1) {
        for (const auto& c : curves)
            for (int t = 0; t < max_t; ++t) {
                double d = c[t] - stats.mean[t];
                stats.sem[t] += d * d;
            }
        for (double& s : stats.sem)
            s = std::sqrt(s / double(ensemble_size - 1) / double(ensemble_size));
    }
    return stats;
}

// Ensemble-mean half-chain S_alpha after each of the first `max_t` steps.
inline std::vector<double> entropy_vs_depth(int L, double p, double eta, MeasureKind kind,
                                            double alpha, int ensemble_size, int max_t,
                                            std::uint64_t seed) {
    return entropy_vs_depth_stats(L, p, eta, kind, alpha, ensemble_size, max_t, seed).mean;
}

// Smallest depth T whose ensemble-mean half-chain S_alpha reaches 95% of the
// plateau proxy at 4L steps. Throws DiagnosticError if the mean is still
// growing past the proxy between 4L and 8L steps, beyond what ensemble
// fluctuations explain.
inline int saturation_depth(int L, double p, double eta, MeasureKind kind, double alpha,
                            int ensemble_size, std::uint64_t seed) {
    if (ensemble_size < 50) throw std::invalid_argument("saturation_depth: ensemble_size >= 50");
    const int t_ref = 4 * L;
    const int t_max = 8 * L;
    auto stats = entropy_vs_depth_stats(L, p, eta, kind, alpha, ensemble_size, t_max, seed);
    const auto& mean = stats.mean;
    double plateau = mean[t_ref - 1];
    const double tol = 1e-9;  // absolute floor for numerically-zero entropies
    for (int t = t_ref; t < t_max; ++t) {
        double slack = 3.0 * (stats.sem[t] + stats.sem[t_ref - 1]);
        if (0.95 * mean[t] > plateau + slack + tol)
            throw DiagnosticError("saturation_depth: entropy still growing past 4L steps");
    }
    for (int t = 1; t <= t_ref; ++t) {
        if (mean[t - 1] >= 0.95 * plateau - tol) return t;
    }
    throw DiagnosticError("saturation_depth: no depth reached 95% of the plateau");
}

// Process-wide cache of saturation depths keyed on circuit parameters.
class SaturationCache {
public:
    int depth(int L, double p, double eta, MeasureKind kind, double alpha, int ensemble_size,
              std::uint64_t seed) {
        Key key{L, p, eta, kind == MeasureKind::weak, alpha};
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        int t = saturation_depth(L, p, eta, kind, alpha, ensemble_size, seed);
        std::lock_guard<std::mutex> lock(mu_);
        cache_.emplace(key, t);
        return t;
    }

private:
    using Key = std::tuple<int, double, double, bool, double>;
    std::map<Key, int> cache_;
    std::mutex mu_;
};

}  // namespace mipt
