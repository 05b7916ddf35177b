#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mipt/rng.hpp"
#include "mipt/state.hpp"

namespace mipt {

// Eigenvalues below this are treated as numerical zeros inside logarithms.
constexpr double kEigCutoff = 1e-12;

struct EntropyEstimate {
    double alpha = 1.0;
    double mean = 0.0;      // bits
    double variance = 0.0;  // bits^2, unbiased sample variance
    double ci_low = 0.0;
    double ci_high = 0.0;
    double ci_level = 0.90;
    int n_samples = 0;
};

// Renyi entropy S_alpha(rho) in bits. alpha = 1 is the von Neumann limit,
// alpha = 0 counts the rank above the eigenvalue cutoff.
inline double renyi_entropy(const DensityMatrix& rho, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("renyi_entropy: alpha must be >= 0");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (rho.mat + rho.mat.adjoint()),
                                                Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();

    if (alpha == 0.0) {
        int rank = 0;
        for (int i = 0; i < ev.size(); ++i)
            if (ev[i] > kEigCutoff) ++rank;
        return std::log2(double(std::max(rank, 1)));
    }
    if (std::abs(alpha - 1.0) < 1e-12) {
        double s = 0.0;
        for (int i = 0; i < ev.size(); ++i)
            if (ev[i] > kEigCutoff) s -= ev[i] * std::log2(ev[i]);
        return std::max(s, 0.0);
    }
    double tr = 0.0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] > kEigCutoff) tr += std::pow(ev[i], alpha);
    return std::max(std::log2(tr) / (1.0 - alpha), 0.0);
}

inline double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / double(xs.size() - 1);
}

// Percentile bootstrap over the mean.
inline std::pair<double, double> bootstrap_ci(const std::vector<double>& samples, double level,
                                              int n_resamples, std::uint64_t seed) {
    if (samples.size() < 2) throw std::invalid_argument("bootstrap_ci: need >= 2 samples");
    if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("bootstrap_ci: bad level");
    Rng rng(seed);
    std::vector<double> means(n_resamples);
    const std::size_t n = samples.size();
    for (int r = 0; r < n_resamples; ++r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += samples[rng.uniform_int(n)];
        means[r] = acc / double(n);
    }
    std::sort(means.begin(), means.end());
    auto pct = [&](double q) {
        double pos = q * double(n_resamples - 1);
        std::size_t lo = std::size_t(pos);
        std::size_t hi = std::min(lo + 1, std::size_t(n_resamples - 1));
        double frac = pos - double(lo);
        return means[lo] * (1.0 - frac) + means[hi] * frac;
    };
    double tail = (1.0 - level) / 2.0;
    return {pct(tail), pct(1.0 - tail)};
}

enum class SubsystemRule { half, quarter_floor, quarter_ceil };

// Contiguous subsystem anchored at qubit 0. half -> floor(L/2) qubits,
// quarter_floor/ceil -> floor/ceil(L/4).
inline std::vector<int> subsystem_for(int L, SubsystemRule rule) {
    if (L < 2) throw std::invalid_argument("subsystem_for: L must be >= 2");
    int size = 0;
    switch (rule) {
        case SubsystemRule::half: size = L / 2; break;
        case SubsystemRule::quarter_floor: size = L / 4; break;
        case SubsystemRule::quarter_ceil: size = (L + 3) / 4; break;
    }
    if (size == 0) throw std::invalid_argument("subsystem_for: empty subsystem");
    std::vector<int> qs(size);
    std::iota(qs.begin(), qs.end(), 0);
    return qs;
}

// Linear interpolation between the floor- and ceil-quarter entropies, weighted
// by the fractional part of L/4. Returns s_floor exactly when L/4 is integral.
inline double interpolate_quarter(double s_floor, double s_ceil, int L) {
    double frac = L / 4.0 - double(L / 4);
    return (1.0 - frac) * s_floor + frac * s_ceil;
}

inline EntropyEstimate summarize_entropies(const std::vector<double>& per_traj, double alpha,
                                           double ci_level, int n_resamples, std::uint64_t seed) {
    EntropyEstimate est;
    est.alpha = alpha;
    est.n_samples = int(per_traj.size());
    est.mean = mean_of(per_traj);
    est.variance = sample_variance(per_traj);
    est.ci_level = ci_level;
    auto [lo, hi] = bootstrap_ci(per_traj, ci_level, n_resamples, seed);
    est.ci_low = lo;
    est.ci_high = hi;
    return est;
}

}  // namespace mipt
