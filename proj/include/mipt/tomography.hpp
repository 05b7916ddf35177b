#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mipt/entropy.hpp"
#include "mipt/mub.hpp"
#include "mipt/pauli.hpp"
#include "mipt/rng.hpp"
#include "mipt/state.hpp"

namespace mipt {

struct Eigenbasis {
    MatrixXcd basis;          // columns are the joint eigenvectors
    Eigen::MatrixXd eigtable;  // (dim x n_strings), entries +1/-1
};

// Joint eigenbasis of a set of pairwise-commuting Pauli strings, found by
// diagonalizing the strings in order and splitting degenerate eigenspaces
// with the next string. Output ordering and phases are deterministic: within
// each split the +1 block comes first, and each vector's largest component is
// made real positive.
inline Eigenbasis mub_eigenbasis(const std::vector<PauliString>& group) {
    if (group.empty()) throw std::invalid_argument("mub_eigenbasis: empty group");
    for (std::size_t i = 0; i < group.size(); ++i)
        for (std::size_t j = i + 1; j < group.size(); ++j)
            if (!commutes(group[i], group[j]))
                throw std::invalid_argument("mub_eigenbasis: strings do not commute");

    const int n = group.front().n;
    const int d = 1 << n;

    std::vector<MatrixXcd> blocks{MatrixXcd::Identity(d, d)};
    for (const auto& p : group) {
        MatrixXcd op = p.matrix();
        std::vector<MatrixXcd> next;
        for (const auto& b : blocks) {
            if (b.cols() == 1) {
                next.push_back(b);
                continue;
            }
            MatrixXcd s = b.adjoint() * op * b;
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (s + s.adjoint()));
            MatrixXcd vecs = b * es.eigenvectors();
            // eigenvalues are +-1; split ascending output into -1 then +1,
            // emit the +1 block first
            int n_minus = 0;
            for (int i = 0; i < es.eigenvalues().size(); ++i)
                if (es.eigenvalues()[i] < 0) ++n_minus;
            if (n_minus < vecs.cols()) next.push_back(vecs.rightCols(vecs.cols() - n_minus));
            if (n_minus > 0) next.push_back(vecs.leftCols(n_minus));
        }
        blocks = std::move(next);
        bool all_one = true;
        for (const auto& b : blocks) all_one &= b.cols() == 1;
        if (all_one) break;
    }

    Eigenbasis out;
    out.basis = MatrixXcd(d, d);
    int col = 0;
    for (const auto& b : blocks)
        for (int c = 0; c < b.cols(); ++c) out.basis.col(col++) = b.col(c);
    if (col != d) throw std::runtime_error("mub_eigenbasis: basis incomplete");

    for (int c = 0; c < d; ++c) {
        int imax = 0;
        double best = 0.0;
        for (int r = 0; r < d; ++r) {
            double a = std::abs(out.basis(r, c));
            if (a > best + 1e-12) {
                best = a;
                imax = r;
            }
        }
        cxd ph = out.basis(imax, c) / std::abs(out.basis(imax, c));
        out.basis.col(c) *= std::conj(ph);
    }

    out.eigtable.resize(d, group.size());
    for (std::size_t s = 0; s < group.size(); ++s) {
        MatrixXcd op = group[s].matrix();
        for (int c = 0; c < d; ++c) {
            double e = (out.basis.col(c).adjoint() * op * out.basis.col(c))(0, 0).real();
            if (std::abs(std::abs(e) - 1.0) > 1e-8)
                throw std::runtime_error("mub_eigenbasis: vector is not a joint eigenvector");
            out.eigtable(c, s) = e > 0 ? 1.0 : -1.0;
        }
    }
    return out;
}

// Multinomial shot sampling from |<b_k|psi>|^2 marginals of the reduced state.
inline std::vector<long long> simulate_shots(const StateVector& state,
                                             const std::vector<int>& subsystem,
                                             const MatrixXcd& basis, long long shots, Rng& rng) {
    if (shots < 1) throw std::invalid_argument("simulate_shots: shots must be >= 1");
    DensityMatrix rho = state.reduced_density_matrix(subsystem);
    const int d = int(basis.cols());
    std::vector<double> probs(d);
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
        double p = (basis.col(k).adjoint() * rho.mat * basis.col(k))(0, 0).real();
        probs[k] = std::max(p, 0.0);
        total += probs[k];
    }
    for (double& p : probs) p /= total;

    std::vector<long long> counts(d, 0);
    long long remaining = shots;
    double mass = 1.0;
    for (int k = 0; k < d && remaining > 0; ++k) {
        if (k == d - 1 || mass <= 0.0) {
            counts[k] += remaining;
            remaining = 0;
            break;
        }
        double q = std::min(1.0, std::max(0.0, probs[k] / mass));
        long long c = std::binomial_distribution<long long>(remaining, q)(rng.engine());
        counts[k] = c;
        remaining -= c;
        mass -= probs[k];
    }
    if (remaining > 0) counts[d - 1] += remaining;
    return counts;
}

// <sigma> = sum_k table[k, sigma] counts[k] / total for each string of the
// setting; counts may be quasi-counts after mitigation.
inline std::vector<double> expectations_from_counts(const std::vector<double>& counts,
                                                    const Eigen::MatrixXd& eigtable) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (!(total > 0.0)) throw std::invalid_argument("expectations_from_counts: empty counts");
    std::vector<double> out(eigtable.cols(), 0.0);
    for (int s = 0; s < eigtable.cols(); ++s) {
        double acc = 0.0;
        for (int k = 0; k < eigtable.rows(); ++k) acc += eigtable(k, s) * counts[k];
        out[s] = std::clamp(acc / total, -1.0, 1.0);
    }
    return out;
}

inline std::vector<double> expectations_from_counts(const std::vector<long long>& counts,
                                                    const Eigen::MatrixXd& eigtable) {
    std::vector<double> c(counts.begin(), counts.end());
    return expectations_from_counts(c, eigtable);
}

// Exact Euclidean projection of the eigenvalue vector onto the probability
// simplex; together with the eigenvectors of the least-squares estimate this
// is the closest PSD unit-trace matrix in Frobenius norm.
inline std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    int rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        double t = (cum - 1.0) / double(j + 1);
        if (u[j] - t > 0) {
            rho = int(j + 1);
            tau = t;
        }
    }
    for (double& x : v) x = std::max(x - tau, 0.0);
    (void)rho;
    return v;
}

// Constrained least-squares reconstruction from a complete map of Pauli
// expectations. The Pauli basis is orthogonal, so the unconstrained solution
// of A vec(rho) = P is rho = 2^-n sum <sigma> sigma; PSD and unit trace are
// then enforced by eigenvalue projection onto the simplex.
inline DensityMatrix reconstruct(int n, const std::map<PauliString, double>& expectations) {
    const int d = 1 << n;
    PauliString identity;
    identity.n = n;
    auto it = expectations.find(identity);
    if (it == expectations.end() || std::abs(it->second - 1.0) > 1e-6)
        throw std::invalid_argument("reconstruct: identity expectation must be 1");
    std::size_t expected = std::size_t(1) << (2 * n);
    if (expectations.size() != expected)
        throw std::invalid_argument("reconstruct: expectation map incomplete");

    MatrixXcd rho = MatrixXcd::Zero(d, d);
    for (const auto& [p, val] : expectations) rho += val * p.matrix();
    rho /= double(d);
    rho = 0.5 * (rho + rho.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + d);
    std::vector<double> clipped = project_simplex(ev);
    MatrixXcd out = MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        out += clipped[i] * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();

    DensityMatrix dm;
    dm.n_qubits = n;
    dm.mat = out;
    return dm;
}

// All 3^n separable measurement settings {X,Y,Z}^n of standard separable QST.
inline std::vector<std::string> ssqst_settings(int n) {
    if (n < 1 || n > 3) throw std::invalid_argument("ssqst_settings: n must be in [1,3]");
    std::vector<std::string> out{""};
    for (int q = 0; q < n; ++q) {
        std::vector<std::string> next;
        for (const auto& w : out)
            for (char l : {'X', 'Y', 'Z'}) next.push_back(w + l);
        out = std::move(next);
    }
    return out;
}

// One measurement setting: the commuting strings it covers, their joint
// eigenbasis, and the per-outcome eigenvalue table.
struct TomoSetting {
    std::vector<PauliString> strings;
    Eigenbasis eig;
};

struct TomographySetup {
    int n = 0;
    bool mub = false;  // MUBQST (n > 2) vs SSQST (n <= 2)
    std::vector<TomoSetting> settings;
};

// Policy switch: SSQST for n <= 2, MUBQST for n > 2.
inline TomographySetup make_tomography_setup(int n) {
    TomographySetup setup;
    setup.n = n;
    setup.mub = n > 2;
    if (setup.mub) {
        MubPartition part = enumerate_mubs(n);
        for (const auto& g : part.groups) {
            TomoSetting s;
            s.strings = g;
            s.eig = mub_eigenbasis(g);
            setup.settings.push_back(std::move(s));
        }
    } else {
        for (const auto& word : ssqst_settings(n)) {
            // a separable setting covers every string obtained by replacing a
            // subset of its letters with I
            TomoSetting s;
            PauliString full = PauliString::from_word(word);
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                PauliString p;
                p.n = n;
                for (int q = 0; q < n; ++q) {
                    if (!(mask & (1u << q))) continue;
                    p.x |= full.x & (1u << q);
                    p.z |= full.z & (1u << q);
                }
                s.strings.push_back(p);
            }
            std::sort(s.strings.begin(), s.strings.end());
            s.eig = mub_eigenbasis(s.strings);
            setup.settings.push_back(std::move(s));
        }
    }
    return setup;
}

// Optional hook applied to each setting's raw counts before expectation
// extraction (readout-noise injection and/or mitigation).
using CountsTransform =
    std::function<std::vector<double>(const std::vector<long long>&, std::size_t setting)>;

// Full simulated-QST estimate of the reduced state on `subsystem`.
// SSQST settings are overcomplete; expectation estimates for a string are
// averaged over every setting that covers it, which is the least-squares
// solution of the stacked system.
inline DensityMatrix tomographic_density_matrix(const StateVector& state,
                                                const std::vector<int>& subsystem,
                                                const TomographySetup& setup, long long shots,
                                                Rng& rng,
                                                const CountsTransform& transform = nullptr) {
    std::map<PauliString, double> sums;
    std::map<PauliString, int> hits;
    for (std::size_t i = 0; i < setup.settings.size(); ++i) {
        const TomoSetting& s = setup.settings[i];
        std::vector<long long> counts =
            simulate_shots(state, subsystem, s.eig.basis, shots, rng);
        std::vector<double> vals;
        if (transform) {
            vals = expectations_from_counts(transform(counts, i), s.eig.eigtable);
        } else {
            vals = expectations_from_counts(counts, s.eig.eigtable);
        }
        for (std::size_t k = 0; k < s.strings.size(); ++k) {
            sums[s.strings[k]] += vals[k];
            hits[s.strings[k]] += 1;
        }
    }

    std::map<PauliString, double> expectations;
    PauliString identity;
    identity.n = setup.n;
    expectations[identity] = 1.0;
    for (const auto& p : all_nontrivial_paulis(setup.n)) {
        auto it = sums.find(p);
        if (it == sums.end())
            throw std::runtime_error("tomography: string not covered by any setting");
        expectations[p] = it->second / double(hits[p]);
    }
    return reconstruct(setup.n, expectations);
}

}  // namespace mipt
