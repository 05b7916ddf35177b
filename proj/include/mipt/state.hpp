#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mipt/rng.hpp"

namespace mipt {

using cxd = std::complex<double>;
using Matrix2cd = Eigen::Matrix2cd;
using Matrix4cd = Eigen::Matrix4cd;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

constexpr double kNormTol = 1e-10;
constexpr double kUnitaryTol = 1e-8;
// Born branch probabilities below this are clamped to the other branch,
// avoiding renormalization by ~0.
constexpr double kBranchClamp = 1e-14;

namespace gates {

inline Matrix2cd identity2() { return Matrix2cd::Identity(); }

inline Matrix2cd pauli_x() {
    Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix2cd pauli_y() {
    Matrix2cd m;
    m << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0);
    return m;
}

inline Matrix2cd pauli_z() {
    Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

inline Matrix2cd hadamard() {
    Matrix2cd m;
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

// Two-qubit gate convention: the 4-dim basis index is b_low + 2*b_high where
// b_low is the bit of the first qubit argument of apply_2q and b_high the
// second. kron2(hi, lo) composes per-qubit gates in that convention.
inline Matrix4cd kron2(const Matrix2cd& hi, const Matrix2cd& lo) {
    Matrix4cd m;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            m.block<2, 2>(2 * a, 2 * b) = hi(a, b) * lo;
    return m;
}

// CX with the low (first-argument) qubit as control.
inline Matrix4cd cx_low_control() {
    Matrix4cd m = Matrix4cd::Zero();
    m(0, 0) = 1;  // |00> -> |00>
    m(3, 1) = 1;  // |01> (low set) -> |11>
    m(2, 2) = 1;  // |10> -> |10>
    m(1, 3) = 1;  // |11> -> |01>
    return m;
}

// CX with the high (second-argument) qubit as control.
inline Matrix4cd cx_high_control() {
    Matrix4cd m = Matrix4cd::Zero();
    m(0, 0) = 1;
    m(1, 1) = 1;
    m(3, 2) = 1;  // |10> (high set) -> |11>
    m(2, 3) = 1;
    return m;
}

// Ancilla coupling for a null-type weak measurement of strength eta,
// sin^2(g) = eta. Acts on (ancilla = low qubit, system = high qubit):
// trivial on the system-|0> sector, rotates the ancilla by g on system-|1>.
inline Matrix4cd weak_coupling(double eta) {
    double s = std::sqrt(eta);
    double c = std::sqrt(1.0 - eta);
    Matrix4cd m = Matrix4cd::Identity();
    m(2, 2) = c;
    m(2, 3) = -s;
    m(3, 2) = s;
    m(3, 3) = c;
    return m;
}

template <typename M>
bool is_unitary(const M& u, double tol = kUnitaryTol) {
    return (u.adjoint() * u - M::Identity()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace gates

// Kraus pair {M+, M-} of a null-type weak measurement:
// M+ = diag(1, sqrt(1-eta)), M- = diag(0, sqrt(eta)).
struct KrausPair {
    double eta;
    Matrix2cd m_plus;
    Matrix2cd m_minus;

    static KrausPair weak(double eta) {
        if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must be in [0,1]");
        KrausPair k;
        k.eta = eta;
        k.m_plus = Matrix2cd::Zero();
        k.m_plus(0, 0) = 1.0;
        k.m_plus(1, 1) = std::sqrt(1.0 - eta);
        k.m_minus = Matrix2cd::Zero();
        k.m_minus(1, 1) = std::sqrt(eta);
        return k;
    }

    // max-norm deviation of M+†M+ + M-†M- from identity
    double completeness_defect() const {
        Matrix2cd s = m_plus.adjoint() * m_plus + m_minus.adjoint() * m_minus;
        return (s - Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    }
};

// Reduced or reconstructed density matrix on a small register.
struct DensityMatrix {
    int n_qubits = 0;
    MatrixXcd mat;

    int dim() const { return 1 << n_qubits; }

    double hermiticity_defect() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }
    double trace_defect() const { return std::abs(mat.trace() - cxd(1.0, 0.0)); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (mat + mat.adjoint()),
                                                    Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    bool valid(double herm_tol = 1e-10, double trace_tol = 1e-10, double psd_tol = 1e-8) const {
        return hermiticity_defect() <= herm_tol && trace_defect() <= trace_tol &&
               min_eigenvalue() >= -psd_tol;
    }

    double purity() const { return (mat * mat).trace().real(); }
};

// Dense n-qubit pure state. Qubit 0 is the least-significant bit of the
// basis-state index.
class StateVector {
public:
    explicit StateVector(int n_qubits) : n_(n_qubits), amps_(std::size_t(1) << n_qubits, cxd(0)) {
        if (n_qubits < 1 || n_qubits > 30) throw std::invalid_argument("bad qubit count");
        amps_[0] = 1.0;
    }

    static StateVector basis_state(int n_qubits, std::uint64_t index) {
        StateVector s(n_qubits);
        if (index >= s.amps_.size()) throw std::invalid_argument("basis index out of range");
        s.amps_[0] = 0.0;
        s.amps_[index] = 1.0;
        return s;
    }

    int n_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<cxd>& amplitudes() const { return amps_; }
    std::vector<cxd>& amplitudes() { return amps_; }
    cxd amp(std::size_t i) const { return amps_[i]; }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

    VectorXcd to_vector() const {
        VectorXcd v(amps_.size());
        for (std::size_t i = 0; i < amps_.size(); ++i) v[i] = amps_[i];
        return v;
    }

    void apply_1q(const Matrix2cd& u, int q) {
        check_qubit(q);
        if (!gates::is_unitary(u)) throw std::invalid_argument("apply_1q: matrix not unitary");
        const std::uint64_t bit = std::uint64_t(1) << q;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (i & bit) continue;
            cxd a0 = amps_[i];
            cxd a1 = amps_[i | bit];
            amps_[i] = u(0, 0) * a0 + u(0, 1) * a1;
            amps_[i | bit] = u(1, 0) * a0 + u(1, 1) * a1;
        }
    }

    // q_low supplies the least-significant bit of the 4-dim gate index,
    // q_high the most-significant. See gates::kron2.
    void apply_2q(const Matrix4cd& u, int q_low, int q_high) {
        check_qubit(q_low);
        check_qubit(q_high);
        if (q_low == q_high) throw std::invalid_argument("apply_2q: equal qubit indices");
        if (!gates::is_unitary(u)) throw std::invalid_argument("apply_2q: matrix not unitary");
        const std::uint64_t bl = std::uint64_t(1) << q_low;
        const std::uint64_t bh = std::uint64_t(1) << q_high;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (i & (bl | bh)) continue;
            std::uint64_t idx[4] = {i, i | bl, i | bh, i | bl | bh};
            cxd in[4];
            for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
            for (int r = 0; r < 4; ++r) {
                cxd acc(0);
                for (int c = 0; c < 4; ++c) acc += u(r, c) * in[c];
                amps_[idx[r]] = acc;
            }
        }
    }

    // Probability that qubit q reads 1.
    double prob_one(int q) const {
        check_qubit(q);
        const std::uint64_t bit = std::uint64_t(1) << q;
        double p = 0.0;
        for (std::uint64_t i = 0; i < amps_.size(); ++i)
            if (i & bit) p += std::norm(amps_[i]);
        return p;
    }

    // Projective Z measurement with Born sampling; collapses and renormalizes.
    int measure_z(int q, Rng& rng) {
        double p1 = prob_one(q);
        int outcome;
        if (p1 < kBranchClamp)
            outcome = 0;
        else if (1.0 - p1 < kBranchClamp)
            outcome = 1;
        else
            outcome = rng.bernoulli(p1) ? 1 : 0;
        project(q, outcome);
        return outcome;
    }

    // Collapse qubit q to `outcome` and renormalize.
    void project(int q, int outcome) {
        check_qubit(q);
        const std::uint64_t bit = std::uint64_t(1) << q;
        double kept = 0.0;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            bool one = (i & bit) != 0;
            if (one != (outcome == 1))
                amps_[i] = 0.0;
            else
                kept += std::norm(amps_[i]);
        }
        if (kept <= 0.0) throw std::runtime_error("project: zero-probability branch");
        renormalize(kept);
    }

    // Generalized measurement with a 2x2 Kraus pair. Returns +1 for the "+"
    // branch, -1 for the "-" branch.
    int apply_weak_kraus(const KrausPair& kraus, int q, Rng& rng) {
        check_qubit(q);
        if (kraus.completeness_defect() > 1e-12)
            throw std::invalid_argument("kraus pair violates completeness");
        double p_minus = branch_prob(kraus.m_minus, q);
        int outcome;
        if (p_minus < kBranchClamp)
            outcome = +1;
        else if (1.0 - p_minus < kBranchClamp)
            outcome = -1;
        else
            outcome = rng.bernoulli(p_minus) ? -1 : +1;
        apply_kraus_branch(outcome > 0 ? kraus.m_plus : kraus.m_minus, q);
        return outcome;
    }

    // Weak measurement through an explicit ancilla: couple with V(eta),
    // projectively measure the ancilla, then reset it to |0> by a conditional
    // flip. The ancilla must start in |0>. Marginal statistics on the system
    // match apply_weak_kraus.
    int apply_weak_ancilla(double eta, int q_sys, int q_anc, Rng& rng) {
        check_qubit(q_sys);
        check_qubit(q_anc);
        if (q_sys == q_anc) throw std::invalid_argument("ancilla equals system qubit");
        if (prob_one(q_anc) > 1e-10) throw std::invalid_argument("ancilla not in |0>");
        apply_2q(gates::weak_coupling(eta), q_anc, q_sys);
        int bit = measure_z(q_anc, rng);
        if (bit == 1) apply_1q(gates::pauli_x(), q_anc);  // conditional reset
        return bit == 1 ? -1 : +1;
    }

    // Measure q in the computational basis and flip to |0> if the outcome is 1.
    void reset_qubit(int q, Rng& rng) {
        int bit = measure_z(q, rng);
        if (bit == 1) apply_1q(gates::pauli_x(), q);
    }

    // Reduced density matrix on the given (distinct, in-range) qubits. The
    // subsystem's own index ordering follows the list order: subsystem[0] is
    // the least-significant bit of the reduced index.
    DensityMatrix reduced_density_matrix(const std::vector<int>& subsystem) const {
        if (subsystem.empty()) throw std::invalid_argument("empty subsystem");
        for (int q : subsystem) check_qubit(q);
        for (std::size_t i = 0; i < subsystem.size(); ++i)
            for (std::size_t j = i + 1; j < subsystem.size(); ++j)
                if (subsystem[i] == subsystem[j])
                    throw std::invalid_argument("duplicate subsystem qubit");

        const int k = int(subsystem.size());
        const int env_n = n_ - k;
        const std::size_t dk = std::size_t(1) << k;
        const std::size_t de = std::size_t(1) << env_n;

        std::vector<int> env;
        {
            std::vector<bool> in_sub(n_, false);
            for (int q : subsystem) in_sub[q] = true;
            for (int q = 0; q < n_; ++q)
                if (!in_sub[q]) env.push_back(q);
        }

        // Regroup amplitudes as a (sub x env) matrix, then rho = M M^dagger.
        MatrixXcd m = MatrixXcd::Zero(dk, de);
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            std::size_t si = 0, ei = 0;
            for (int b = 0; b < k; ++b)
                if (i & (std::uint64_t(1) << subsystem[b])) si |= std::size_t(1) << b;
            for (int b = 0; b < env_n; ++b)
                if (i & (std::uint64_t(1) << env[b])) ei |= std::size_t(1) << b;
            m(si, ei) = amps_[i];
        }
        DensityMatrix rho;
        rho.n_qubits = k;
        rho.mat = m * m.adjoint();
        return rho;
    }

private:
    void check_qubit(int q) const {
        if (q < 0 || q >= n_) throw std::invalid_argument("qubit index out of range");
    }

    void renormalize(double norm_sq_val) {
        double inv = 1.0 / std::sqrt(norm_sq_val);
        for (auto& a : amps_) a *= inv;
    }

    double branch_prob(const Matrix2cd& m, int q) const {
        const std::uint64_t bit = std::uint64_t(1) << q;
        double p = 0.0;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (i & bit) continue;
            cxd a0 = amps_[i];
            cxd a1 = amps_[i | bit];
            p += std::norm(m(0, 0) * a0 + m(0, 1) * a1);
            p += std::norm(m(1, 0) * a0 + m(1, 1) * a1);
        }
        return p;
    }

    void apply_kraus_branch(const Matrix2cd& m, int q) {
        const std::uint64_t bit = std::uint64_t(1) << q;
        double norm = 0.0;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (i & bit) continue;
            cxd a0 = amps_[i];
            cxd a1 = amps_[i | bit];
            amps_[i] = m(0, 0) * a0 + m(0, 1) * a1;
            amps_[i | bit] = m(1, 0) * a0 + m(1, 1) * a1;
            norm += std::norm(amps_[i]) + std::norm(amps_[i | bit]);
        }
        if (norm <= 0.0) throw std::runtime_error("kraus branch has zero norm");
        renormalize(norm);
    }

    int n_;
    std::vector<cxd> amps_;
};

}  // namespace mipt
