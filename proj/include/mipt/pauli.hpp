#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mipt/state.hpp"

namespace mipt {

// n-qubit Pauli string in symplectic form: bit q of x/z set means the letter
// on qubit q has an X/Z component (X = x, Z = z, Y = both). letters()[q] is
// the letter on qubit q.
struct PauliString {
    int n = 0;
    std::uint32_t x = 0;
    std::uint32_t z = 0;

    bool is_identity() const { return x == 0 && z == 0; }

    char letter(int q) const {
        bool bx = (x >> q) & 1, bz = (z >> q) & 1;
        if (bx && bz) return 'Y';
        if (bx) return 'X';
        if (bz) return 'Z';
        return 'I';
    }

    std::string word() const {
        std::string w(n, 'I');
        for (int q = 0; q < n; ++q) w[q] = letter(q);
        return w;
    }

    static PauliString from_word(const std::string& w) {
        PauliString p;
        p.n = int(w.size());
        for (int q = 0; q < p.n; ++q) {
            switch (w[q]) {
                case 'I': break;
                case 'X': p.x |= 1u << q; break;
                case 'Y': p.x |= 1u << q; p.z |= 1u << q; break;
                case 'Z': p.z |= 1u << q; break;
                default: throw std::invalid_argument("bad Pauli letter");
            }
        }
        return p;
    }

    // Base-4 code ordering the strings the same way as lexicographic order of
    // their words (I < X < Y < Z, qubit 0 most significant).
    std::uint64_t code() const {
        std::uint64_t c = 0;
        for (int q = 0; q < n; ++q) {
            int l = ((x >> q) & 1) | (((z >> q) & 1) << 1);
            static constexpr int rank[4] = {0, 1, 3, 2};  // I, X, Z-bit, Y
            c = c * 4 + rank[l];
        }
        return c;
    }

    bool operator==(const PauliString& o) const { return n == o.n && x == o.x && z == o.z; }
    bool operator<(const PauliString& o) const { return code() < o.code(); }

    // Product up to phase (symplectic addition).
    PauliString times(const PauliString& o) const {
        PauliString p;
        p.n = n;
        p.x = x ^ o.x;
        p.z = z ^ o.z;
        return p;
    }

    int weight() const {
        int w = 0;
        for (int q = 0; q < n; ++q)
            if (letter(q) != 'I') ++w;
        return w;
    }

    MatrixXcd matrix() const {
        MatrixXcd m = MatrixXcd::Identity(1, 1);
        // qubit 0 is the least-significant bit of the basis index, so it is
        // the innermost factor of the Kronecker product
        for (int q = 0; q < n; ++q) {
            Matrix2cd f;
            switch (letter(q)) {
                case 'I': f = gates::identity2(); break;
                case 'X': f = gates::pauli_x(); break;
                case 'Y': f = gates::pauli_y(); break;
                case 'Z': f = gates::pauli_z(); break;
            }
            MatrixXcd next(m.rows() * 2, m.cols() * 2);
            next.block(0, 0, m.rows(), m.cols()) = f(0, 0) * m;
            next.block(0, m.cols(), m.rows(), m.cols()) = f(0, 1) * m;
            next.block(m.rows(), 0, m.rows(), m.cols()) = f(1, 0) * m;
            next.block(m.rows(), m.cols(), m.rows(), m.cols()) = f(1, 1) * m;
            m = std::move(next);
        }
        return m;
    }
};

inline bool commutes(const PauliString& a, const PauliString& b) {
    auto parity = [](std::uint32_t v) {
        return __builtin_popcount(v) & 1;
    };
    return (parity(a.x & b.z) ^ parity(a.z & b.x)) == 0;
}

// All 4^n - 1 non-trivial strings, in word order.
inline std::vector<PauliString> all_nontrivial_paulis(int n) {
    std::vector<PauliString> out;
    out.reserve((std::size_t(1) << (2 * n)) - 1);
    for (std::uint32_t mask = 1; mask < (1u << (2 * n)); ++mask) {
        PauliString p;
        p.n = n;
        for (int q = 0; q < n; ++q) {
            int l = (mask >> (2 * q)) & 3;
            if (l & 1) p.x |= 1u << q;
            if (l & 2) p.z |= 1u << q;
        }
        out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace mipt
