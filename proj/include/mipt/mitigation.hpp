#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mipt/circuit.hpp"
#include "mipt/errors.hpp"
#include "mipt/rng.hpp"

namespace mipt {

// Per-qubit measurement bit-flip rates: p01 = P(report 1 | true 0),
// p10 = P(report 0 | true 1). Rates must stay below 0.5 so the calibration
// matrix remains invertible.
struct ReadoutNoiseModel {
    std::vector<double> p01;
    std::vector<double> p10;

    int n_qubits() const { return int(p01.size()); }

    static ReadoutNoiseModel uniform(int n, double p01v, double p10v) {
        ReadoutNoiseModel m;
        m.p01.assign(n, p01v);
        m.p10.assign(n, p10v);
        return m;
    }

    void validate() const {
        if (p01.size() != p10.size()) throw std::invalid_argument("readout model size mismatch");
        for (std::size_t q = 0; q < p01.size(); ++q)
            if (p01[q] < 0 || p01[q] >= 0.5 || p10[q] < 0 || p10[q] >= 0.5)
                throw std::invalid_argument("readout flip rates must be in [0, 0.5)");
    }
};

// Corrupt measurement counts by flipping each reported bit independently.
// Bit q of the outcome index corresponds to model qubit q.
inline std::vector<long long> apply_readout_noise(const std::vector<long long>& counts,
                                                  const ReadoutNoiseModel& model, Rng& rng) {
    model.validate();
    const int n = model.n_qubits();
    if (counts.size() != (std::size_t(1) << n))
        throw std::invalid_argument("apply_readout_noise: counts size mismatch");
    std::vector<long long> out(counts.size(), 0);
    for (std::size_t true_out = 0; true_out < counts.size(); ++true_out) {
        for (long long s = 0; s < counts[true_out]; ++s) {
            std::size_t reported = true_out;
            for (int q = 0; q < n; ++q) {
                bool one = (true_out >> q) & 1;
                double flip = one ? model.p10[q] : model.p01[q];
                if (flip > 0.0 && rng.bernoulli(flip)) reported ^= std::size_t(1) << q;
            }
            ++out[reported];
        }
    }
    return out;
}

inline Eigen::Matrix2d single_qubit_calibration(double p01, double p10) {
    Eigen::Matrix2d m;
    m << 1.0 - p01, p10, p01, 1.0 - p10;
    return m;
}

enum class CalibrationMode { complete, tensored };

// Column-stochastic readout calibration: column = true outcome, row =
// reported outcome. Complete mode stores the full 2^n x 2^n matrix (n <= 5);
// tensored mode keeps per-qubit factors (sub-register size 1).
struct Calibration {
    CalibrationMode mode = CalibrationMode::complete;
    int n = 0;
    Eigen::MatrixXd full;                  // complete mode
    std::vector<Eigen::Matrix2d> factors;  // tensored mode

    Eigen::MatrixXd matrix() const {
        if (mode == CalibrationMode::complete) return full;
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(1, 1);
        // bit q of the outcome index belongs to qubit q, so factors[0] is the
        // innermost Kronecker factor
        for (int q = 0; q < n; ++q) {
            Eigen::MatrixXd next(m.rows() * 2, m.cols() * 2);
            const Eigen::Matrix2d& f = factors[q];
            next.block(0, 0, m.rows(), m.cols()) = f(0, 0) * m;
            next.block(0, m.cols(), m.rows(), m.cols()) = f(0, 1) * m;
            next.block(m.rows(), 0, m.rows(), m.cols()) = f(1, 0) * m;
            next.block(m.rows(), m.cols(), m.rows(), m.cols()) = f(1, 1) * m;
            m = std::move(next);
        }
        return m;
    }
};

inline Calibration calibration_matrix(const ReadoutNoiseModel& model, CalibrationMode mode) {
    model.validate();
    const int n = model.n_qubits();
    if (mode == CalibrationMode::complete && n > 5)
        throw std::invalid_argument("complete calibration supported for n <= 5 only");
    Calibration cal;
    cal.mode = mode;
    cal.n = n;
    cal.factors.reserve(n);
    for (int q = 0; q < n; ++q)
        cal.factors.push_back(single_qubit_calibration(model.p01[q], model.p10[q]));
    if (mode == CalibrationMode::complete) {
        Calibration tens = cal;
        tens.mode = CalibrationMode::tensored;
        cal.full = tens.matrix();
        cal.factors.clear();
    }
    return cal;
}

// Reduced calibration on a measured subset: sum over reported outcomes and
// average over true outcomes of the unmeasured qubits.
inline Eigen::MatrixXd reduce_calibration(const Eigen::MatrixXd& matrix, int n,
                                          const std::vector<int>& measured) {
    if (measured.empty()) throw std::invalid_argument("reduce_calibration: empty subset");
    if (matrix.rows() != (1 << n)) throw std::invalid_argument("reduce_calibration: bad matrix");
    std::vector<int> rest;
    {
        std::vector<bool> in(n, false);
        for (int q : measured) {
            if (q < 0 || q >= n) throw std::invalid_argument("reduce_calibration: bad qubit");
            in[q] = true;
        }
        for (int q = 0; q < n; ++q)
            if (!in[q]) rest.push_back(q);
    }
    const int k = int(measured.size());
    const int dk = 1 << k;
    const int dr = 1 << int(rest.size());
    auto expand = [&](int sub, int other) {
        std::size_t full = 0;
        for (int b = 0; b < k; ++b)
            if (sub & (1 << b)) full |= std::size_t(1) << measured[b];
        for (std::size_t b = 0; b < rest.size(); ++b)
            if (other & (1 << b)) full |= std::size_t(1) << rest[b];
        return full;
    };
    Eigen::MatrixXd red = Eigen::MatrixXd::Zero(dk, dk);
    for (int xs = 0; xs < dk; ++xs)
        for (int ys = 0; ys < dk; ++ys) {
            double acc = 0.0;
            for (int xr = 0; xr < dr; ++xr)
                for (int yr = 0; yr < dr; ++yr) acc += matrix(expand(ys, yr), expand(xs, xr));
            red(ys, xs) = acc / double(dr);
        }
    return red;
}

// Least-squares inversion of readout errors, constrained to non-negative
// quasi-counts summing to the raw total. If the plain inverse is already
// feasible it is returned directly; otherwise projected gradient descent on
// the scaled simplex is used.
inline std::vector<double> mitigate_counts(const std::vector<double>& raw,
                                           const Eigen::MatrixXd& calibration) {
    const int d = int(raw.size());
    if (calibration.rows() != d || calibration.cols() != d)
        throw std::invalid_argument("mitigate_counts: dimension mismatch");
    double total = 0.0;
    for (double c : raw) total += c;
    if (!(total > 0.0)) throw std::invalid_argument("mitigate_counts: empty counts");

    Eigen::VectorXd c(d);
    for (int i = 0; i < d; ++i) c[i] = raw[i] / total;

    Eigen::VectorXd x = calibration.fullPivLu().solve(c);
    bool feasible = true;
    for (int i = 0; i < d; ++i)
        if (x[i] < -1e-12) feasible = false;

    if (!feasible) {
        auto project = [&](Eigen::VectorXd v) {
            std::vector<double> u(v.data(), v.data() + d);
            std::sort(u.begin(), u.end(), std::greater<double>());
            double cum = 0.0, tau = 0.0;
            for (int j = 0; j < d; ++j) {
                cum += u[j];
                double t = (cum - 1.0) / double(j + 1);
                if (u[j] - t > 0) tau = t;
            }
            for (int i = 0; i < d; ++i) v[i] = std::max(v[i] - tau, 0.0);
            return v;
        };
        Eigen::MatrixXd mtm = calibration.transpose() * calibration;
        double lip = mtm.operatorNorm();
        double step = 1.0 / std::max(lip, 1e-12);
        x = project(x);
        Eigen::VectorXd grad(d);
        for (int it = 0; it < 20000; ++it) {
            grad = calibration.transpose() * (calibration * x - c);
            Eigen::VectorXd next = project(x - step * grad);
            if ((next - x).lpNorm<Eigen::Infinity>() < 1e-14) {
                x = next;
                break;
            }
            x = next;
        }
    } else {
        for (int i = 0; i < d; ++i) x[i] = std::max(x[i], 0.0);
        x /= x.sum();
    }

    std::vector<double> out(d);
    for (int i = 0; i < d; ++i) out[i] = x[i] * total;
    return out;
}

inline std::vector<double> mitigate_counts(const std::vector<long long>& raw,
                                           const Eigen::MatrixXd& calibration) {
    return mitigate_counts(std::vector<double>(raw.begin(), raw.end()), calibration);
}

// Per-qubit gate totals of a circuit, tomography tail included.
struct GateCounts {
    std::vector<long long> n1q;
    std::vector<long long> n2q;
    std::vector<long long> nro;

    int size() const { return int(n1q.size()); }

    static GateCounts zeros(int n) {
        GateCounts g;
        g.n1q.assign(n, 0);
        g.n2q.assign(n, 0);
        g.nro.assign(n, 0);
        return g;
    }
};

// Tally gate counts of a sampled circuit. Each brickwork gate contributes one
// 1q rotation per wire and one CX on both wires. A projective measurement is
// one readout; a weak measurement is one CX (the single-CX ancilla coupling)
// plus one readout, attributed to the system qubit.
inline GateCounts gate_counts(const CircuitSpec& circuit) {
    GateCounts g = GateCounts::zeros(circuit.L);
    for (const auto& step : circuit.steps) {
        for (const auto* layer : {&step.layer_a, &step.layer_b}) {
            for (const auto& gate : *layer) {
                ++g.n1q[gate.q_low];
                ++g.n1q[gate.q_high];
                ++g.n2q[gate.q_low];
                ++g.n2q[gate.q_high];
            }
        }
        for (int q : step.measured) {
            if (circuit.kind == MeasureKind::weak) ++g.n2q[q];
            ++g.nro[q];
        }
    }
    return g;
}

// Tomography tail: one basis rotation and one readout per subsystem qubit,
// per setting.
inline void add_tomography_tail(GateCounts& g, const std::vector<int>& subsystem,
                                int n_settings) {
    for (int q : subsystem) {
        g.n1q[q] += n_settings;
        g.nro[q] += n_settings;
    }
}

// E[C] = max_j (eps1q N1q_j + eps2q N2q_j + epsro Nro_j).
inline double circuit_error(const GateCounts& counts, double eps1q, double eps2q, double epsro) {
    if (eps1q < 0 || eps2q < 0 || epsro < 0)
        throw std::invalid_argument("circuit_error: negative rate");
    double worst = 0.0;
    for (int j = 0; j < counts.size(); ++j) {
        double e = eps1q * double(counts.n1q[j]) + eps2q * double(counts.n2q[j]) +
                   epsro * double(counts.nro[j]);
        worst = std::max(worst, e);
    }
    return worst;
}

// Residual entropy correction: subtract the p = eta = 1 reference scaled by
// the mean circuit-error ratio, floored at zero.
inline double residual_entropy_correct(double s_alpha, double s_ref, double mean_error_ratio) {
    if (s_ref < 0.0) throw std::invalid_argument("residual_entropy_correct: negative reference");
    if (mean_error_ratio < 0.0)
        throw std::invalid_argument("residual_entropy_correct: negative ratio");
    return std::max(s_alpha - mean_error_ratio * s_ref, 0.0);
}

// Synthetic device: connectivity graph plus per-qubit error rates.
struct DeviceModel {
    int n_qubits = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> eps1q, eps2q, epsro;

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(n_qubits);
        for (auto [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        for (auto& v : adj) std::sort(v.begin(), v.end());
        return adj;
    }

    // File schema, one record per line ('#' starts a comment):
    //   qubit <id> <eps1q> <eps2q> <epsro>
    //   edge <a> <b>
    static DeviceModel load(std::istream& in) {
        DeviceModel dev;
        std::string line;
        std::vector<std::tuple<int, double, double, double>> qubits;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag)) continue;
            if (tag == "qubit") {
                int id;
                double e1, e2, er;
                if (!(ls >> id >> e1 >> e2 >> er)) throw ConfigError("bad qubit record");
                if (e1 < 0 || e2 < 0 || er < 0) throw ConfigError("negative error rate");
                qubits.emplace_back(id, e1, e2, er);
            } else if (tag == "edge") {
                int a, b;
                if (!(ls >> a >> b)) throw ConfigError("bad edge record");
                dev.edges.emplace_back(a, b);
            } else {
                throw ConfigError("unknown device record: " + tag);
            }
        }
        for (const auto& [id, e1, e2, er] : qubits) dev.n_qubits = std::max(dev.n_qubits, id + 1);
        dev.eps1q.assign(dev.n_qubits, 0.0);
        dev.eps2q.assign(dev.n_qubits, 0.0);
        dev.epsro.assign(dev.n_qubits, 0.0);
        for (const auto& [id, e1, e2, er] : qubits) {
            dev.eps1q[id] = e1;
            dev.eps2q[id] = e2;
            dev.epsro[id] = er;
        }
        for (auto [a, b] : dev.edges)
            if (a < 0 || b < 0 || a >= dev.n_qubits || b >= dev.n_qubits)
                throw ConfigError("edge references unknown qubit");
        return dev;
    }

    static DeviceModel load_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open device file: " + path);
        return load(f);
    }
};

enum class QubitLayout { chain, chain_with_ancillas };

namespace detail {

// mean over circuits of sum_j eps_j * N_j, positions mapped onto `layout`
inline double layout_cost(const DeviceModel& dev, const std::vector<GateCounts>& circuits,
                          const std::vector<int>& layout) {
    double acc = 0.0;
    for (const auto& gc : circuits) {
        if (gc.size() != int(layout.size()))
            throw std::invalid_argument("select_qubits: gate counts do not match layout size");
        double e = 0.0;
        for (std::size_t j = 0; j < layout.size(); ++j) {
            int q = layout[j];
            e += dev.eps1q[q] * double(gc.n1q[j]) + dev.eps2q[q] * double(gc.n2q[j]) +
                 dev.epsro[q] * double(gc.nro[j]);
        }
        acc += e;
    }
    return acc / double(circuits.size());
}

inline void enumerate_paths(const std::vector<std::vector<int>>& adj, int L,
                            std::vector<int>& path, std::vector<bool>& used,
                            const std::function<void(const std::vector<int>&)>& emit) {
    if (int(path.size()) == L) {
        emit(path);
        return;
    }
    if (path.empty()) {
        for (int q = 0; q < int(adj.size()); ++q) {
            path.push_back(q);
            used[q] = true;
            enumerate_paths(adj, L, path, used, emit);
            used[q] = false;
            path.pop_back();
        }
        return;
    }
    for (int next : adj[path.back()]) {
        if (used[next]) continue;
        path.push_back(next);
        used[next] = true;
        enumerate_paths(adj, L, path, used, emit);
        used[next] = false;
        path.pop_back();
    }
}

// assign a distinct adjacent ancilla to every system qubit of the path
inline void enumerate_ancillas(const std::vector<std::vector<int>>& adj,
                               const std::vector<int>& path, std::size_t pos,
                               std::vector<int>& anc, std::vector<bool>& used,
                               const std::function<void(const std::vector<int>&)>& emit) {
    if (pos == path.size()) {
        emit(anc);
        return;
    }
    for (int cand : adj[path[pos]]) {
        if (used[cand]) continue;
        anc.push_back(cand);
        used[cand] = true;
        enumerate_ancillas(adj, path, pos + 1, anc, used, emit);
        used[cand] = false;
        anc.pop_back();
    }
}

}  // namespace detail

// Exhaustive search over connected chains (plus per-qubit ancilla attachments
// in the weak layout) minimizing the mean estimated circuit error. Returns
// the chain qubits in order, followed by the ancilla of each system qubit for
// chain_with_ancillas. Ties break toward the smallest qubit-index sequence.
inline std::vector<int> select_qubits(const DeviceModel& dev,
                                      const std::vector<GateCounts>& circuits, int L_needed,
                                      QubitLayout layout) {
    if (circuits.empty()) throw std::invalid_argument("select_qubits: no circuits");
    if (L_needed < 1 || L_needed > dev.n_qubits)
        throw std::invalid_argument("select_qubits: bad L");
    auto adj = dev.adjacency();

    std::vector<int> best;
    double best_cost = 0.0;
    auto consider = [&](const std::vector<int>& full) {
        double cost = detail::layout_cost(dev, circuits, full);
        if (best.empty() || cost < best_cost - 1e-15 ||
            (cost < best_cost + 1e-15 && full < best)) {
            best = full;
            best_cost = cost;
        }
    };

    std::vector<int> path;
    std::vector<bool> used(dev.n_qubits, false);
    detail::enumerate_paths(adj, L_needed, path, used, [&](const std::vector<int>& chain) {
        if (layout == QubitLayout::chain) {
            consider(chain);
            return;
        }
        std::vector<int> anc;
        std::vector<bool> taken(dev.n_qubits, false);
        for (int q : chain) taken[q] = true;
        detail::enumerate_ancillas(adj, chain, 0, anc, taken,
                                   [&](const std::vector<int>& ancillas) {
                                       std::vector<int> full = chain;
                                       full.insert(full.end(), ancillas.begin(), ancillas.end());
                                       consider(full);
                                   });
    });
    if (best.empty()) throw DiagnosticError("select_qubits: no feasible layout");
    return best;
}

}  // namespace mipt
