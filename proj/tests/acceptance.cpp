// End-to-end acceptance checks for the simulator and analysis toolkit.
// Each numbered check prints a single PASS/FAIL line; the process exits
// non-zero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <vector>

#include "mipt/sweep.hpp"

using namespace mipt;

namespace {

struct LinFit {
    double slope, intercept, r2;
};

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ym = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double pred = f.slope * x[i] + f.intercept;
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - ym) * (y[i] - ym);
    }
    f.r2 = 1.0 - ss_res / ss_tot;
    return f;
}

StateVector random_state(int n, Rng& rng) {
    StateVector s(n);
    double norm = 0.0;
    for (auto& a : s.amplitudes()) {
        a = cxd(rng.normal(), rng.normal());
        norm += std::norm(a);
    }
    for (auto& a : s.amplitudes()) a /= std::sqrt(norm);
    return s;
}

MatrixXcd sqrtm(const MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    MatrixXcd ra = sqrtm(a.mat);
    double t = sqrtm(ra * b.mat * ra).trace().real();
    return t * t;
}

ExperimentConfig base_cfg() {
    ExperimentConfig cfg;
    cfg.seed = 20260823;
    return cfg;
}

// ---- criterion 1: entropy crossover and variance peak, L = 5 p-sweep

bool crossover_curve() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = base_cfg();
    cfg.mode = SweepMode::p_sweep;
    cfg.L_values = {5};
    for (int i = 0; i <= 20; ++i) cfg.p_values.push_back(0.05 * i);
    cfg.alpha = 1.0;
    cfg.trajectories = 500;
    SweepResult res = run_sweep(cfg);

    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < res.records.size(); ++i) {
        const auto& a = res.records[i].estimate;
        const auto& b = res.records[i + 1].estimate;
        bool drop = b.mean < a.mean;
        bool ci_overlap = b.ci_high >= a.ci_low && a.ci_high >= b.ci_low;
        if (!drop && !ci_overlap) {
            decreasing = false;
            std::printf("    non-monotone without CI overlap at p=%.2f -> %.2f\n",
                        res.records[i].p, res.records[i + 1].p);
        }
    }

    double peak_p = 0.0, peak_var = -1.0;
    for (const auto& r : res.records)
        if (r.estimate.variance > peak_var) {
            peak_var = r.estimate.variance;
            peak_p = r.p;
        }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("    var(S1) peak at p = %.2f; wall time %.0f s\n", peak_p, secs);
    return decreasing && peak_p >= 0.15 && peak_p <= 0.35 && secs < 600.0;
}

// ---- criterion 2: volume-law vs area-law scaling of <S2>

bool volume_area_scaling() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = base_cfg();
    cfg.mode = SweepMode::L_scaling;
    cfg.L_values = {6, 8, 10, 12, 14};
    cfg.p_values = {0.1, 0.8};
    cfg.alpha = 2.0;
    cfg.subsystem_rule = SubsystemRule::quarter_floor;
    cfg.quarter_interpolate = true;
    cfg.trajectories = 300;
    SweepResult res = run_sweep(cfg);

    std::vector<double> xs, volume;
    double s10 = 0.0, s14 = 0.0;
    for (const auto& r : res.records) {
        if (r.p == 0.1) {
            xs.push_back(r.L);
            volume.push_back(r.estimate.mean);
        } else {
            if (r.L == 10) s10 = r.estimate.mean;
            if (r.L == 14) s14 = r.estimate.mean;
        }
    }
    LinFit fit = linear_fit(xs, volume);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf(
        "    p=0.1 slope %.3f bits/qubit (R^2 %.3f); p=0.8 S(14)-S(10) = %.3f; wall time %.0f s\n",
        fit.slope, fit.r2, s14 - s10, secs);
    return fit.slope > 0.1 && fit.r2 > 0.9 && (s14 - s10) < 0.2 && secs < 3600.0;
}

// ---- criterion 3: weak-measurement crossover in eta

bool weak_crossover() {
    ExperimentConfig cfg = base_cfg();
    cfg.mode = SweepMode::eta_sweep;
    cfg.L_values = {3};
    cfg.p_values = {0.75, 1.0};
    for (int i = 0; i <= 10; ++i) cfg.eta_values.push_back(0.1 * i);
    cfg.alpha = 1.0;
    cfg.kind = MeasureKind::weak;
    cfg.trajectories = 800;
    SweepResult res = run_sweep(cfg);

    bool ok = true;
    double peak_eta[2] = {0.0, 0.0};
    for (int ci = 0; ci < 2; ++ci) {
        double p = cfg.p_values[ci];
        std::vector<const SweepRecord*> curve;
        for (const auto& r : res.records)
            if (r.p == p) curve.push_back(&r);
        double best_var = -1.0;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            if (i + 1 < curve.size()) {
                const auto& a = curve[i]->estimate;
                const auto& b = curve[i + 1]->estimate;
                bool drop = b.mean < a.mean;
                bool ci_overlap = b.ci_high >= a.ci_low && a.ci_high >= b.ci_low;
                if (!drop && !ci_overlap) ok = false;
            }
            if (curve[i]->estimate.variance > best_var) {
                best_var = curve[i]->estimate.variance;
                peak_eta[ci] = curve[i]->eta;
            }
        }
    }
    std::printf("    var peaks: eta = %.2f (p=0.75), eta = %.2f (p=1)\n", peak_eta[0],
                peak_eta[1]);
    bool interior = peak_eta[0] > 0.0 && peak_eta[0] < 1.0 && peak_eta[1] > 0.0 &&
                    peak_eta[1] < 1.0;
    return ok && interior && peak_eta[0] > peak_eta[1];
}

// ---- criterion 4: critical exponents from the simulated collapse

bool simulated_criticality() {
    ExperimentConfig cfg = base_cfg();
    cfg.mode = SweepMode::collapse;
    cfg.L_values = {5, 6, 7, 8};
    for (int i = 1; i <= 19; ++i) cfg.p_values.push_back(0.025 * i);
    cfg.alpha = 1.0;
    cfg.trajectories = 1000;
    SweepResult res = run_sweep(cfg);

    CollapseDataset ds = dataset_from_result(res, 0.25);
    CollapseOptions opt;
    opt.smooth = true;  // smoothed interpolant, as in the figure protocol
    CollapseFit fit = fit_exponents(ds, opt);
    double ref = collapse_loss(ds, 1.0, 1.0, opt.smooth);
    std::printf("    gamma = %.3f, nu = %.3f, loss %.4g vs %.4g at (1,1)\n", fit.gamma0, fit.nu0,
                fit.loss_at_min, ref);
    return fit.nu0 >= 1.7 && fit.nu0 <= 2.7 && fit.loss_at_min < 0.25 * ref;
}

// ---- criterion 5: collapse fitter self-test on forward-generated data

CollapseDataset forward_dataset(double gamma, double nu, double sigma, std::uint64_t seed) {
    CollapseDataset ds;
    ds.p_star = 0.25;
    Rng rng(seed);
    for (int L : {5, 6, 7, 8})
        for (int i = 1; i <= 19; ++i) {
            double p = 0.025 * i;
            double q = (p - 0.25) * std::pow(double(L), 1.0 / nu);
            double s = 1.0 + std::pow(double(L), gamma / nu) * 0.6 * std::tanh(2.0 * q);
            if (sigma > 0.0) s += sigma * rng.normal();
            ds.entries.push_back({L, p, s, 0.0});
        }
    return ds;
}

bool fitter_selftest() {
    CollapseFit clean = fit_exponents(forward_dataset(1.9, 2.1, 0.0, 0));
    std::printf("    noiseless recovery: gamma = %.4f, nu = %.4f\n", clean.gamma0, clean.nu0);
    bool ok = std::abs(clean.gamma0 - 1.9) <= 0.05 && std::abs(clean.nu0 - 2.1) <= 0.05;

    double g_mean = 0.0, n_mean = 0.0;
    const int n_seeds = 20;
    for (int s = 1; s <= n_seeds; ++s) {
        CollapseFit f = fit_exponents(forward_dataset(1.9, 2.1, 0.02, s));
        g_mean += f.gamma0 / n_seeds;
        n_mean += f.nu0 / n_seeds;
    }
    std::printf("    noisy recovery over %d seeds: gamma = %.4f, nu = %.4f\n", n_seeds, g_mean,
                n_mean);
    return ok && std::abs(g_mean - 1.9) <= 0.15 && std::abs(n_mean - 2.1) <= 0.15;
}

// ---- criterion 6: MUB partitions and MUBQST fidelity

bool tomography_stack() {
    bool ok = true;
    for (int n : {2, 3}) {
        MubPartition part = enumerate_mubs(n);
        const std::size_t d = std::size_t(1) << n;
        ok &= part.groups.size() == d + 1;
        std::set<std::uint64_t> seen;
        for (const auto& g : part.groups) {
            ok &= g.size() == d - 1;
            for (const auto& p : g) ok &= seen.insert(p.code()).second;
            for (std::size_t i = 0; i < g.size(); ++i)
                for (std::size_t j = i + 1; j < g.size(); ++j) ok &= commutes(g[i], g[j]);
        }
        ok &= seen.size() == (std::size_t(1) << (2 * n)) - 1;

        std::vector<MatrixXcd> bases;
        for (const auto& g : part.groups) bases.push_back(mub_eigenbasis(g).basis);
        for (std::size_t a = 0; a < bases.size() && ok; ++a)
            for (std::size_t b = a + 1; b < bases.size() && ok; ++b)
                for (int i = 0; i < int(d); ++i)
                    for (int j = 0; j < int(d); ++j) {
                        double ov = std::norm((bases[a].col(i).adjoint() * bases[b].col(j))(0, 0));
                        if (std::abs(ov - 1.0 / double(d)) > 1e-9) ok = false;
                    }
        if (!ok) std::printf("    MUB structure check failed at n = %d\n", n);
    }

    Rng rng(77);
    StateVector psi = random_state(3, rng);
    DensityMatrix exact = psi.reduced_density_matrix({0, 1, 2});
    DensityMatrix est =
        tomographic_density_matrix(psi, {0, 1, 2}, make_tomography_setup(3), 100000, rng);
    double fid = fidelity(exact, est);
    std::printf("    n=3 MUBQST fidelity at 1e5 shots/basis: %.5f\n", fid);
    ok &= fid > 0.99;
    ok &= est.hermiticity_defect() < 1e-10;
    ok &= std::abs(est.mat.trace().real() - 1.0) < 1e-10;
    ok &= est.min_eigenvalue() > -1e-10;
    return ok;
}

// ---- criterion 7: readout round trip and residual entropy correction

bool mitigation_stack() {
    // readout round trip at 1e6 shots, flip rates 0.1
    Rng rng(31);
    ReadoutNoiseModel model = ReadoutNoiseModel::uniform(3, 0.1, 0.1);
    Eigen::MatrixXd cal = calibration_matrix(model, CalibrationMode::complete).matrix();
    const long long shots = 1000000;
    std::vector<long long> truth(8, 0);
    {
        std::vector<double> w(8);
        double tot = 0.0;
        for (double& x : w) {
            x = rng.uniform() + 0.05;
            tot += x;
        }
        long long assigned = 0;
        for (int i = 0; i < 8; ++i) {
            truth[i] = (long long)(shots * w[i] / tot);
            assigned += truth[i];
        }
        truth[0] += shots - assigned;
    }
    auto noisy = apply_readout_noise(truth, model, rng);
    auto fixed = mitigate_counts(noisy, cal);
    double tv = 0.0;
    for (int i = 0; i < 8; ++i) tv += std::abs(fixed[i] - double(truth[i]));
    tv /= 2.0 * double(shots);
    std::printf("    readout round-trip TV distance: %.5f\n", tv);
    bool ok = tv < 0.01;

    // residual entropy correction on the linear synthetic noise model
    ExperimentConfig cfg = base_cfg();
    cfg.mode = SweepMode::p_sweep;
    cfg.L_values = {4};
    cfg.p_values = {0.0, 0.25, 0.5, 0.75, 1.0};
    cfg.trajectories = 300;
    SweepResult clean = run_sweep(cfg);

    ExperimentConfig noisy_cfg = cfg;
    noisy_cfg.noise.gate = GateNoiseKind::linear_entropy;
    noisy_cfg.noise.linear_coeff = 20.0;
    noisy_cfg.re_scheme = ReScheme::linear;
    SweepResult corrected = run_sweep(noisy_cfg);

    double worst = 0.0;
    for (std::size_t i = 0; i < clean.records.size(); ++i)
        worst = std::max(worst, std::abs(corrected.records[i].estimate.mean -
                                         clean.records[i].estimate.mean));
    std::printf("    corrected vs noiseless p-sweep, worst pointwise gap: %.4f bits\n", worst);
    ok &= worst < 0.1;
    ok &= corrected.records.back().p == 1.0 && corrected.records.back().estimate.mean == 0.0;
    return ok;
}

// ---- criterion 8: equivalence oracles for the measurement implementations

bool equivalence_oracles() {
    bool ok = true;

    // Kraus vs ancilla outcome statistics, 2x2 contingency chi-square at the
    // 1% level (critical value 6.635)
    for (double eta : {0.25, 0.5, 0.75}) {
        Rng prep(1000 + int(eta * 100));
        StateVector base = random_state(1, prep);
        long long counts[2][2] = {{0, 0}, {0, 0}};
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            StateVector sys = base;
            Rng r1(derive_seed(7, 2 * i));
            int out_k = sys.apply_weak_kraus(KrausPair::weak(eta), 0, r1);

            StateVector both(2);
            both.amplitudes()[0] = base.amp(0);
            both.amplitudes()[2] = base.amp(1);
            Rng r2(derive_seed(9, 2 * i + 1));
            int out_a = both.apply_weak_ancilla(eta, 1, 0, r2);
            ++counts[0][out_k == 1 ? 0 : 1];
            ++counts[1][out_a == 1 ? 0 : 1];
        }
        double chi2 = 0.0;
        double col[2] = {double(counts[0][0] + counts[1][0]),
                         double(counts[0][1] + counts[1][1])};
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                double expd = col[c] / 2.0;
                double d = double(counts[r][c]) - expd;
                if (expd > 0.0) chi2 += d * d / expd;
            }
        if (chi2 >= 6.635) {
            std::printf("    chi-square %.2f at eta = %.2f exceeds the 1%% level\n", chi2, eta);
            ok = false;
        }
    }

    // eta = 1 weak trajectories match projective trajectories on shared seeds
    CircuitSpec cp = sample_circuit(5, 6, 0.5, 1.0, MeasureKind::projective, 404);
    CircuitSpec cw = sample_circuit(5, 6, 0.5, 1.0, MeasureKind::weak, 404);
    TrajectoryRecord rp = run_trajectory(cp, 11);
    TrajectoryRecord rw = run_trajectory(cw, 11);
    for (std::size_t i = 0; i < rp.final_state.dim(); ++i)
        if (std::abs(rp.final_state.amp(i) - rw.final_state.amp(i)) > 1e-12) ok = false;

    // reduced density matrix vs brute-force partial trace, n <= 6
    Rng rng(55);
    for (int n = 2; n <= 6; ++n) {
        StateVector psi = random_state(n, rng);
        std::vector<int> sub;
        for (int q = 0; q < n; q += 2) sub.push_back(q);
        DensityMatrix fast = psi.reduced_density_matrix(sub);

        const int dk = 1 << int(sub.size());
        MatrixXcd slow = MatrixXcd::Zero(dk, dk);
        std::vector<int> rest;
        for (int q = 0; q < n; ++q)
            if (std::find(sub.begin(), sub.end(), q) == sub.end()) rest.push_back(q);
        auto expand = [&](int s, int r) {
            std::size_t full = 0;
            for (std::size_t b = 0; b < sub.size(); ++b)
                if (s & (1 << b)) full |= std::size_t(1) << sub[b];
            for (std::size_t b = 0; b < rest.size(); ++b)
                if (r & (1 << b)) full |= std::size_t(1) << rest[b];
            return full;
        };
        for (int i = 0; i < dk; ++i)
            for (int j = 0; j < dk; ++j)
                for (int r = 0; r < (1 << int(rest.size())); ++r)
                    slow(i, j) += psi.amp(expand(i, r)) * std::conj(psi.amp(expand(j, r)));
        if ((fast.mat - slow).cwiseAbs().maxCoeff() > 1e-10) {
            std::printf("    partial trace mismatch at n = %d\n", n);
            ok = false;
        }
    }
    return ok;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<bool()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 crossover curve and variance peak (L = 5 p-sweep)", crossover_curve},
        {"2 volume-law vs area-law scaling (quarter subsystem)", volume_area_scaling},
        {"3 weak-measurement crossover in eta (L = 3)", weak_crossover},
        {"4 critical exponents from the simulated collapse", simulated_criticality},
        {"5 collapse fitter self-test on synthetic data", fitter_selftest},
        {"6 tomography stack (MUB structure and MUBQST fidelity)", tomography_stack},
        {"7 mitigation stack (readout round trip and RE correction)", mitigation_stack},
        {"8 equivalence oracles (Kraus/ancilla, weak/projective, traces)", equivalence_oracles},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        bool ok = false;
        std::string note;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            note = std::string(" (exception: ") + e.what() + ")";
        }
        std::printf("criterion %s: %s%s\n", c.name, ok ? "PASS" : "FAIL", note.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
