#pragma once

#include <chrono>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mipt/collapse.hpp"
#include "mipt/ensemble.hpp"
#include "mipt/errors.hpp"
#include "mipt/mitigation.hpp"
#include "mipt/tomography.hpp"

namespace mipt {

inline constexpr const char* kVersionTag = "mipt 0.1.0";

enum class SweepMode { p_sweep, eta_sweep, L_scaling, collapse };
enum class ObservablePath { exact, tomographic };
enum class ReScheme { off, linear, trivial };
enum class DepthPolicy { auto_saturation, fixed };
enum class GateNoiseKind { none, depolarizing, linear_entropy };

// Synthetic noise injected into the pipeline. Gate noise feeds the residual
// entropy correction; readout flip rates corrupt tomography counts.
struct NoiseConfig {
    GateNoiseKind gate = GateNoiseKind::none;
    double eps1q = 3e-4;
    double eps2q = 4e-3;
    double epsro = 5e-3;
    double linear_coeff = 1.0;  // anomalous bits per unit circuit error
    double readout_p01 = 0.0;
    double readout_p10 = 0.0;

    bool any_gate_noise() const { return gate != GateNoiseKind::none; }
    bool any_readout_noise() const { return readout_p01 > 0.0 || readout_p10 > 0.0; }
};

struct ExperimentConfig {
    SweepMode mode = SweepMode::p_sweep;
    std::vector<int> L_values;
    std::vector<double> p_values;
    std::vector<double> eta_values;
    double alpha = 1.0;
    SubsystemRule subsystem_rule = SubsystemRule::half;
    bool quarter_interpolate = false;
    int trajectories = 300;
    MeasureKind kind = MeasureKind::projective;
    ObservablePath path = ObservablePath::exact;
    long long shots = 0;
    bool ro_mitigation = false;
    ReScheme re_scheme = ReScheme::off;
    NoiseConfig noise;
    std::uint64_t seed = 1;
    DepthPolicy depth_policy = DepthPolicy::auto_saturation;
    int fixed_T = 0;
    double ci_level = 0.0;  // 0 -> mode default (0.90 p-sweeps, 0.98 eta-sweeps)
    int bootstrap_resamples = 1000;
    int memory_cap_L = 16;

    double effective_ci_level() const {
        if (ci_level > 0.0) return ci_level;
        return mode == SweepMode::eta_sweep ? 0.98 : 0.90;
    }

    void validate() const {
        if (L_values.empty()) throw ConfigError("config: L values required");
        if (trajectories < 2) throw ConfigError("config: trajectories must be >= 2");
        if (mode != SweepMode::eta_sweep && p_values.empty())
            throw ConfigError("config: p values required");
        if (mode == SweepMode::eta_sweep && eta_values.empty())
            throw ConfigError("config: eta values required");
        if (path == ObservablePath::exact && shots != 0)
            throw ConfigError("config: exact path forbids the shots field");
        if (path == ObservablePath::tomographic && shots < 1)
            throw ConfigError("config: tomographic path requires shots >= 1");
        for (int L : L_values) {
            if (L < 2) throw ConfigError("config: L must be >= 2");
            if (L > memory_cap_L)
                throw ConfigError("config: L exceeds the memory cap (" +
                                  std::to_string(memory_cap_L) + ")");
        }
        for (double p : p_values)
            if (p < 0 || p > 1) throw ConfigError("config: p outside [0,1]");
        for (double e : eta_values)
            if (e < 0 || e > 1) throw ConfigError("config: eta outside [0,1]");
        if (depth_policy == DepthPolicy::fixed && fixed_T < 1)
            throw ConfigError("config: fixed depth requires T >= 1");
    }
};

struct SweepRecord {
    int L = 0;
    double p = 0.0;
    double eta = 1.0;
    double alpha = 1.0;
    int depth = 0;
    EntropyEstimate estimate;
    std::vector<double> raw_entropies;
    double wall_time_s = 0.0;
    std::uint64_t point_seed = 0;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    nlohmann::json config_snapshot;
    std::string version = kVersionTag;
};

// ---- config JSON (de)serialization

namespace detail {

template <typename T>
T enum_from(const std::string& s, const std::vector<std::pair<std::string, T>>& table,
            const std::string& what) {
    for (const auto& [name, v] : table)
        if (name == s) return v;
    throw ConfigError("config: unknown " + what + " '" + s + "'");
}

inline const std::vector<std::pair<std::string, SweepMode>>& mode_names() {
    static const std::vector<std::pair<std::string, SweepMode>> t{
        {"p-sweep", SweepMode::p_sweep},
        {"eta-sweep", SweepMode::eta_sweep},
        {"L-scaling", SweepMode::L_scaling},
        {"collapse", SweepMode::collapse}};
    return t;
}

template <typename T>
std::string enum_name(T v, const std::vector<std::pair<std::string, T>>& table) {
    for (const auto& [name, val] : table)
        if (val == v) return name;
    return "?";
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using nlohmann::json;
    ExperimentConfig c;
    try {
        c.mode = detail::enum_from<SweepMode>(j.at("mode").get<std::string>(),
                                              detail::mode_names(), "mode");
        c.L_values = j.at("L").get<std::vector<int>>();
        if (j.contains("p")) c.p_values = j.at("p").get<std::vector<double>>();
        if (j.contains("eta")) c.eta_values = j.at("eta").get<std::vector<double>>();
        c.alpha = j.value("alpha", 1.0);
        std::string sub = j.value("subsystem", "half");
        if (sub == "half") {
            c.subsystem_rule = SubsystemRule::half;
        } else if (sub == "quarter") {
            c.subsystem_rule = SubsystemRule::quarter_floor;
            c.quarter_interpolate = true;
        } else if (sub == "quarter-floor") {
            c.subsystem_rule = SubsystemRule::quarter_floor;
        } else if (sub == "quarter-ceil") {
            c.subsystem_rule = SubsystemRule::quarter_ceil;
        } else {
            throw ConfigError("config: unknown subsystem rule '" + sub + "'");
        }
        c.trajectories = j.value("trajectories", 300);
        c.kind = j.value("kind", std::string("projective")) == "weak" ? MeasureKind::weak
                                                                      : MeasureKind::projective;
        std::string path = j.value("path", "exact");
        if (path == "exact")
            c.path = ObservablePath::exact;
        else if (path == "tomographic")
            c.path = ObservablePath::tomographic;
        else
            throw ConfigError("config: unknown path '" + path + "'");
        c.shots = j.value("shots", 0LL);
        if (j.contains("mitigation")) {
            const auto& m = j.at("mitigation");
            c.ro_mitigation = m.value("ro", false);
            std::string re = m.value("re", "off");
            c.re_scheme = re == "linear"   ? ReScheme::linear
                          : re == "trivial" ? ReScheme::trivial
                                            : ReScheme::off;
            if (re != "off" && re != "linear" && re != "trivial")
                throw ConfigError("config: unknown re scheme '" + re + "'");
        }
        if (j.contains("noise")) {
            const auto& nj = j.at("noise");
            std::string g = nj.value("gate", "none");
            c.noise.gate = g == "depolarizing" ? GateNoiseKind::depolarizing
                           : g == "linear"      ? GateNoiseKind::linear_entropy
                                                : GateNoiseKind::none;
            if (g != "none" && g != "depolarizing" && g != "linear")
                throw ConfigError("config: unknown gate noise '" + g + "'");
            c.noise.eps1q = nj.value("eps1q", 3e-4);
            c.noise.eps2q = nj.value("eps2q", 4e-3);
            c.noise.epsro = nj.value("epsro", 5e-3);
            c.noise.linear_coeff = nj.value("linear_coeff", 1.0);
            c.noise.readout_p01 = nj.value("readout_p01", 0.0);
            c.noise.readout_p10 = nj.value("readout_p10", 0.0);
        }
        c.seed = j.value("seed", std::uint64_t(1));
        if (j.contains("depth")) {
            const auto& d = j.at("depth");
            std::string pol = d.value("policy", "auto");
            if (pol == "auto")
                c.depth_policy = DepthPolicy::auto_saturation;
            else if (pol == "fixed")
                c.depth_policy = DepthPolicy::fixed;
            else
                throw ConfigError("config: unknown depth policy '" + pol + "'");
            c.fixed_T = d.value("T", 0);
        }
        c.ci_level = j.value("ci_level", 0.0);
        c.bootstrap_resamples = j.value("bootstrap_resamples", 1000);
        c.memory_cap_L = j.value("memory_cap_L", 16);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    return config_from_json(j);
}

// ---- sweep execution

namespace detail {

struct PointParams {
    int L;
    double p;
    double eta;
};

// Per-trajectory entropy of one sweep point, with the configured observable
// path and synthetic noise applied.
struct PointRunner {
    const ExperimentConfig& cfg;
    int T;

    double entropy_of(const CircuitSpec& circuit, std::uint64_t traj_seed,
                      const std::vector<int>& subsystem) const {
        Rng rng(traj_seed);
        TrajectoryRecord rec = run_trajectory(circuit, derive_seed(traj_seed, 1));

        DensityMatrix rho;
        if (cfg.path == ObservablePath::exact) {
            rho = rec.final_state.reduced_density_matrix(subsystem);
        } else {
            const TomographySetup& setup = tomography_setup_for(int(subsystem.size()));
            CountsTransform transform = make_transform(int(subsystem.size()), rng);
            rho = tomographic_density_matrix(rec.final_state, subsystem, setup, cfg.shots, rng,
                                             transform);
        }

        double s = 0.0;
        if (cfg.noise.gate == GateNoiseKind::depolarizing) {
            GateCounts gc = counts_with_tail(circuit, subsystem);
            double c = std::min(
                1.0, circuit_error(gc, cfg.noise.eps1q, cfg.noise.eps2q, cfg.noise.epsro));
            int d = rho.dim();
            rho.mat = (1.0 - c) * rho.mat + c / double(d) * MatrixXcd::Identity(d, d);
            s = renyi_entropy(rho, cfg.alpha);
        } else if (cfg.noise.gate == GateNoiseKind::linear_entropy) {
            GateCounts gc = counts_with_tail(circuit, subsystem);
            double e =
                circuit_error(gc, cfg.noise.eps1q, cfg.noise.eps2q, cfg.noise.epsro);
            s = renyi_entropy(rho, cfg.alpha) + cfg.noise.linear_coeff * e;
        } else {
            s = renyi_entropy(rho, cfg.alpha);
        }
        return s;
    }

    GateCounts counts_with_tail(const CircuitSpec& circuit,
                                const std::vector<int>& subsystem) const {
        GateCounts gc = gate_counts(circuit);
        if (cfg.path == ObservablePath::tomographic) {
            int n = int(subsystem.size());
            add_tomography_tail(gc, subsystem, int(tomography_setup_for(n).settings.size()));
        }
        return gc;
    }

    const TomographySetup& tomography_setup_for(int n) const {
        static std::map<int, TomographySetup> cache;
        static std::mutex mu;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, make_tomography_setup(n)).first;
        return it->second;
    }

    CountsTransform make_transform(int n, Rng& rng) const {
        if (!cfg.noise.any_readout_noise() && !cfg.ro_mitigation) return nullptr;
        ReadoutNoiseModel model =
            ReadoutNoiseModel::uniform(n, cfg.noise.readout_p01, cfg.noise.readout_p10);
        std::optional<Eigen::MatrixXd> cal;
        if (cfg.ro_mitigation) {
            CalibrationMode mode = n <= 5 ? CalibrationMode::complete : CalibrationMode::tensored;
            cal = calibration_matrix(model, mode).matrix();
        }
        Rng* rng_ptr = &rng;
        NoiseConfig noise = cfg.noise;
        return [model, cal, rng_ptr, noise](const std::vector<long long>& counts,
                                            std::size_t) -> std::vector<double> {
            std::vector<long long> corrupted =
                noise.any_readout_noise() ? apply_readout_noise(counts, model, *rng_ptr) : counts;
            if (cal) return mitigate_counts(corrupted, *cal);
            return std::vector<double>(corrupted.begin(), corrupted.end());
        };
    }
};

}  // namespace detail

class SweepRunner {
public:
    explicit SweepRunner(ExperimentConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    SweepResult run() {
        std::vector<detail::PointParams> grid = build_grid();
        SweepResult result;
        result.config_snapshot = snapshot();

        for (std::size_t pi = 0; pi < grid.size(); ++pi)
            result.records.push_back(run_point(grid[pi], derive_seed(cfg_.seed, 1000 + pi)));

        if (cfg_.re_scheme != ReScheme::off) apply_re_correction(result.records);
        return result;
    }

private:
    std::vector<detail::PointParams> build_grid() const {
        std::vector<detail::PointParams> grid;
        double eta0 = cfg_.eta_values.empty() ? 1.0 : cfg_.eta_values.front();
        switch (cfg_.mode) {
            case SweepMode::p_sweep:
            case SweepMode::L_scaling:
            case SweepMode::collapse:
                for (int L : cfg_.L_values)
                    for (double p : cfg_.p_values) grid.push_back({L, p, eta0});
                break;
            case SweepMode::eta_sweep:
                for (int L : cfg_.L_values)
                    for (double p : cfg_.p_values.empty() ? std::vector<double>{1.0}
                                                          : cfg_.p_values)
                        for (double eta : cfg_.eta_values) grid.push_back({L, p, eta});
                break;
        }
        return grid;
    }

    int depth_for(int L, double p, double eta) {
        if (cfg_.depth_policy == DepthPolicy::fixed) return cfg_.fixed_T;
        return sat_cache_.depth(L, p, eta, cfg_.kind, cfg_.alpha, 100,
                                derive_seed(cfg_.seed, 0x5a7));
    }

    SweepRecord run_point(const detail::PointParams& pt, std::uint64_t point_seed) {
        auto t0 = std::chrono::steady_clock::now();
        SweepRecord rec;
        rec.L = pt.L;
        rec.p = pt.p;
        rec.eta = pt.eta;
        rec.alpha = cfg_.alpha;
        rec.point_seed = point_seed;
        rec.depth = depth_for(pt.L, pt.p, pt.eta);

        detail::PointRunner runner{cfg_, rec.depth};
        bool interp = cfg_.quarter_interpolate;
        std::vector<int> sub = subsystem_for(pt.L, cfg_.subsystem_rule);
        std::vector<int> sub_ceil;
        if (interp) {
            sub_ceil = subsystem_for(pt.L, SubsystemRule::quarter_ceil);
            if (sub_ceil.size() == sub.size()) interp = false;  // L/4 integral
        }

        std::vector<double> vals(cfg_.trajectories);
        parallel_for(std::size_t(cfg_.trajectories), [&](std::size_t i) {
            CircuitSpec circuit = sample_circuit(pt.L, rec.depth, pt.p, pt.eta, cfg_.kind,
                                                 derive_seed(point_seed, 2 * i));
            std::uint64_t traj_seed = derive_seed(point_seed, 2 * i + 1);
            double s = runner.entropy_of(circuit, traj_seed, sub);
            if (interp) {
                double s_ceil = runner.entropy_of(circuit, traj_seed, sub_ceil);
                s = interpolate_quarter(s, s_ceil, pt.L);
            }
            vals[i] = s;
        });

        rec.raw_entropies = vals;
        rec.estimate = summarize_entropies(vals, cfg_.alpha, cfg_.effective_ci_level(),
                                           cfg_.bootstrap_resamples, derive_seed(point_seed, 7));
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rec;
    }

    // Residual entropy correction: subtract the (p = eta = 1) reference
    // scaled by the mean circuit-error ratio (linear scheme) or unscaled
    // (trivial scheme). Mean and CI bounds shift together; the floor at zero
    // applies to the mean.
    void apply_re_correction(std::vector<SweepRecord>& records) {
        std::map<int, double> ref_entropy;   // per L
        std::map<int, double> ref_error;     // per L, mean E[C] at p = eta = 1

        for (auto& rec : records) {
            bool is_reference = rec.p >= 1.0 - 1e-12 &&
                                (cfg_.kind == MeasureKind::projective || rec.eta >= 1.0 - 1e-12);
            double s_ref, e_ref;
            if (is_reference) {
                s_ref = rec.estimate.mean;
                e_ref = mean_point_error(rec);
            } else {
                ensure_reference(rec.L, ref_entropy, ref_error);
                s_ref = ref_entropy[rec.L];
                e_ref = ref_error[rec.L];
            }
            double ratio = 1.0;
            if (cfg_.re_scheme == ReScheme::linear)
                ratio = e_ref > 0.0 ? mean_point_error(rec) / e_ref : 0.0;
            double corrected = residual_entropy_correct(rec.estimate.mean, s_ref, ratio);
            double shift = rec.estimate.mean - corrected;
            rec.estimate.mean = corrected;
            rec.estimate.ci_low -= shift;
            rec.estimate.ci_high -= shift;
        }
    }

    double mean_point_error(const SweepRecord& rec) {
        detail::PointRunner runner{cfg_, rec.depth};
        std::vector<int> sub = subsystem_for(rec.L, cfg_.subsystem_rule);
        double acc = 0.0;
        for (int i = 0; i < cfg_.trajectories; ++i) {
            CircuitSpec circuit = sample_circuit(rec.L, rec.depth, rec.p, rec.eta, cfg_.kind,
                                                 derive_seed(rec.point_seed, 2 * i));
            acc += circuit_error(runner.counts_with_tail(circuit, sub), cfg_.noise.eps1q,
                                 cfg_.noise.eps2q, cfg_.noise.epsro);
        }
        return acc / double(cfg_.trajectories);
    }

    void ensure_reference(int L, std::map<int, double>& ref_entropy,
                          std::map<int, double>& ref_error) {
        if (ref_entropy.count(L)) return;
        detail::PointParams ref{L, 1.0, 1.0};
        SweepRecord rec = run_point(ref, derive_seed(cfg_.seed, 0xEF000 + std::uint64_t(L)));
        ref_entropy[L] = rec.estimate.mean;
        ref_error[L] = mean_point_error(rec);
    }

    nlohmann::json snapshot() const {
        nlohmann::json j;
        j["mode"] = detail::enum_name(cfg_.mode, detail::mode_names());
        j["L"] = cfg_.L_values;
        j["p"] = cfg_.p_values;
        j["eta"] = cfg_.eta_values;
        j["alpha"] = cfg_.alpha;
        j["subsystem"] = cfg_.quarter_interpolate ? "quarter"
                         : cfg_.subsystem_rule == SubsystemRule::half ? "half"
                         : cfg_.subsystem_rule == SubsystemRule::quarter_floor ? "quarter-floor"
                                                                               : "quarter-ceil";
        j["trajectories"] = cfg_.trajectories;
        j["kind"] = cfg_.kind == MeasureKind::weak ? "weak" : "projective";
        j["path"] = cfg_.path == ObservablePath::exact ? "exact" : "tomographic";
        if (cfg_.shots > 0) j["shots"] = cfg_.shots;
        j["mitigation"] = {{"ro", cfg_.ro_mitigation},
                           {"re", cfg_.re_scheme == ReScheme::linear    ? "linear"
                                  : cfg_.re_scheme == ReScheme::trivial ? "trivial"
                                                                        : "off"}};
        j["noise"] = {{"gate", cfg_.noise.gate == GateNoiseKind::depolarizing ? "depolarizing"
                               : cfg_.noise.gate == GateNoiseKind::linear_entropy ? "linear"
                                                                                  : "none"},
                      {"eps1q", cfg_.noise.eps1q},
                      {"eps2q", cfg_.noise.eps2q},
                      {"epsro", cfg_.noise.epsro},
                      {"linear_coeff", cfg_.noise.linear_coeff},
                      {"readout_p01", cfg_.noise.readout_p01},
                      {"readout_p10", cfg_.noise.readout_p10}};
        j["seed"] = cfg_.seed;
        j["depth"] = {{"policy",
                       cfg_.depth_policy == DepthPolicy::fixed ? "fixed" : "auto"},
                      {"T", cfg_.fixed_T}};
        j["ci_level"] = cfg_.ci_level;
        j["bootstrap_resamples"] = cfg_.bootstrap_resamples;
        j["memory_cap_L"] = cfg_.memory_cap_L;
        return j;
    }

    ExperimentConfig cfg_;
    SaturationCache sat_cache_;
};

inline SweepResult run_sweep(const ExperimentConfig& cfg) { return SweepRunner(cfg).run(); }

// ---- persistence

inline nlohmann::json result_to_json(const SweepResult& result) {
    nlohmann::json j;
    j["version"] = result.version;
    j["config"] = result.config_snapshot;
    j["records"] = nlohmann::json::array();
    for (const auto& r : result.records) {
        nlohmann::json rj;
        rj["L"] = r.L;
        rj["p"] = r.p;
        rj["eta"] = r.eta;
        rj["alpha"] = r.alpha;
        rj["depth"] = r.depth;
        rj["mean"] = r.estimate.mean;
        rj["variance"] = r.estimate.variance;
        rj["ci_low"] = r.estimate.ci_low;
        rj["ci_high"] = r.estimate.ci_high;
        rj["ci_level"] = r.estimate.ci_level;
        rj["n"] = r.estimate.n_samples;
        rj["raw"] = r.raw_entropies;
        rj["wall_time_s"] = r.wall_time_s;
        rj["seed"] = r.point_seed;
        j["records"].push_back(std::move(rj));
    }
    return j;
}

inline SweepResult result_from_json(const nlohmann::json& j) {
    SweepResult result;
    try {
        result.version = j.at("version").get<std::string>();
        result.config_snapshot = j.at("config");
        for (const auto& rj : j.at("records")) {
            SweepRecord r;
            r.L = rj.at("L").get<int>();
            r.p = rj.at("p").get<double>();
            r.eta = rj.at("eta").get<double>();
            r.alpha = rj.at("alpha").get<double>();
            r.depth = rj.at("depth").get<int>();
            r.estimate.alpha = r.alpha;
            r.estimate.mean = rj.at("mean").get<double>();
            r.estimate.variance = rj.at("variance").get<double>();
            r.estimate.ci_low = rj.at("ci_low").get<double>();
            r.estimate.ci_high = rj.at("ci_high").get<double>();
            r.estimate.ci_level = rj.at("ci_level").get<double>();
            r.estimate.n_samples = rj.at("n").get<int>();
            r.raw_entropies = rj.at("raw").get<std::vector<double>>();
            r.wall_time_s = rj.at("wall_time_s").get<double>();
            r.point_seed = rj.at("seed").get<std::uint64_t>();
            result.records.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("result parse: ") + e.what());
    }
    return result;
}

// CSV summary table; column order is part of the schema.
inline void write_result_csv(std::ostream& out, const SweepResult& result) {
    out << "L,p,eta,alpha,mean,variance,ci_low,ci_high,n\n" << std::setprecision(12);
    for (const auto& r : result.records)
        out << r.L << ',' << r.p << ',' << r.eta << ',' << r.alpha << ',' << r.estimate.mean
            << ',' << r.estimate.variance << ',' << r.estimate.ci_low << ',' << r.estimate.ci_high
            << ',' << r.estimate.n_samples << '\n';
}

// ---- collapse analysis on sweep results

inline CollapseDataset dataset_from_result(const SweepResult& result, double p_star) {
    CollapseDataset ds;
    ds.p_star = p_star;
    for (const auto& r : result.records) {
        CollapsePoint pt;
        pt.L = r.L;
        pt.p = r.p;
        pt.s_mean = r.estimate.mean;
        pt.s_err = 0.5 * (r.estimate.ci_high - r.estimate.ci_low);
        ds.alpha = r.alpha;
        ds.entries.push_back(pt);
    }
    return ds;
}

struct CollapseAnalysis {
    CollapseFit fit;
    std::vector<RescaledCurve> rescaled;  // at the fitted exponents
};

inline CollapseAnalysis analyze_collapse(const CollapseDataset& dataset,
                                         const CollapseOptions& options = {}) {
    CollapseAnalysis out;
    out.fit = fit_exponents(dataset, options);
    out.rescaled = rescale(dataset, out.fit.gamma0, out.fit.nu0);
    return out;
}

}  // namespace mipt
