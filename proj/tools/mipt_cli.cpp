// Command-line front end for the sweep / analysis pipeline.
//
// Subcommands:
//   sweep <config.json>                 run a configured sweep, emit result JSON
//   collapse <input> --p-star <v>       fit critical exponents to a dataset
//   export <result.json> --format ...   re-emit a stored result as csv or json
//   mubs --n <k>                        print the Pauli MUB partition table
//   selftest                            run quick built-in consistency oracles
//
// MIPT_WORKERS caps the worker thread count. Exit codes: 0 success, 2 bad
// configuration or input, 3 numerical diagnostic failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mipt/sweep.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw mipt::ConfigError("cannot open output file: " + path);
    f << text;
}

int cmd_sweep(const std::string& config_path, std::uint64_t seed_override, bool have_seed,
              const std::string& out_path) {
    mipt::ExperimentConfig cfg = mipt::load_config(config_path);
    if (have_seed) cfg.seed = seed_override;
    mipt::SweepResult result = mipt::run_sweep(cfg);
    write_text(out_path, mipt::result_to_json(result).dump(2) + "\n");
    return 0;
}

// Accepts either a stored sweep result (JSON) or a plain dataset table with
// the header "L p s_mean s_err".
mipt::CollapseDataset load_dataset(const std::string& path, double p_star) {
    std::ifstream f(path);
    if (!f) throw mipt::ConfigError("cannot open input file: " + path);
    std::stringstream buffer;
    buffer << f.rdbuf();
    std::string text = buffer.str();

    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw mipt::ConfigError(std::string("input parse: ") + e.what());
        }
        return mipt::dataset_from_result(mipt::result_from_json(j), p_star);
    }
    std::istringstream table(text);
    return mipt::read_collapse_dataset(table, p_star, 1.0);
}

int cmd_collapse(const std::string& input_path, double p_star, double epsilon,
                 const std::string& out_path) {
    mipt::CollapseDataset ds = load_dataset(input_path, p_star);
    mipt::CollapseOptions opt;
    opt.epsilon = epsilon;
    mipt::CollapseFit fit = mipt::fit_exponents(ds, opt);
    write_text(out_path, fit.to_text(opt));
    return 0;
}

int cmd_export(const std::string& result_path, const std::string& format,
               const std::string& out_path) {
    std::ifstream f(result_path);
    if (!f) throw mipt::ConfigError("cannot open result file: " + result_path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw mipt::ConfigError(std::string("result parse: ") + e.what());
    }
    mipt::SweepResult result = mipt::result_from_json(j);
    if (format == "csv") {
        std::ostringstream os;
        mipt::write_result_csv(os, result);
        write_text(out_path, os.str());
    } else if (format == "json") {
        write_text(out_path, mipt::result_to_json(result).dump(2) + "\n");
    } else {
        throw mipt::ConfigError("unknown export format: " + format);
    }
    return 0;
}

int cmd_mubs(int n, const std::string& out_path) {
    if (n < 1 || n > 5) throw mipt::ConfigError("mubs: --n must be in [1,5]");
    write_text(out_path, mipt::enumerate_mubs(n).to_table());
    return 0;
}

// Quick cross-checks of the numerical core; failure is a diagnostic error.
int cmd_selftest() {
    using namespace mipt;
    int failures = 0;
    auto check = [&](const char* what, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
        if (!ok) ++failures;
    };

    KrausPair kp = KrausPair::weak(0.37);
    check("weak measurement Kraus completeness", kp.completeness_defect() < 1e-12);

    Rng rng(12345);
    bool haar_ok = true;
    for (int i = 0; i < 200; ++i)
        haar_ok &= gates::is_unitary(sample_haar_1q(rng), 1e-10);
    check("Haar 1q sampling unitarity", haar_ok);

    MubPartition part = enumerate_mubs(2);
    bool mub_ok = part.groups.size() == 5;
    for (const auto& g : part.groups) {
        mub_ok &= g.size() == 3;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = i + 1; j < g.size(); ++j) mub_ok &= commutes(g[i], g[j]);
    }
    check("2-qubit MUB partition structure", mub_ok);

    ReadoutNoiseModel model = ReadoutNoiseModel::uniform(2, 0.05, 0.08);
    Eigen::MatrixXd cal = calibration_matrix(model, CalibrationMode::complete).matrix();
    Eigen::Vector4d truth(0.4, 0.3, 0.2, 0.1);
    Eigen::Vector4d reported = cal * truth;
    std::vector<double> raw(reported.data(), reported.data() + 4);
    for (double& v : raw) v *= 10000.0;
    auto fixed = mitigate_counts(raw, cal);
    bool mit_ok = true;
    for (int i = 0; i < 4; ++i) mit_ok &= std::abs(fixed[i] - truth[i] * 10000.0) < 1e-6;
    check("readout mitigation round trip", mit_ok);

    EnsembleParams params{3, 2, 1.0, 1.0, MeasureKind::projective};
    EntropyEstimate est = ensemble_entropy(params, SubsystemRule::half, 1.0, 50, 9);
    check("p = 1 trajectories disentangle", est.mean < 1e-10);

    CollapseDataset ds;
    ds.p_star = 0.25;
    for (int L : {4, 6})
        for (double p : {0.1, 0.2, 0.3, 0.4})
            ds.entries.push_back({L, p, 1.0 + std::pow(L, 0.75) * 0.3 * (p - 0.25) *
                                             std::pow(L, 0.5), 0.0});
    check("linear scaling collapse has zero loss", collapse_loss(ds, 1.5, 2.0) < 1e-18);

    if (failures > 0) throw DiagnosticError("selftest: " + std::to_string(failures) + " failure(s)");
    std::cout << "selftest passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"measurement-induced phase transition simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path, input_path, result_path, out_path, format = "csv";
    std::uint64_t seed_override = 0;
    double p_star = 0.25, epsilon = 0.01;
    int mub_n = 2;

    auto* sweep = app.add_subcommand("sweep", "run a configured entropy sweep");
    sweep->add_option("config", config_path, "config JSON file")->required();
    auto* seed_opt = sweep->add_option("--seed", seed_override, "override the config seed");
    sweep->add_option("-o,--output", out_path, "output file (default stdout)");

    auto* collapse = app.add_subcommand("collapse", "fit critical exponents to a dataset");
    collapse->add_option("input", input_path, "sweep result JSON or dataset table")->required();
    collapse->add_option("--p-star", p_star, "critical measurement rate")->required();
    collapse->add_option("--epsilon", epsilon, "error-width probe scale")
        ->capture_default_str();
    collapse->add_option("-o,--output", out_path, "output file (default stdout)");

    auto* exp = app.add_subcommand("export", "re-emit a stored result");
    exp->add_option("result", result_path, "sweep result JSON file")->required();
    exp->add_option("--format", format, "csv or json")->required();
    exp->add_option("-o,--output", out_path, "output file (default stdout)");

    auto* mubs = app.add_subcommand("mubs", "print a Pauli MUB partition");
    mubs->add_option("--n", mub_n, "number of qubits")->required();
    mubs->add_option("-o,--output", out_path, "output file (default stdout)");

    auto* selftest = app.add_subcommand("selftest", "run built-in consistency oracles");
    (void)selftest;

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed())
            return cmd_sweep(config_path, seed_override, seed_opt->count() > 0, out_path);
        if (collapse->parsed()) return cmd_collapse(input_path, p_star, epsilon, out_path);
        if (exp->parsed()) return cmd_export(result_path, format, out_path);
        if (mubs->parsed()) return cmd_mubs(mub_n, out_path);
        return cmd_selftest();
    } catch (const mipt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mipt::DiagnosticError& e) {
        std::cerr << "diagnostic failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
