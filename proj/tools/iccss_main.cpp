#include <CLI11.hpp>

#include "icc/csvio.hpp"
#include "icc/evaluate.hpp"
#include "icc/fusion.hpp"
#include "icc/nn/checkpoint.hpp"
#include "icc/nn/train.hpp"
#include "icc/simplified.hpp"
#include "icc/version.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

std::string g_command_line;

struct RunWriter {
    std::string out_dir;
    icc::RunManifest manifest;

    RunWriter(const std::string& out, const std::string& config_path, uint64_t seed) {
        out_dir = out;
        std::filesystem::create_directories(out_dir);
        manifest.command = g_command_line;
        manifest.config_path = config_path;
        manifest.seed = seed;
        manifest.out_dir = out_dir;
        manifest.version = icc::kVersion;
        manifest.started_at = icc::timestamp_utc_now();
    }

    std::string path(const std::string& name) const { return out_dir + "/" + name; }

    void emit(const std::string& name, const std::string& content,
              const icc::ScenarioConfig* sidecar_cfg = nullptr) {
        icc::write_text_file(path(name), content);
        if (sidecar_cfg)
            icc::write_text_file(path(name) + ".meta.json",
                                 icc::metadata_json(*sidecar_cfg, manifest.seed));
        std::cout << "wrote " << path(name) << "\n";
    }

    void finish() {
        manifest.finished_at = icc::timestamp_utc_now();
        icc::write_text_file(path("manifest.json"), manifest.to_json_string());
    }
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Scenario fields that may be overridden from the command line.
struct ScenarioOverrides {
    std::optional<double> snr_sense_db;
    std::optional<double> snr_report_db;
    std::optional<int> k_sensors;
    std::optional<int> n_samples;
    std::optional<double> iota;
    std::optional<double> k_factor_db;
    std::optional<double> rho;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--snr-sense-db", snr_sense_db, "Override sensing SNR (dB)");
        cmd->add_option("--snr-report-db", snr_report_db, "Override reporting SNR (dB)");
        cmd->add_option("--k-sensors", k_sensors, "Override sensor count");
        cmd->add_option("--n-samples", n_samples, "Override samples per slot");
        cmd->add_option("--iota", iota, "Override channel estimation quality");
        cmd->add_option("--k-factor-db", k_factor_db, "Override Rician K-factor (dB)");
        cmd->add_option("--rho", rho, "Override antenna correlation");
    }

    void apply(icc::ScenarioConfig& cfg) const {
        if (k_sensors) cfg.set_k(*k_sensors);
        if (n_samples) cfg.n = *n_samples;
        if (snr_sense_db) cfg.set_snr_sense_db(*snr_sense_db);
        if (snr_report_db) cfg.set_snr_report_db(*snr_report_db);
        if (iota) cfg.iota = *iota;
        if (k_factor_db) cfg.k_factor_db = *k_factor_db;
        if (rho) cfg.rho = *rho;
        cfg.validate();
    }
};

struct EvalArgs {
    std::string config_path;
    std::string out_dir;
    std::string method = "ed-hdf";
    std::string checkpoint;
    std::vector<double> pfa_grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    long long trials = 10000;
    uint64_t seed = 1;
    int threads = 1;
    bool global_pfa = false;
    ScenarioOverrides overrides;

    void add_common(CLI::App* cmd, bool with_method) {
        cmd->add_option("--config", config_path, "Scenario config JSON")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "Output directory")->required();
        cmd->add_option("--trials", trials, "Monte Carlo trials per hypothesis")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--threads", threads, "Worker threads for trials")
            ->check(CLI::PositiveNumber);
        if (with_method) {
            cmd->add_option("--method", method,
                            "ed|med|mmed|cav|ec-hdf/sdf, icc, icc-no-aircomp, simplified");
            cmd->add_option("--checkpoint", checkpoint, "Trained model checkpoint")
                ->check(CLI::ExistingFile);
        }
        overrides.add_flags(cmd);
    }

    icc::ScenarioConfig scenario() const {
        icc::ScenarioConfig cfg = icc::ScenarioConfig::load(config_path);
        overrides.apply(cfg);
        return cfg;
    }

    // Parses the method, loads the checkpoint when one is needed and
    // leaves the model alive in `storage` for the context's lifetime.
    icc::EvalContext context(const icc::ScenarioConfig& cfg,
                             std::optional<icc::nn::Model>& storage) const {
        icc::EvalContext ctx;
        ctx.method = icc::MethodSpec::parse(method);
        ctx.cfg = cfg;
        if (ctx.method.needs_checkpoint()) {
            if (checkpoint.empty())
                throw std::invalid_argument("method '" + method + "' needs --checkpoint");
            storage.emplace(icc::nn::load_checkpoint(checkpoint));
            ctx.model = &*storage;
        }
        return ctx;
    }
};

int run_theory_hdf_bound(double snr_report_db, int k, double p_local) {
    std::printf("%.10g\n", icc::hdf_theoretical_pd(p_local, snr_report_db, k));
    return 0;
}

int run_theory_ber(double snr_report_db) {
    std::printf("%.10g\n", icc::bpsk_theoretical_ber(snr_report_db));
    return 0;
}

struct TrainArgs {
    std::string config_path;
    std::string train_config_path;
    std::string out_dir;
    std::optional<uint64_t> seed;
    std::optional<int> epochs;
    bool no_aircomp = false;
    ScenarioOverrides overrides;
};

int run_train(const TrainArgs& args) {
    icc::ScenarioConfig cfg = icc::ScenarioConfig::load(args.config_path);
    args.overrides.apply(cfg);
    icc::nn::TrainConfig tcfg = icc::nn::TrainConfig::load(args.train_config_path);
    if (args.seed) tcfg.seed = *args.seed;
    if (args.epochs) tcfg.epochs = *args.epochs;
    if (args.no_aircomp) tcfg.aircomp = false;
    tcfg.validate();

    icc::nn::ArchConfig arch;
    arch.m = cfg.m;
    icc::nn::Model model(arch);
    icc::RngStream init(tcfg.seed, icc::nn::kInitStreamId);
    model.init(init);

    RunWriter out(args.out_dir, args.config_path, tcfg.seed);
    std::cerr << "training " << model.param_count() << " parameters, " << tcfg.epochs
              << " epochs\n";
    const icc::nn::TrainResult result =
        icc::nn::train(model, tcfg, cfg, [](int epoch, double loss) {
            std::cerr << "epoch " << epoch << " loss " << icc::format_double(loss) << "\n";
        });

    icc::nn::save_checkpoint(model, out.path("model.ckpt"));
    std::cout << "wrote " << out.path("model.ckpt") << "\n";
    out.emit("loss.csv", icc::loss_csv(result.epoch_loss), &cfg);
    out.emit("train_config.json", tcfg.to_json_string() + "\n");
    out.finish();
    return 0;
}

int run_eval_roc(const EvalArgs& args) {
    const icc::ScenarioConfig cfg = args.scenario();
    std::optional<icc::nn::Model> storage;
    const icc::EvalContext ctx = args.context(cfg, storage);
    RunWriter out(args.out_dir, args.config_path, args.seed);
    const icc::RocCurve curve =
        args.global_pfa
            ? icc::run_roc_global(ctx, args.pfa_grid, args.trials, args.seed, args.threads)
            : icc::run_roc(ctx, args.pfa_grid, args.trials, args.seed, args.threads);
    print_warnings(curve.warnings);
    out.emit("roc.csv", icc::roc_csv(curve), &cfg);
    out.finish();
    return 0;
}

struct SweepArgs : EvalArgs {
    std::string axis;
    std::vector<double> values;
    std::vector<double> values2;
    double target_pfa = 0.1;
};

int run_eval_sweep(const SweepArgs& args) {
    const icc::ScenarioConfig cfg = args.scenario();
    std::optional<icc::nn::Model> storage;
    const icc::EvalContext ctx = args.context(cfg, storage);
    RunWriter out(args.out_dir, args.config_path, args.seed);
    const icc::SweepResult result =
        icc::run_sweep(ctx, args.axis, args.values, args.values2, args.target_pfa, args.trials,
                       args.seed, args.threads);
    out.emit("sweep.csv", icc::sweep_csv(result), &cfg);
    out.finish();
    return 0;
}

int run_eval_ablation(const EvalArgs& args) {
    if (args.checkpoint.empty())
        throw std::invalid_argument("eval ablation needs --checkpoint");
    const icc::ScenarioConfig cfg = args.scenario();
    const icc::nn::Model model = icc::nn::load_checkpoint(args.checkpoint);
    RunWriter out(args.out_dir, args.config_path, args.seed);
    const icc::AblationResult result = icc::run_ablation_no_aircomp(
        model, cfg, args.pfa_grid, args.trials, args.seed, args.threads);
    print_warnings(result.curve.warnings);
    out.emit("ablation.csv", icc::roc_csv(result.curve), &cfg);
    out.emit("ablation.json",
             "{\n  \"subchannels_orthogonal\": " +
                 std::to_string(result.subchannels_orthogonal) +
                 ",\n  \"subchannels_aircomp\": " +
                 std::to_string(result.subchannels_aircomp) + "\n}\n");
    out.finish();
    return 0;
}

struct ConstellationArgs : EvalArgs {
    long long slots = 200;
};

int run_eval_constellation(const ConstellationArgs& args) {
    if (args.checkpoint.empty())
        throw std::invalid_argument("eval constellation needs --checkpoint");
    const icc::ScenarioConfig cfg = args.scenario();
    const icc::nn::Model model = icc::nn::load_checkpoint(args.checkpoint);
    RunWriter out(args.out_dir, args.config_path, args.seed);
    const auto rows = icc::export_constellation(model, cfg, args.slots, args.seed);
    out.emit("constellation.csv", icc::constellation_csv(rows), &cfg);
    out.finish();
    return 0;
}

struct Prop3Args {
    std::string config_path;
    std::string out_dir;
    long long trials = 10000;
    uint64_t seed = 1;
};

int run_verify_prop3(const Prop3Args& args) {
    icc::ScenarioConfig cfg;
    if (!args.config_path.empty()) {
        cfg = icc::ScenarioConfig::load(args.config_path);
    } else {
        // compact uncorrelated-antenna scenario; the check needs rho = 0
        cfg.set_k(4);
        cfg.m = 8;
        cfg.n = 50;
        cfg.rho = 0.0;
        cfg.set_snr_sense_db(-10.0);
    }
    cfg.validate();
    const icc::SimplifiedModel model = icc::default_simplified(cfg.m);
    icc::RngStream stream(args.seed, 0);
    const icc::RankAgreementReport report =
        icc::verify_rank_agreement(model, cfg, args.trials, stream);
    const std::string text = report.to_json_string() + "\n";
    if (!args.out_dir.empty()) {
        RunWriter out(args.out_dir, args.config_path, args.seed);
        out.emit("prop3.json", text, &cfg);
        out.finish();
    } else {
        std::cout << text;
    }
    std::cout << (report.pass ? "rank agreement holds\n" : "rank agreement FAILED\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i) g_command_line += ' ';
        g_command_line += argv[i];
    }

    CLI::App app{"Cooperative spectrum sensing simulation toolkit"};
    app.set_version_flag("--version", icc::kVersion);
    app.require_subcommand(1);

    // theory
    auto* theory = app.add_subcommand("theory", "Closed-form reporting-channel values");
    theory->require_subcommand(1);

    double th_snr = 0.0;
    int th_k = 6;
    double th_p = 1.0;
    auto* hdf_bound = theory->add_subcommand(
        "hdf-bound", "Majority-vote detection probability over the noisy reporting channel");
    hdf_bound->add_option("--snr-report-db", th_snr, "Reporting SNR (dB)")->required();
    hdf_bound->add_option("--k", th_k, "Sensor count")->required()->check(CLI::PositiveNumber);
    hdf_bound->add_option("--p-local", th_p, "Per-sensor local detection probability")
        ->check(CLI::Range(0.0, 1.0));

    double ber_snr = 0.0;
    auto* ber = theory->add_subcommand("ber", "BPSK crossover of the ideal reporting link");
    ber->add_option("--snr-report-db", ber_snr, "Reporting SNR (dB)")->required();

    // train
    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train the semantic encoder/decoder");
    train_cmd->add_option("--config", train_args.config_path, "Scenario config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    train_cmd
        ->add_option("--train-config", train_args.train_config_path, "Training config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train_args.out_dir, "Output directory")->required();
    train_cmd->add_option("--seed", train_args.seed, "Override training seed");
    train_cmd->add_option("--epochs", train_args.epochs, "Override epoch count")
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_flag("--no-aircomp", train_args.no_aircomp,
                        "Train for orthogonal reporting (receiver averages the K vectors)");
    train_args.overrides.add_flags(train_cmd);

    // eval
    auto* eval = app.add_subcommand("eval", "Monte Carlo evaluation");
    eval->require_subcommand(1);

    EvalArgs roc_args;
    auto* roc_cmd = eval->add_subcommand("roc", "ROC curve for one method");
    roc_args.add_common(roc_cmd, true);
    roc_cmd->add_option("--pfa-grid", roc_args.pfa_grid,
                        "False-alarm targets (local per-sensor rates for -hdf methods)")
        ->delimiter(',');
    roc_cmd->add_flag("--global-pfa", roc_args.global_pfa,
                      "Treat the grid as global targets (inverts the majority vote for -hdf)");

    SweepArgs sweep_args;
    auto* sweep_cmd = eval->add_subcommand("sweep", "P_d at a fixed false-alarm target along an axis");
    sweep_args.add_common(sweep_cmd, true);
    sweep_cmd
        ->add_option("--axis", sweep_args.axis,
                     "snr_sense_db | snr_report_db | n_samples | k_sensors | kc_iota")
        ->required();
    sweep_cmd->add_option("--values", sweep_args.values, "Axis values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--values2", sweep_args.values2, "Second axis values (kc_iota)")
        ->delimiter(',');
    sweep_cmd->add_option("--target-pfa", sweep_args.target_pfa, "False-alarm target")
        ->check(CLI::Range(0.0, 1.0));

    EvalArgs ablation_args;
    auto* ablation_cmd =
        eval->add_subcommand("ablation", "Orthogonal-reporting ablation of a trained model");
    ablation_args.add_common(ablation_cmd, false);
    ablation_cmd->add_option("--checkpoint", ablation_args.checkpoint, "Trained model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    ablation_cmd->add_option("--pfa-grid", ablation_args.pfa_grid, "False-alarm targets")
        ->delimiter(',');

    ConstellationArgs constellation_args;
    auto* constellation_cmd =
        eval->add_subcommand("constellation", "Export transmitted symbols of a trained model");
    constellation_args.add_common(constellation_cmd, false);
    constellation_cmd
        ->add_option("--checkpoint", constellation_args.checkpoint, "Trained model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    constellation_cmd->add_option("--slots", constellation_args.slots, "Slots to export")
        ->check(CLI::PositiveNumber);

    Prop3Args prop3_args;
    auto* prop3_cmd = eval->add_subcommand(
        "verify-prop3", "Rank-agreement check between the simplified model and ED soft fusion");
    prop3_cmd->add_option("--config", prop3_args.config_path, "Scenario config JSON (rho must be 0)")
        ->check(CLI::ExistingFile);
    prop3_cmd->add_option("--out", prop3_args.out_dir, "Output directory (default: stdout)");
    prop3_cmd->add_option("--trials", prop3_args.trials, "Slots to draw")
        ->check(CLI::PositiveNumber);
    prop3_cmd->add_option("--seed", prop3_args.seed, "Master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (hdf_bound->parsed()) return run_theory_hdf_bound(th_snr, th_k, th_p);
        if (ber->parsed()) return run_theory_ber(ber_snr);
        if (train_cmd->parsed()) return run_train(train_args);
        if (roc_cmd->parsed()) return run_eval_roc(roc_args);
        if (sweep_cmd->parsed()) return run_eval_sweep(sweep_args);
        if (ablation_cmd->parsed()) return run_eval_ablation(ablation_args);
        if (constellation_cmd->parsed()) return run_eval_constellation(constellation_args);
        if (prop3_cmd->parsed()) return run_verify_prop3(prop3_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
