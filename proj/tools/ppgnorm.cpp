// Command-line front end for the PPG normalization pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppgnorm/config.hpp"
#include "ppgnorm/io.hpp"
#include "ppgnorm/pipeline.hpp"
#include "ppgnorm/synth.hpp"

namespace fs = std::filesystem;
using namespace ppgnorm;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::size_t> threads;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("-c,--config", opts.config_path, "Pipeline config file (defaults apply when omitted)");
    cmd->add_option("-j,--threads", opts.threads, "Worker threads (overrides config)");
    cmd->add_option("--seed", opts.seed, "Random seed (overrides config)");
}

PipelineConfig load_config(const CommonOptions& opts) {
    PipelineConfig cfg;
    if (!opts.config_path.empty()) {
        std::string text;
        try {
            text = io::read_text(opts.config_path);
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, std::string("cannot read config ") + opts.config_path);
        }
        cfg = parse_config(text, opts.config_path);
    }
    if (opts.threads) {
        if (*opts.threads == 0) throw Error(ErrorCode::ConfigError, "--threads must be >= 1");
        cfg.threads = *opts.threads;
    }
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.validate();
    return cfg;
}

Strategy strategy_arg(const std::string& name) {
    const auto s = parse_strategy(name);
    if (!s) throw Error(ErrorCode::ConfigError, "unknown strategy '" + name + "'");
    return *s;
}

void print_summary(std::span<const io::SummaryRow> rows) { std::cout << io::render_summary_table(rows); }

void write_evaluation(const fs::path& out, std::span<const io::SummaryRow> summary,
                      std::span<const io::FoldRow> folds) {
    io::write_text(out / "folds.csv", io::folds_to_csv(folds));
    io::write_text(out / "summary.csv", io::summary_to_csv(summary));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized PPG normalization pipeline"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string manifest;
    std::string out;
    std::string strategy = "AmpN";

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort (recordings, manifest, ground truth)");
    add_common(synth, common);
    synth->add_option("-o,--out", out, "Output directory")->required();

    auto* denoise_cmd = app.add_subcommand("denoise", "Wavelet-denoise every recording of a manifest");
    add_common(denoise_cmd, common);
    denoise_cmd->add_option("-m,--manifest", manifest, "Input manifest")->required();
    denoise_cmd->add_option("-o,--out", out, "Output directory")->required();

    auto* normalize_cmd = app.add_subcommand("normalize", "Amplitude-normalize, and for PersFreqN resample, a manifest");
    add_common(normalize_cmd, common);
    normalize_cmd->add_option("-m,--manifest", manifest, "Denoised manifest")->required();
    normalize_cmd->add_option("-s,--strategy", strategy, "AmpN, SubjFeatN or PersFreqN");
    normalize_cmd->add_option("-o,--out", out, "Output directory")->required();

    auto* features_cmd = app.add_subcommand("features", "Extract labeled feature rows from a normalized manifest");
    add_common(features_cmd, common);
    features_cmd->add_option("-m,--manifest", manifest, "Normalized manifest")->required();
    features_cmd->add_option("-s,--strategy", strategy, "AmpN, SubjFeatN or PersFreqN");
    features_cmd->add_option("-o,--out", out, "Output features CSV")->required();

    std::vector<std::string> feature_specs;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "LOSO evaluation of a raw manifest or feature files");
    add_common(evaluate_cmd, common);
    auto* manifest_opt = evaluate_cmd->add_option("-m,--manifest", manifest, "Raw manifest; runs every stage");
    auto* features_opt =
        evaluate_cmd->add_option("-f,--features", feature_specs, "STRATEGY=FILE feature tables")->delimiter(',');
    manifest_opt->excludes(features_opt);
    evaluate_cmd->add_option("-o,--out", out, "Output directory")->required();

    std::string summary_path;
    std::string long_path;
    auto* report_cmd = app.add_subcommand("report", "Render a summary CSV as a table and a long-format CSV");
    report_cmd->add_option("summary", summary_path, "Summary CSV")->required();
    report_cmd->add_option("--long", long_path, "Write plot-ready long CSV here");

    auto* run_cmd = app.add_subcommand("run", "Run the whole pipeline as configured");
    add_common(run_cmd, common);
    run_cmd->add_option("-o,--out", out, "Output directory (overrides config)");

    auto* config_cmd = app.add_subcommand("config", "Print the default configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (config_cmd->parsed()) {
            std::cout << default_config_text();
        } else if (synth->parsed()) {
            const auto cfg = load_config(common);
            const auto cohort = generate_cohort(cfg.synth, cfg.seed);
            const auto manifest_path = io::write_sessions(out, cohort.sessions);
            io::write_text(fs::path(out) / "ground_truth.csv", io::ground_truth_to_csv(cohort.truth));
            std::cout << manifest_path.string() << '\n';
        } else if (denoise_cmd->parsed()) {
            const auto cfg = load_config(common);
            const auto sessions = in_stage("ingest", [&] { return io::ingest(manifest); });
            std::cout << io::write_sessions(out, denoise_sessions(sessions, cfg.wavelet, cfg.threads)).string() << '\n';
        } else if (normalize_cmd->parsed()) {
            const auto cfg = load_config(common);
            const Strategy s = strategy_arg(strategy);
            const auto sessions = in_stage("ingest", [&] { return io::ingest(manifest); });
            auto amplitude = amplitude_normalize_sessions(sessions, cfg.grouping, cfg.threads);
            if (s == Strategy::PersFreqN) {
                const auto freq = frequency_normalize_sessions(amplitude, cfg);
                io::write_text(fs::path(out) / "profiles.csv", io::profiles_to_csv(freq.profiles));
                amplitude = freq.sessions;
            }
            std::cout << io::write_sessions(out, amplitude).string() << '\n';
        } else if (features_cmd->parsed()) {
            const auto cfg = load_config(common);
            const auto sessions = in_stage("ingest", [&] { return io::ingest(manifest); });
            io::write_text(out, io::features_to_csv(feature_rows(sessions, strategy_arg(strategy), cfg)));
        } else if (evaluate_cmd->parsed()) {
            auto cfg = load_config(common);
            if (!manifest.empty()) {
                cfg.input = manifest;
                cfg.output_dir = out;
                print_summary(run_pipeline(cfg).summary);
            } else {
                if (feature_specs.empty()) {
                    throw Error(ErrorCode::ConfigError, "evaluate needs --manifest or --features");
                }
                std::vector<io::SummaryRow> summary;
                std::vector<io::FoldRow> folds;
                // Strategies follow the configured order; unknown names are rejected.
                std::map<std::string, std::string> feature_files;
                for (const auto& spec : feature_specs) {
                    const auto eq = spec.find('=');
                    if (eq == std::string::npos) {
                        throw Error(ErrorCode::ConfigError, "--features expects STRATEGY=FILE, got '" + spec + "'");
                    }
                    const std::string name = spec.substr(0, eq);
                    (void)strategy_arg(name);
                    feature_files[name] = spec.substr(eq + 1);
                }
                for (const auto s : cfg.strategies) {
                    const auto it = feature_files.find(std::string(strategy_name(s)));
                    if (it == feature_files.end()) continue;
                    const auto rows = in_stage("ingest", [&] { return io::parse_features_csv(io::read_text(it->second), it->second); });
                    auto eval = evaluate_feature_rows(strategy_name(s), rows, cfg);
                    summary.insert(summary.end(), eval.summary.begin(), eval.summary.end());
                    folds.insert(folds.end(), eval.folds.begin(), eval.folds.end());
                }
                if (summary.empty()) throw Error(ErrorCode::ConfigError, "no feature file matches a configured strategy");
                write_evaluation(out, summary, folds);
                print_summary(summary);
            }
        } else if (report_cmd->parsed()) {
            const auto rows = io::parse_summary_csv(io::read_text(summary_path), summary_path);
            print_summary(rows);
            if (!long_path.empty()) io::write_text(long_path, io::summary_long_csv(rows));
        } else if (run_cmd->parsed()) {
            auto cfg = load_config(common);
            if (!out.empty()) cfg.output_dir = out;
            print_summary(run_pipeline(cfg).summary);
        }
    } catch (const Error& e) {
        std::cerr << "error category=" << to_string(e.category()) << " code=" << to_string(e.code())
                  << " message=\"" << e.what() << "\"\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error category=data code=IoError message=\"" << e.what() << "\"\n";
        return 3;
    }
    return 0;
}
