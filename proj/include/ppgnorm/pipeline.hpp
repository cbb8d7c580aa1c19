#pragma once

// End-to-end orchestration: denoise, normalize, extract features, evaluate.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ppgnorm/config.hpp"
#include "ppgnorm/dataset.hpp"
#include "ppgnorm/evaluate.hpp"
#include "ppgnorm/features.hpp"
#include "ppgnorm/io.hpp"
#include "ppgnorm/normalize.hpp"
#include "ppgnorm/synth.hpp"
#include "ppgnorm/wavelet.hpp"

namespace ppgnorm {

// Re-raises an error with the failing stage named in front of its message.
template <typename Fn>
decltype(auto) in_stage(std::string_view stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        std::string message = e.what();
        const std::string prefix = std::string(to_string(e.code())) + ": ";
        if (message.starts_with(prefix)) message.erase(0, prefix.size());
        throw Error(e.code(), std::string(stage) + ": " + message);
    }
}

namespace detail {

template <typename Fn>
std::vector<SubjectSession> map_sessions(std::span<const SubjectSession> sessions, std::size_t threads, Fn&& fn) {
    std::vector<SubjectSession> out(sessions.size());
    parallel_for(sessions.size(), threads, [&](std::size_t i) { out[i] = fn(sessions[i]); });
    return out;
}

}  // namespace detail

inline std::vector<SubjectSession> denoise_sessions(std::span<const SubjectSession> sessions,
                                                    const WaveletSettings& settings, std::size_t threads = 1) {
    const WaveletSpec spec = settings.spec();
    return in_stage("denoise", [&] {
        return detail::map_sessions(sessions, threads, [&](const SubjectSession& s) {
            SubjectSession out = s;
            for (auto& t : out.baselines) t.recording = denoise(t.recording, spec, settings.rule);
            for (auto& t : out.task_trials) t.recording = denoise(t.recording, spec, settings.rule);
            return out;
        });
    });
}

// Z-scores each amplitude group of a subject (all of its trials, baselines
// included, or those sharing a session tag) as one concatenated signal.
inline SubjectSession amplitude_normalize_session(const SubjectSession& session, AmplitudeGrouping grouping) {
    SubjectSession out = session;
    std::vector<Trial*> all;
    for (auto& t : out.baselines) all.push_back(&t);
    for (auto& t : out.task_trials) all.push_back(&t);

    std::map<std::string, std::vector<Trial*>> groups;
    for (Trial* t : all) groups[grouping == AmplitudeGrouping::Session ? t->session : std::string()].push_back(t);

    for (auto& [key, members] : groups) {
        std::vector<Trial> trials;
        trials.reserve(members.size());
        for (const Trial* t : members) trials.push_back(*t);
        auto normalized = amplitude_normalize(trials);
        for (std::size_t i = 0; i < members.size(); ++i) {
            normalized[i].session = members[i]->session;
            *members[i] = std::move(normalized[i]);
        }
    }
    return out;
}

inline std::vector<SubjectSession> amplitude_normalize_sessions(std::span<const SubjectSession> sessions,
                                                                AmplitudeGrouping grouping, std::size_t threads = 1) {
    return in_stage("normalize", [&] {
        return detail::map_sessions(sessions, threads,
                                    [&](const SubjectSession& s) { return amplitude_normalize_session(s, grouping); });
    });
}

struct FrequencyNormalized {
    std::vector<BaselineProfile> profiles;
    std::vector<SubjectSession> sessions;
};

inline FrequencyNormalized frequency_normalize_sessions(std::span<const SubjectSession> sessions,
                                                        const PipelineConfig& cfg) {
    return in_stage("normalize", [&] {
        std::vector<NormalizedSubject> results(sessions.size());
        parallel_for(sessions.size(), cfg.threads, [&](std::size_t i) {
            results[i] = normalize_subject(sessions[i], cfg.normalize, cfg.peaks, cfg.interpolation);
        });
        FrequencyNormalized out;
        for (auto& r : results) {
            out.profiles.push_back(std::move(r.profile));
            out.sessions.push_back(std::move(r.session));
        }
        return out;
    });
}

// Labeled feature rows of all subjects; SubjFeatN rescales the rate features
// by each subject's baseline means.
inline std::vector<io::FeatureRow> feature_rows(std::span<const SubjectSession> sessions, Strategy strategy,
                                                const PipelineConfig& cfg) {
    return in_stage("features", [&] {
        const LabelingScheme scheme = scheme_by_name(cfg.scheme);
        const auto instances = build_instances(sessions, scheme);

        std::map<std::string, BaselineFeatureStats> stats;
        if (strategy == Strategy::SubjFeatN) {
            std::vector<BaselineFeatureStats> per_subject(sessions.size());
            parallel_for(sessions.size(), cfg.threads, [&](std::size_t i) {
                std::vector<FeatureVector> base;
                for (const auto& b : sessions[i].baselines) base.push_back(extract_features(b.recording, cfg.peaks));
                per_subject[i] = baseline_feature_stats(sessions[i].subject_id, base);
            });
            for (auto& s : per_subject) stats.emplace(s.subject_id, std::move(s));
        }

        std::vector<io::FeatureRow> rows(instances.size());
        parallel_for(instances.size(), cfg.threads, [&](std::size_t i) {
            const auto& inst = instances[i];
            auto fv = extract_features(inst.trial.recording, cfg.peaks);
            if (strategy == Strategy::SubjFeatN) fv = subject_feature_normalize(fv, stats.at(inst.subject_id));
            rows[i] = {inst.subject_id, inst.trial.task, inst.trial.trial_index, inst.segment, *inst.trial.label, fv};
        });
        return rows;
    });
}

inline std::vector<Instance> to_instances(std::span<const io::FeatureRow> rows) {
    std::vector<Instance> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({r.subject_id, r.features.to_vector(), r.label});
    return out;
}

struct StrategyEvaluation {
    std::vector<io::SummaryRow> summary;
    std::vector<io::FoldRow> folds;
};

inline StrategyEvaluation evaluate_feature_rows(std::string_view strategy, std::span<const io::FeatureRow> rows,
                                                const PipelineConfig& cfg) {
    return in_stage("evaluate", [&] {
        const auto instances = to_instances(rows);
        LosoOptions options;
        options.standardize_per_fold = cfg.standardize_per_fold;
        options.threads = cfg.threads;
        StrategyEvaluation out;
        for (const auto kind : cfg.classifiers) {
            const auto report = run_loso(instances, cfg.classifier_spec(kind), options);
            const std::string classifier(classifier_name(kind));
            out.summary.push_back({std::string(strategy), classifier, report.metrics.accuracy, report.metrics.f1_high,
                                   report.metrics.f1_low});
            for (const auto& f : report.folds) {
                out.folds.push_back({std::string(strategy), classifier, f.held_out, f.confusion});
            }
        }
        return out;
    });
}

// Session sets after each normalization stage; PersFreqN also carries profiles.
struct NormalizedCohort {
    std::vector<SubjectSession> amplitude;  // AmpN and SubjFeatN
    std::optional<FrequencyNormalized> frequency;
};

inline NormalizedCohort normalize_cohort(std::span<const SubjectSession> raw, const PipelineConfig& cfg,
                                         bool need_frequency) {
    NormalizedCohort out;
    const auto denoised = denoise_sessions(raw, cfg.wavelet, cfg.threads);
    out.amplitude = amplitude_normalize_sessions(denoised, cfg.grouping, cfg.threads);
    if (need_frequency) out.frequency = frequency_normalize_sessions(out.amplitude, cfg);
    return out;
}

struct PipelineResult {
    std::vector<BaselineProfile> profiles;
    std::vector<std::pair<Strategy, std::vector<io::FeatureRow>>> features;
    std::vector<io::SummaryRow> summary;
    std::vector<io::FoldRow> folds;
};

inline bool uses(const PipelineConfig& cfg, Strategy s) {
    return std::find(cfg.strategies.begin(), cfg.strategies.end(), s) != cfg.strategies.end();
}

inline PipelineResult run_pipeline_on(std::span<const SubjectSession> raw, const PipelineConfig& cfg) {
    cfg.validate();
    const auto cohort = normalize_cohort(raw, cfg, uses(cfg, Strategy::PersFreqN));
    PipelineResult result;
    if (cohort.frequency) result.profiles = cohort.frequency->profiles;
    for (const auto strategy : cfg.strategies) {
        const auto& sessions = strategy == Strategy::PersFreqN ? cohort.frequency->sessions : cohort.amplitude;
        auto rows = feature_rows(sessions, strategy, cfg);
        auto eval = evaluate_feature_rows(strategy_name(strategy), rows, cfg);
        result.summary.insert(result.summary.end(), eval.summary.begin(), eval.summary.end());
        result.folds.insert(result.folds.end(), eval.folds.begin(), eval.folds.end());
        result.features.emplace_back(strategy, std::move(rows));
    }
    return result;
}

inline std::vector<SubjectSession> load_input(const PipelineConfig& cfg) {
    if (cfg.synthetic_input()) return generate_cohort(cfg.synth, cfg.seed).sessions;
    return in_stage("ingest", [&] { return io::ingest(cfg.input); });
}

inline std::string features_file_name(Strategy s) { return "features_" + std::string(strategy_name(s)) + ".csv"; }

inline void write_artifacts(const PipelineResult& result, const std::filesystem::path& dir) {
    if (!result.profiles.empty()) io::write_text(dir / "profiles.csv", io::profiles_to_csv(result.profiles));
    for (const auto& [strategy, rows] : result.features) {
        io::write_text(dir / features_file_name(strategy), io::features_to_csv(rows));
    }
    io::write_text(dir / "folds.csv", io::folds_to_csv(result.folds));
    io::write_text(dir / "summary.csv", io::summary_to_csv(result.summary));
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const auto raw = load_input(cfg);
    auto result = run_pipeline_on(raw, cfg);
    write_artifacts(result, cfg.output_dir);
    return result;
}

}  // namespace ppgnorm
