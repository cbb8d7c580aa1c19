#include <gtest/gtest.h>

#include <cmath>

#include "ppgnorm/pipeline.hpp"

using namespace ppgnorm;

namespace {

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.synth.n_subjects = 6;
    cfg.synth.trials_per_class = 3;
    cfg.synth.baseline_duration_s = 40.0;
    cfg.synth.trial_duration_s = 30.0;
    return cfg;
}

long long total_instances(const std::vector<io::FoldRow>& folds, const std::string& strategy,
                          const std::string& classifier) {
    long long n = 0;
    for (const auto& f : folds) {
        if (f.strategy == strategy && f.classifier == classifier) n += f.confusion.total();
    }
    return n;
}

}  // namespace

TEST(Pipeline, TwelveSummaryRowsInConfiguredOrder) {
    const auto cfg = small_config();
    const auto raw = generate_cohort(cfg.synth, cfg.seed).sessions;
    const auto result = run_pipeline_on(raw, cfg);
    ASSERT_EQ(result.summary.size(), 12u);
    EXPECT_EQ(result.summary[0].strategy, "AmpN");
    EXPECT_EQ(result.summary[0].classifier, "SvmLinear");
    EXPECT_EQ(result.summary[11].strategy, "PersFreqN");
    EXPECT_EQ(result.summary[11].classifier, "Cart");
    EXPECT_EQ(result.profiles.size(), 6u);
    for (const auto& row : result.summary) {
        EXPECT_GE(row.accuracy, 0.0);
        EXPECT_LE(row.accuracy, 1.0);
        EXPECT_EQ(total_instances(result.folds, row.strategy, row.classifier), 36);
    }
}

TEST(Pipeline, ThreadCountDoesNotChangeOutput) {
    auto cfg = small_config();
    const auto raw = generate_cohort(cfg.synth, cfg.seed).sessions;
    const auto one = run_pipeline_on(raw, cfg);
    cfg.threads = 4;
    const auto many = run_pipeline_on(raw, cfg);
    EXPECT_EQ(io::summary_to_csv(one.summary), io::summary_to_csv(many.summary));
    EXPECT_EQ(io::folds_to_csv(one.folds), io::folds_to_csv(many.folds));
    ASSERT_EQ(one.features.size(), many.features.size());
    for (std::size_t s = 0; s < one.features.size(); ++s) {
        EXPECT_EQ(io::features_to_csv(one.features[s].second), io::features_to_csv(many.features[s].second));
    }
}

TEST(Pipeline, AmplitudeGroupsAreStandardizedJointly) {
    auto cfg = small_config();
    cfg.synth.n_subjects = 2;
    auto raw = generate_cohort(cfg.synth, 3).sessions;
    auto& s = raw[0];
    for (std::size_t k = 0; k < s.task_trials.size(); ++k) s.task_trials[k].session = k < 3 ? "am" : "pm";
    s.baselines[0].session = "am";

    const auto out = amplitude_normalize_session(s, AmplitudeGrouping::Session);
    ASSERT_EQ(out.task_trials.size(), s.task_trials.size());
    for (const std::string tag : {"am", "pm"}) {
        std::vector<double> joined;
        auto take = [&](const Trial& t) {
            if (t.session == tag) joined.insert(joined.end(), t.recording.samples.begin(), t.recording.samples.end());
        };
        for (const auto& t : out.baselines) take(t);
        for (const auto& t : out.task_trials) take(t);
        double m = 0, v = 0;
        for (double x : joined) m += x;
        m /= static_cast<double>(joined.size());
        for (double x : joined) v += (x - m) * (x - m);
        EXPECT_NEAR(m, 0.0, 1e-10) << tag;
        EXPECT_NEAR(std::sqrt(v / static_cast<double>(joined.size())), 1.0, 1e-10) << tag;
    }
    for (std::size_t k = 0; k < s.task_trials.size(); ++k) {
        EXPECT_EQ(out.task_trials[k].session, s.task_trials[k].session);
        EXPECT_EQ(out.task_trials[k].recording.size(), s.task_trials[k].recording.size());
        EXPECT_EQ(out.task_trials[k].trial_index, s.task_trials[k].trial_index);
    }

    // Subject grouping ignores the tags: one group, so each trial is an affine image
    // of its input with the same slope.
    const auto whole = amplitude_normalize_session(s, AmplitudeGrouping::Subject);
    const auto& a = s.task_trials[0].recording.samples;
    const auto& b = s.task_trials[5].recording.samples;
    const auto& za = whole.task_trials[0].recording.samples;
    const auto& zb = whole.task_trials[5].recording.samples;
    const double slope_a = (za[10] - za[0]) / (a[10] - a[0]);
    const double slope_b = (zb[10] - zb[0]) / (b[10] - b[0]);
    EXPECT_NEAR(slope_a, slope_b, 1e-9 * std::fabs(slope_a));
}

TEST(Pipeline, ClasSchemeHalvesHighLoadTrials) {
    auto cfg = small_config();
    cfg.scheme = "clas";
    cfg.classifiers = {ClassifierKind::Cart};
    const auto raw = generate_cohort(cfg.synth, cfg.seed, Task::MathProblems, Task::NeutralState).sessions;
    const auto result = run_pipeline_on(raw, cfg);
    ASSERT_EQ(result.summary.size(), 3u);
    for (const auto& [strategy, rows] : result.features) {
        // 3 halved high-load trials and 3 whole neutral trials per subject.
        EXPECT_EQ(rows.size(), 6u * 9u);
        std::size_t halves = 0;
        for (const auto& r : rows) halves += r.segment == 1;
        EXPECT_EQ(halves, 18u);
    }
}

TEST(Pipeline, StageNameIsPrefixedToErrors) {
    auto cfg = small_config();
    const auto raw = generate_cohort(cfg.synth, cfg.seed).sessions;
    auto broken = raw;
    broken[0].task_trials[0].recording.samples.assign(broken[0].task_trials[0].recording.size(), 1.0);
    broken[0].baselines[0].recording.samples.assign(broken[0].baselines[0].recording.size(), 1.0);
    for (auto& t : broken[0].task_trials) t.recording.samples.assign(t.recording.size(), 1.0);
    try {
        (void)amplitude_normalize_sessions(broken, AmplitudeGrouping::Session);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConstantSignal);
        EXPECT_NE(std::string(e.what()).find("normalize: "), std::string::npos) << e.what();
    }
}

TEST(Pipeline, SyntheticRunWritesArtifacts) {
    auto cfg = small_config();
    cfg.output_dir = (std::filesystem::temp_directory_path() / "ppgnorm_test_pipeline").string();
    std::filesystem::remove_all(cfg.output_dir);
    const auto result = run_pipeline(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    for (const char* f : {"summary.csv", "folds.csv", "profiles.csv", "features_AmpN.csv", "features_SubjFeatN.csv",
                          "features_PersFreqN.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    const auto back = io::parse_summary_csv(io::read_text(dir / "summary.csv"), "summary.csv");
    ASSERT_EQ(back.size(), result.summary.size());
    EXPECT_NEAR(back[3].accuracy, result.summary[3].accuracy, 5e-7);
    const auto rows = io::parse_features_csv(io::read_text(dir / "features_AmpN.csv"), "features");
    EXPECT_EQ(rows.size(), result.features[0].second.size());
    std::filesystem::remove_all(dir);
}
