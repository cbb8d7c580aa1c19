#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ppgnorm/dataset.hpp"
#include "ppgnorm/evaluate.hpp"
#include "ppgnorm/peaks.hpp"
#include "ppgnorm/synth.hpp"

using namespace ppgnorm;

namespace {

std::vector<Instance> grid_instances(int subjects, int per_subject) {
    std::vector<Instance> out;
    for (int s = 0; s < subjects; ++s) {
        for (int k = 0; k < per_subject; ++k) {
            out.push_back({synthetic_subject_id(s), {static_cast<double>(k)},
                           k % 2 ? ClassLabel::LowCL : ClassLabel::HighCL});
        }
    }
    return out;
}

std::vector<Instance> blob_instances(int subjects, int per_subject, double separation, std::uint64_t seed,
                                     bool shuffle_labels = false) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Instance> out;
    for (int s = 0; s < subjects; ++s) {
        for (int k = 0; k < per_subject; ++k) {
            const ClassLabel label = k % 2 ? ClassLabel::LowCL : ClassLabel::HighCL;
            const double c = separation * label_sign(label);
            out.push_back({synthetic_subject_id(s), {c + n(gen), 0.5 * c + n(gen), n(gen)}, label});
        }
    }
    if (shuffle_labels) {
        std::vector<std::optional<ClassLabel>> labels;
        for (const auto& i : out) labels.push_back(i.label);
        std::shuffle(labels.begin(), labels.end(), gen);
        for (std::size_t i = 0; i < out.size(); ++i) out[i].label = labels[i];
    }
    return out;
}

ClassifierSpec spec_of(ClassifierKind kind) {
    ClassifierSpec s;
    s.kind = kind;
    return s;
}

Trial trial_of(Task task, std::size_t n, int index) {
    Trial t;
    t.task = task;
    t.trial_index = index;
    t.recording.samples.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) t.recording.samples[i] = static_cast<double>(i);
    t.recording.spec = {128.0, Domain::DiscreteTime};
    t.recording.subject_id = "S01";
    return t;
}

}  // namespace

TEST(LosoPlan, OneFoldPerSubjectPartitioningInstances) {
    const auto inst = grid_instances(3, 4);
    const auto plan = build_loso_plan(inst);
    ASSERT_EQ(plan.folds.size(), 3u);
    for (const auto& f : plan.folds) {
        EXPECT_EQ(f.test.size(), 4u);
        EXPECT_EQ(f.train.size(), 8u);
        for (auto i : f.test) EXPECT_EQ(inst[i].subject_id, f.held_out);
        for (auto i : f.train) EXPECT_NE(inst[i].subject_id, f.held_out);
    }
    EXPECT_EQ(plan.folds[0].held_out, "S01");

    const auto big = build_loso_plan(grid_instances(16, 12));
    EXPECT_EQ(big.folds.size(), 16u);
    std::size_t tested = 0;
    for (const auto& f : big.folds) tested += f.test.size();
    EXPECT_EQ(tested, 192u);
}

TEST(LosoPlan, Errors) {
    auto code_of = [](std::vector<Instance> inst) {
        try {
            build_loso_plan(inst);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;
    };
    EXPECT_EQ(code_of(grid_instances(1, 4)), ErrorCode::SingleSubject);
    auto inst = grid_instances(2, 2);
    inst[1].label.reset();
    EXPECT_EQ(code_of(inst), ErrorCode::UnlabeledInstance);
    EXPECT_EQ(build_loso_plan(grid_instances(2, 3)).folds.size(), 2u);
}

TEST(Metrics, WorkedExample) {
    const auto m = metrics_from_confusion({80, 10, 20, 90});
    EXPECT_DOUBLE_EQ(m.accuracy, 0.85);
    EXPECT_NEAR(m.f1_high, 160.0 / 190.0, 1e-15);
    EXPECT_NEAR(m.f1_high, 0.8421, 5e-5);
    EXPECT_NEAR(m.f1_low, 180.0 / 210.0, 1e-15);
    EXPECT_NEAR(m.f1_low, 0.8571, 5e-5);
    EXPECT_FALSE(m.f1_high_degenerate);
}

TEST(Metrics, DegenerateF1IsFlagged) {
    const auto m = metrics_from_confusion({0, 0, 0, 5});
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_TRUE(m.f1_high_degenerate);
    EXPECT_EQ(m.f1_high, 0.0);
    EXPECT_EQ(m.f1_low, 1.0);
    try {
        metrics_from_confusion({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyMatrix);
    }
}

TEST(Loso, SeparableCohortScoresPerfectly) {
    const auto inst = blob_instances(5, 12, 20.0, 3);
    for (const auto& [kind, name] : kClassifierNames) {
        const auto r = run_loso(inst, spec_of(kind));
        EXPECT_EQ(r.metrics.accuracy, 1.0) << name;
        EXPECT_EQ(r.confusion.total(), 60);
    }
}

TEST(Loso, ShuffledLabelsNearChance) {
    const auto inst = blob_instances(20, 12, 1.0, 9, true);
    for (const auto& [kind, name] : kClassifierNames) {
        const auto r = run_loso(inst, spec_of(kind));
        EXPECT_EQ(r.confusion.total(), 240);
        EXPECT_GE(r.metrics.accuracy, 0.35) << name;
        EXPECT_LE(r.metrics.accuracy, 0.65) << name;
    }
}

TEST(Loso, FoldConfusionsSumToTotal) {
    const auto inst = blob_instances(6, 10, 1.0, 4);
    const auto r = run_loso(inst, spec_of(ClassifierKind::SvmGaussian));
    ConfusionMatrix sum;
    for (const auto& f : r.folds) sum += f.confusion;
    EXPECT_EQ(sum, r.confusion);
    EXPECT_EQ(r.folds.size(), 6u);
}

TEST(Loso, InstanceOrderDoesNotMatterForCart) {
    auto inst = blob_instances(6, 10, 1.0, 12);
    const auto a = run_loso(inst, spec_of(ClassifierKind::Cart));
    std::mt19937_64 gen(1);
    std::shuffle(inst.begin(), inst.end(), gen);
    const auto b = run_loso(inst, spec_of(ClassifierKind::Cart));
    EXPECT_EQ(a.confusion, b.confusion);
}

TEST(Loso, ThreadCountDoesNotChangeResults) {
    const auto inst = blob_instances(8, 10, 0.7, 21);
    for (const auto& [kind, name] : kClassifierNames) {
        LosoOptions one, many;
        many.threads = 4;
        EXPECT_EQ(run_loso(inst, spec_of(kind), one).confusion, run_loso(inst, spec_of(kind), many).confusion)
            << name;
    }
}

TEST(Dataset, HalvingSplitsAtMidpoint) {
    auto [a, b] = halve_trial(trial_of(Task::MathProblems, 10, 0));
    EXPECT_EQ(a.recording.size(), 5u);
    EXPECT_EQ(b.recording.size(), 5u);
    EXPECT_EQ(b.recording.samples.front(), 5.0);
    auto [c, d] = halve_trial(trial_of(Task::MathProblems, 11, 0));
    EXPECT_EQ(c.recording.size(), 5u);
    EXPECT_EQ(d.recording.size(), 6u);
    std::vector<double> joined = c.recording.samples;
    joined.insert(joined.end(), d.recording.samples.begin(), d.recording.samples.end());
    EXPECT_EQ(joined, trial_of(Task::MathProblems, 11, 0).recording.samples);
}

TEST(Dataset, ClasCountsAreBalanced) {
    std::vector<SubjectSession> sessions;
    for (int s = 0; s < 60; ++s) {
        SubjectSession sess;
        sess.subject_id = synthetic_subject_id(s);
        int idx = 0;
        for (auto task : {Task::MathProblems, Task::StroopTest, Task::LogicProblems}) {
            sess.task_trials.push_back(trial_of(task, 20, idx++));
        }
        for (int k = 0; k < 6; ++k) sess.task_trials.push_back(trial_of(Task::NeutralState, 20, idx++));
        sessions.push_back(std::move(sess));
    }
    const auto inst = build_instances(sessions, clas_scheme());
    const auto high = std::count_if(inst.begin(), inst.end(),
                                    [](const LabeledTrial& t) { return t.trial.label == ClassLabel::HighCL; });
    EXPECT_EQ(high, 360);
    EXPECT_EQ(static_cast<long>(inst.size()) - high, 360);
}

TEST(Dataset, ClawdasSkipsExcludedTasks) {
    std::vector<SubjectSession> sessions;
    for (int s = 0; s < 20; ++s) {
        SubjectSession sess;
        sess.subject_id = synthetic_subject_id(s);
        int idx = 0;
        for (auto task : {Task::MathCalculation, Task::AudioListening, Task::Reading, Task::Comprehension}) {
            for (int k = 0; k < 6; ++k) sess.task_trials.push_back(trial_of(task, 20, idx++));
        }
        sessions.push_back(std::move(sess));
    }
    const auto inst = build_instances(sessions, clawdas_scheme());
    ASSERT_EQ(inst.size(), 240u);
    const auto high = std::count_if(inst.begin(), inst.end(),
                                    [](const LabeledTrial& t) { return t.trial.label == ClassLabel::HighCL; });
    EXPECT_EQ(high, 120);
    for (const auto& t : inst) EXPECT_EQ(t.trial.recording.size(), 20u);
}

TEST(Dataset, EmptyAndUnknownTasks) {
    EXPECT_TRUE(build_instances(std::vector<SubjectSession>{}, clawdas_scheme()).empty());
    SubjectSession sess;
    sess.subject_id = "S01";
    sess.task_trials.push_back(trial_of(Task::StroopTest, 10, 0));
    const std::vector<SubjectSession> sessions{sess};
    try {
        build_instances(sessions, clawdas_scheme());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownTask);
    }
    try {
        scheme_by_name("other");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
}

TEST(Synth, NoJitterGivesExactPeriod) {
    const auto t = generate_beat_train(60.0, 30.0, 128.0, 0.0, 4);
    ASSERT_GE(t.crests.size(), 28u);
    for (std::size_t k = 1; k < t.crests.size(); ++k) EXPECT_EQ(t.crests[k] - t.crests[k - 1], 128u);
    EXPECT_EQ(t.samples.size(), 3840u);
}

TEST(Synth, JitterCoefficientOfVariation) {
    const auto t = generate_beat_train(75.0, 1200.0, 128.0, 0.03, 8);
    std::vector<double> ibi;
    for (std::size_t k = 1; k < t.crests.size(); ++k) {
        ibi.push_back(static_cast<double>(t.crests[k] - t.crests[k - 1]));
    }
    double m = 0, v = 0;
    for (double x : ibi) m += x;
    m /= static_cast<double>(ibi.size());
    for (double x : ibi) v += (x - m) * (x - m);
    const double cv = std::sqrt(v / static_cast<double>(ibi.size())) / m;
    EXPECT_GE(cv, 0.02);
    EXPECT_LE(cv, 0.04);
}

TEST(Synth, CohortShapeAndDeterminism) {
    const SynthConfig cfg;
    const auto a = generate_cohort(cfg, 42);
    const auto b = generate_cohort(cfg, 42);
    ASSERT_EQ(a.sessions.size(), 20u);
    std::size_t trials = 0;
    for (std::size_t s = 0; s < a.sessions.size(); ++s) {
        trials += a.sessions[s].task_trials.size();
        EXPECT_EQ(a.sessions[s].baselines.size(), 1u);
        for (std::size_t k = 0; k < a.sessions[s].task_trials.size(); ++k) {
            EXPECT_EQ(a.sessions[s].task_trials[k].recording.samples, b.sessions[s].task_trials[k].recording.samples);
        }
    }
    EXPECT_EQ(trials, 240u);
    const auto c = generate_cohort(cfg, 43);
    EXPECT_NE(a.sessions[0].baselines[0].recording.samples, c.sessions[0].baselines[0].recording.samples);
}

TEST(Synth, GainScalesSamplesLinearly) {
    SynthConfig one;
    one.n_subjects = 2;
    one.trials_per_class = 1;
    one.gain_min = one.gain_max = 1.0;
    SynthConfig two = one;
    two.gain_min = two.gain_max = 2.0;
    const auto a = generate_cohort(one, 5);
    const auto b = generate_cohort(two, 5);
    const auto& x = a.sessions[1].task_trials[0].recording.samples;
    const auto& y = b.sessions[1].task_trials[0].recording.samples;
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], 2.0 * x[i], 1e-12 * std::fabs(x[i]) + 1e-15);
}

TEST(Synth, DetectorRecoversNoiseFreeCrests) {
    SynthConfig cfg;
    cfg.n_subjects = 4;
    cfg.noise_sigma_fraction = 0.0;
    const auto cohort = generate_cohort(cfg, 17);
    std::size_t hits = 0, detected = 0, truth = 0;
    std::size_t row = 0;
    for (const auto& s : cohort.sessions) {
        std::vector<const Trial*> trials;
        for (const auto& t : s.baselines) trials.push_back(&t);
        for (const auto& t : s.task_trials) trials.push_back(&t);
        for (const auto* t : trials) {
            const auto& crests = cohort.truth[row++].crests;
            const auto peaks = detect_peaks(t->recording, {});
            detected += peaks.size();
            truth += crests.size();
            for (auto p : peaks) {
                hits += std::any_of(crests.begin(), crests.end(), [&](std::size_t c) {
                    return (p > c ? p - c : c - p) <= 2;
                });
            }
        }
    }
    EXPECT_GE(static_cast<double>(hits) / static_cast<double>(detected), 0.98);
    EXPECT_GE(static_cast<double>(hits) / static_cast<double>(truth), 0.98);
}

TEST(Synth, LoadShortensInterBeatIntervals) {
    SynthConfig cfg;
    cfg.n_subjects = 3;
    cfg.trial_rate_sd = 0.0;
    const auto cohort = generate_cohort(cfg, 23);
    for (const auto& s : cohort.sessions) {
        double high = 0, low = 0;
        int nh = 0, nl = 0;
        for (const auto& t : s.task_trials) {
            const auto p = detect_peaks(t.recording, {});
            const double ibi = static_cast<double>(p.back() - p.front()) / static_cast<double>(p.size() - 1);
            if (t.task == Task::MathCalculation) {
                high += ibi;
                ++nh;
            } else {
                low += ibi;
                ++nl;
            }
        }
        EXPECT_NEAR((high / nh) / (low / nl), 1.0 / 1.15, 0.02) << s.subject_id;
    }
}
