#pragma once

// Leave-one-subject-out cross-validation with a joined confusion matrix.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppgnorm/classifier.hpp"
#include "ppgnorm/error.hpp"
#include "ppgnorm/features.hpp"
#include "ppgnorm/signal_model.hpp"
#include "ppgnorm/util.hpp"

namespace ppgnorm {

struct Instance {
    std::string subject_id;
    std::vector<double> features;
    std::optional<ClassLabel> label;
};

struct Fold {
    std::string held_out;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
};

// HighCL is the positive class.
struct ConfusionMatrix {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    long long total() const noexcept { return tp + fp + fn + tn; }

    void add(ClassLabel truth, ClassLabel predicted) {
        const bool t = truth == ClassLabel::HighCL;
        const bool p = predicted == ClassLabel::HighCL;
        if (t && p) ++tp;
        else if (!t && p) ++fp;
        else if (t && !p) ++fn;
        else ++tn;
    }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
    double accuracy = 0.0;
    double f1_high = 0.0;
    double f1_low = 0.0;
    bool f1_high_degenerate = false;
    bool f1_low_degenerate = false;
};

// F1 is 0 and flagged degenerate when its denominator is 0.
inline Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
    const long long total = cm.total();
    if (total <= 0) throw Error(ErrorCode::EmptyMatrix, "metrics_from_confusion: empty matrix");
    Metrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
    const long long high_den = 2 * cm.tp + cm.fp + cm.fn;
    const long long low_den = 2 * cm.tn + cm.fn + cm.fp;
    m.f1_high_degenerate = high_den == 0;
    m.f1_low_degenerate = low_den == 0;
    m.f1_high = high_den == 0 ? 0.0 : 2.0 * static_cast<double>(cm.tp) / static_cast<double>(high_den);
    m.f1_low = low_den == 0 ? 0.0 : 2.0 * static_cast<double>(cm.tn) / static_cast<double>(low_den);
    return m;
}

// One fold per subject, ordered by subject_id.
inline FoldPlan build_loso_plan(std::span<const Instance> instances) {
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (!instances[i].label) {
            throw Error(ErrorCode::UnlabeledInstance, "instance " + std::to_string(i) + " of subject " +
                                                          instances[i].subject_id + " has no label");
        }
        by_subject[instances[i].subject_id].push_back(i);
    }
    if (by_subject.size() < 2) {
        throw Error(ErrorCode::SingleSubject, "LOSO needs at least 2 subjects, got " +
                                                  std::to_string(by_subject.size()));
    }
    FoldPlan plan;
    for (const auto& [subject, test] : by_subject) {
        Fold fold;
        fold.held_out = subject;
        fold.test = test;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            if (instances[i].subject_id != subject) fold.train.push_back(i);
        }
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

struct FoldResult {
    std::string held_out;
    ConfusionMatrix confusion;
};

struct EvaluationReport {
    ConfusionMatrix confusion;
    Metrics metrics;
    std::vector<FoldResult> folds;
};

struct LosoOptions {
    // false fits one standardization on all instances (leaks the held-out
    // subject; kept only for sensitivity checks).
    bool standardize_per_fold = true;
    bool standardize = true;
    std::size_t threads = 1;
};

inline EvaluationReport run_loso(std::span<const Instance> instances, const ClassifierSpec& spec,
                                 const LosoOptions& options = {}) {
    const FoldPlan plan = build_loso_plan(instances);

    std::optional<StandardizationParams> global;
    if (options.standardize && !options.standardize_per_fold) {
        std::vector<std::vector<double>> all;
        all.reserve(instances.size());
        for (const auto& inst : instances) all.push_back(inst.features);
        global = fit_standardization(all);
    }

    std::vector<FoldResult> results(plan.folds.size());
    parallel_for(plan.folds.size(), options.threads, [&](std::size_t f) {
        const Fold& fold = plan.folds[f];
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        x.reserve(fold.train.size());
        y.reserve(fold.train.size());
        for (auto i : fold.train) {
            x.push_back(instances[i].features);
            y.push_back(label_sign(*instances[i].label));
        }
        std::optional<StandardizationParams> params = global;
        if (options.standardize && options.standardize_per_fold) params = fit_standardization(x);
        if (params) {
            for (auto& row : x) row = apply_standardization(row, *params);
        }
        const Model model = train_model(spec, x, y);

        FoldResult result{fold.held_out, {}};
        for (auto i : fold.test) {
            const auto row = params ? apply_standardization(instances[i].features, *params)
                                    : instances[i].features;
            const int predicted = predict_model(model, row);
            result.confusion.add(*instances[i].label, predicted > 0 ? ClassLabel::HighCL : ClassLabel::LowCL);
        }
        results[f] = std::move(result);
    });

    EvaluationReport report;
    for (const auto& r : results) report.confusion += r.confusion;
    report.metrics = metrics_from_confusion(report.confusion);
    report.folds = std::move(results);
    return report;
}

}  // namespace ppgnorm
