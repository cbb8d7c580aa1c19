#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/signal_model.hpp"

namespace ppgnorm {

struct LabelingScheme {
    std::string name;
    std::map<Task, ClassLabel> labels;
    std::set<Task> halved;    // trials split into two instances
    std::set<Task> excluded;  // recognised but unlabeled
};

inline LabelingScheme clas_scheme() {
    return {"clas",
            {{Task::MathProblems, ClassLabel::HighCL},
             {Task::StroopTest, ClassLabel::HighCL},
             {Task::LogicProblems, ClassLabel::HighCL},
             {Task::NeutralState, ClassLabel::LowCL}},
            {Task::MathProblems, Task::StroopTest, Task::LogicProblems},
            {}};
}

inline LabelingScheme clawdas_scheme() {
    return {"clawdas",
            {{Task::MathCalculation, ClassLabel::HighCL}, {Task::AudioListening, ClassLabel::LowCL}},
            {},
            {Task::Reading, Task::Comprehension}};
}

inline LabelingScheme scheme_by_name(const std::string& name) {
    if (name == "clas") return clas_scheme();
    if (name == "clawdas") return clawdas_scheme();
    throw Error(ErrorCode::ConfigError, "unknown labeling scheme '" + name + "'");
}

// [0, L/2) and [L/2, L); odd lengths give the extra sample to the second half.
inline std::pair<Trial, Trial> halve_trial(const Trial& trial) {
    const std::size_t n = trial.recording.size();
    if (n < 2) throw Error(ErrorCode::TooShort, "halve_trial: need at least 2 samples");
    const auto mid = static_cast<std::ptrdiff_t>(n / 2);
    Trial first = trial;
    Trial second = trial;
    const auto& s = trial.recording.samples;
    first.recording.samples.assign(s.begin(), s.begin() + mid);
    second.recording.samples.assign(s.begin() + mid, s.end());
    return {std::move(first), std::move(second)};
}

struct LabeledTrial {
    std::string subject_id;
    Trial trial;   // label always set
    int segment = 0;  // 0 for whole trials, 0/1 for halves
};

inline std::vector<LabeledTrial> build_instances(std::span<const SubjectSession> sessions,
                                                 const LabelingScheme& scheme) {
    std::vector<LabeledTrial> out;
    for (const auto& session : sessions) {
        for (const auto& trial : session.task_trials) {
            if (scheme.excluded.contains(trial.task)) continue;
            const auto it = scheme.labels.find(trial.task);
            if (it == scheme.labels.end()) {
                throw Error(ErrorCode::UnknownTask, "task " + std::string(task_name(trial.task)) +
                                                        " of subject " + session.subject_id +
                                                        " is not part of the " + scheme.name + " scheme");
            }
            Trial labeled = trial;
            labeled.label = it->second;
            if (scheme.halved.contains(trial.task)) {
                auto [a, b] = halve_trial(labeled);
                out.push_back({session.subject_id, std::move(a), 0});
                out.push_back({session.subject_id, std::move(b), 1});
            } else {
                out.push_back({session.subject_id, std::move(labeled), 0});
            }
        }
    }
    return out;
}

}  // namespace ppgnorm
