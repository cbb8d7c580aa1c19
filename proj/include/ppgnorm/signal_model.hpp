#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppgnorm/error.hpp"

namespace ppgnorm {

enum class Domain { DiscreteTime, SubjectNormalized };

// For SubjectNormalized recordings sample_rate is the nominal SN rate
// (f_c * f_SNc SNsamples per second). It only converts peak-separation
// settings from seconds to samples; feature math never reads it.
struct SamplingSpec {
    double sample_rate = 0.0;
    Domain domain = Domain::DiscreteTime;

    friend bool operator==(const SamplingSpec&, const SamplingSpec&) = default;
};

struct Recording {
    std::vector<double> samples;
    SamplingSpec spec;
    std::string subject_id;
    std::string channel_label = "ppg";

    std::size_t size() const noexcept { return samples.size(); }
};

enum class Task {
    Baseline,
    MathProblems,
    StroopTest,
    LogicProblems,
    NeutralState,
    MathCalculation,
    AudioListening,
    Reading,
    Comprehension,
};

inline constexpr std::array<std::pair<Task, std::string_view>, 9> kTaskNames{{
    {Task::Baseline, "Baseline"},
    {Task::MathProblems, "MathProblems"},
    {Task::StroopTest, "StroopTest"},
    {Task::LogicProblems, "LogicProblems"},
    {Task::NeutralState, "NeutralState"},
    {Task::MathCalculation, "MathCalculation"},
    {Task::AudioListening, "AudioListening"},
    {Task::Reading, "Reading"},
    {Task::Comprehension, "Comprehension"},
}};

constexpr std::string_view task_name(Task task) {
    for (const auto& [t, name] : kTaskNames) {
        if (t == task) return name;
    }
    return "Unknown";
}

inline std::optional<Task> parse_task(std::string_view name) {
    for (const auto& [t, n] : kTaskNames) {
        if (n == name) return t;
    }
    return std::nullopt;
}

enum class ClassLabel { HighCL, LowCL };

constexpr std::string_view label_name(ClassLabel label) {
    return label == ClassLabel::HighCL ? "HighCL" : "LowCL";
}

inline std::optional<ClassLabel> parse_label(std::string_view name) {
    if (name == "HighCL") return ClassLabel::HighCL;
    if (name == "LowCL") return ClassLabel::LowCL;
    return std::nullopt;
}

// HighCL is the positive class everywhere (+1), LowCL is -1.
constexpr int label_sign(ClassLabel label) { return label == ClassLabel::HighCL ? 1 : -1; }

struct Trial {
    Recording recording;
    Task task = Task::Baseline;
    std::optional<ClassLabel> label;
    int trial_index = 0;
    // Acquisition group; trials of one subject sharing it are amplitude
    // normalized together.
    std::string session;
};

struct SubjectSession {
    std::string subject_id;
    std::vector<Trial> baselines;
    std::vector<Trial> task_trials;
};

// Half-open [start, end) span of a concatenated recording, plus what is
// needed to rebuild the trial it came from.
struct SegmentMarker {
    int trial_index = 0;
    std::size_t start = 0;
    std::size_t end = 0;
    Task task = Task::Baseline;
    std::optional<ClassLabel> label;

    friend bool operator==(const SegmentMarker&, const SegmentMarker&) = default;
};

struct Concatenation {
    Recording recording;
    std::vector<SegmentMarker> markers;
};

inline void require_finite(std::span<const double> samples, std::string_view context) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw Error(ErrorCode::NonFiniteSample,
                        std::string(context) + ": sample " + std::to_string(i) + " is not finite");
        }
    }
}

inline void require_nonempty(const Recording& recording, std::string_view context) {
    if (recording.samples.empty()) {
        throw Error(ErrorCode::EmptyInput, std::string(context) + ": empty recording");
    }
}

inline Concatenation concatenate_trials(std::span<const Trial> trials) {
    if (trials.empty()) throw Error(ErrorCode::EmptyInput, "concatenate_trials: no trials");

    const auto& first = trials.front().recording;
    Concatenation out;
    out.recording.spec = first.spec;
    out.recording.subject_id = first.subject_id;
    out.recording.channel_label = first.channel_label;

    std::size_t total = 0;
    for (const auto& t : trials) {
        if (t.recording.subject_id != first.subject_id) {
            throw Error(ErrorCode::MixedSubjects, "concatenate_trials: subjects " + first.subject_id +
                                                      " and " + t.recording.subject_id);
        }
        if (t.recording.spec.sample_rate != first.spec.sample_rate) {
            throw Error(ErrorCode::MixedSampleRates, "concatenate_trials: subject " + first.subject_id);
        }
        total += t.recording.size();
    }

    out.recording.samples.reserve(total);
    out.markers.reserve(trials.size());
    for (const auto& t : trials) {
        const std::size_t start = out.recording.samples.size();
        out.recording.samples.insert(out.recording.samples.end(), t.recording.samples.begin(),
                                     t.recording.samples.end());
        out.markers.push_back({t.trial_index, start, out.recording.samples.size(), t.task, t.label});
    }
    return out;
}

inline std::vector<Trial> split_by_markers(const Recording& recording,
                                           std::span<const SegmentMarker> markers) {
    std::vector<Trial> trials;
    trials.reserve(markers.size());
    std::size_t cursor = 0;
    for (const auto& m : markers) {
        if (m.end > recording.size() || m.start > m.end) {
            throw Error(ErrorCode::MarkerOutOfBounds,
                        "marker [" + std::to_string(m.start) + ", " + std::to_string(m.end) +
                            ") on a recording of length " + std::to_string(recording.size()));
        }
        if (m.start != cursor) {
            // Earlier than the cursor overlaps the previous marker; later leaves a gap.
            throw Error(m.start < cursor ? ErrorCode::MarkerOverlap : ErrorCode::MarkerOutOfBounds,
                        "marker for trial " + std::to_string(m.trial_index) + " starts at " +
                            std::to_string(m.start) + ", expected " + std::to_string(cursor));
        }
        Trial t;
        t.recording.spec = recording.spec;
        t.recording.subject_id = recording.subject_id;
        t.recording.channel_label = recording.channel_label;
        t.recording.samples.assign(recording.samples.begin() + static_cast<std::ptrdiff_t>(m.start),
                                   recording.samples.begin() + static_cast<std::ptrdiff_t>(m.end));
        t.task = m.task;
        t.label = m.label;
        t.trial_index = m.trial_index;
        trials.push_back(std::move(t));
        cursor = m.end;
    }
    if (cursor != recording.size()) {
        throw Error(ErrorCode::MarkerOutOfBounds, "markers cover " + std::to_string(cursor) + " of " +
                                                      std::to_string(recording.size()) + " samples");
    }
    return trials;
}

}  // namespace ppgnorm
