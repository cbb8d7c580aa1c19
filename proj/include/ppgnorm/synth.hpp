#pragma once

// Deterministic synthetic PPG cohorts with known beat positions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/signal_model.hpp"
#include "ppgnorm/util.hpp"

namespace ppgnorm {

// mt19937_64 is fully specified by the standard; the distributions below are
// written out so that streams match across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct PulseShape {
    double upstroke_fraction = 0.25;  // share of the beat spent rising to the crest
    double decay_fraction = 0.2;      // exponential time constant, as a share of the beat
};

// Unit-height pulse value `s` samples after a crest, in a beat that lasts
// `beat` samples until the next crest: exponential decay, then a
// raised-cosine upstroke into the next crest. Continuous, 1 at both crests.
inline double pulse_value(double s, double beat, const PulseShape& shape = {}) {
    const double rise = shape.upstroke_fraction * beat;
    const double fall_end = beat - rise;
    if (s >= fall_end) {
        const double phase = (s - fall_end) / rise;
        return 0.5 * (1.0 - std::cos(std::numbers::pi * phase));
    }
    const double tau = shape.decay_fraction * beat;
    const double end = std::exp(-fall_end / tau);
    return (std::exp(-s / tau) - end) / (1.0 - end);
}

struct BeatTrain {
    std::vector<double> samples;       // unit-height, noise free
    std::vector<std::size_t> crests;   // ground-truth crest indices
};

// Crests sit on integer samples; beat lengths are the nominal period scaled by
// (1 + jitter * z), z standard normal clipped to +-3.
inline BeatTrain generate_beat_train(double bpm, double duration_s, double f_c, double jitter,
                                     std::uint64_t seed, const PulseShape& shape = {}) {
    if (!(bpm > 0.0) || !(duration_s > 0.0) || !(f_c > 0.0) || jitter < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "generate_beat_train: arguments must be positive");
    }
    Rng rng(seed);
    const auto n = static_cast<std::size_t>(std::llround(duration_s * f_c));
    const double period = 60.0 * f_c / bpm;
    auto next_period = [&] {
        const double z = std::clamp(rng.normal(), -3.0, 3.0);
        return period * (1.0 + jitter * z);
    };

    // One virtual crest before the start and one past the end bound every sample.
    double t = period * rng.uniform(0.3, 0.8);
    std::vector<long long> crest_pos;
    crest_pos.push_back(std::llround(t - period));
    while (true) {
        crest_pos.push_back(std::llround(t));
        if (crest_pos.back() >= static_cast<long long>(n)) break;
        t += next_period();
    }

    BeatTrain out;
    out.samples.resize(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto pos = static_cast<long long>(i);
        while (crest_pos[k + 1] <= pos) ++k;
        const double beat = static_cast<double>(crest_pos[k + 1] - crest_pos[k]);
        out.samples[i] = pulse_value(static_cast<double>(pos - crest_pos[k]), beat, shape);
    }
    for (long long c : crest_pos) {
        if (c >= 0 && c < static_cast<long long>(n)) out.crests.push_back(static_cast<std::size_t>(c));
    }
    return out;
}

struct SynthConfig {
    int n_subjects = 20;
    int trials_per_class = 6;
    int n_baselines = 1;
    double sample_rate = 128.0;
    double baseline_duration_s = 60.0;
    double trial_duration_s = 60.0;
    double bpm_min = 60.0;
    double bpm_max = 100.0;
    double hrv_jitter = 0.03;
    double gain_min = 0.5;  // log-uniform
    double gain_max = 2.0;
    double load_multiplier = 1.15;
    double noise_sigma_fraction = 0.05;  // of the pulse height
    double trial_rate_sd = 0.04;         // per-trial relative rate deviation
    double trial_gain_sd = 0.15;         // per-trial log-amplitude deviation
    double dc_offset = 2.0;              // in units of the pulse height

    void validate() const {
        if (n_subjects < 2) throw Error(ErrorCode::ConfigError, "synth: need at least 2 subjects");
        if (trials_per_class < 0 || n_baselines < 1) {
            throw Error(ErrorCode::ConfigError, "synth: need >= 1 baseline and >= 0 trials per class");
        }
        if (!(sample_rate > 0.0) || !(baseline_duration_s > 0.0) || !(trial_duration_s > 0.0)) {
            throw Error(ErrorCode::ConfigError, "synth: rates and durations must be positive");
        }
        if (!(bpm_min > 0.0) || bpm_max < bpm_min || !(gain_min > 0.0) || gain_max < gain_min) {
            throw Error(ErrorCode::ConfigError, "synth: inconsistent bpm or gain range");
        }
        if (!(load_multiplier > 0.0) || hrv_jitter < 0.0 || noise_sigma_fraction < 0.0 || trial_rate_sd < 0.0 ||
            trial_gain_sd < 0.0) {
            throw Error(ErrorCode::ConfigError, "synth: multipliers must be positive, spreads non-negative");
        }
    }
};

struct SyntheticSubjectSpec {
    std::string subject_id;
    double baseline_bpm = 0.0;
    double hrv_jitter_fraction = 0.0;
    double amplitude_gain = 1.0;
    double load_bpm_multiplier = 1.0;
    double noise_sigma_fraction = 0.0;
};

struct GroundTruthRow {
    std::string subject_id;
    Task task = Task::Baseline;
    int trial_index = 0;
    double true_bpm = 0.0;
    std::vector<std::size_t> crests;
};

struct SyntheticCohort {
    std::vector<SyntheticSubjectSpec> subjects;
    std::vector<SubjectSession> sessions;
    std::vector<GroundTruthRow> truth;
};

inline std::string synthetic_subject_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%02d", index + 1);
    return buf;
}

inline std::uint64_t subject_seed(std::uint64_t seed, int index) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

inline SyntheticCohort generate_cohort(const SynthConfig& cfg, std::uint64_t seed,
                                       Task high_task = Task::MathCalculation,
                                       Task low_task = Task::AudioListening) {
    cfg.validate();
    SyntheticCohort cohort;
    for (int s = 0; s < cfg.n_subjects; ++s) {
        Rng rng(subject_seed(seed, s));
        SyntheticSubjectSpec spec;
        spec.subject_id = synthetic_subject_id(s);
        spec.baseline_bpm = rng.uniform(cfg.bpm_min, cfg.bpm_max);
        spec.amplitude_gain = std::exp(rng.uniform(std::log(cfg.gain_min), std::log(cfg.gain_max)));
        spec.hrv_jitter_fraction = cfg.hrv_jitter;
        spec.load_bpm_multiplier = cfg.load_multiplier;
        spec.noise_sigma_fraction = cfg.noise_sigma_fraction;

        SubjectSession session;
        session.subject_id = spec.subject_id;
        int trial_index = 0;
        auto make_trial = [&](Task task, double bpm, double duration) {
            const std::uint64_t trial_seed = rng.next();
            const double gain =
                spec.amplitude_gain * std::exp(cfg.trial_gain_sd * std::clamp(rng.normal(), -3.0, 3.0));
            auto train = generate_beat_train(bpm, duration, cfg.sample_rate, spec.hrv_jitter_fraction,
                                             trial_seed);
            Rng noise(splitmix64(trial_seed));
            Trial t;
            t.task = task;
            t.trial_index = trial_index++;
            t.recording.spec = {cfg.sample_rate, Domain::DiscreteTime};
            t.recording.subject_id = spec.subject_id;
            t.recording.samples.resize(train.samples.size());
            for (std::size_t i = 0; i < train.samples.size(); ++i) {
                t.recording.samples[i] =
                    gain * (cfg.dc_offset + train.samples[i] + spec.noise_sigma_fraction * noise.normal());
            }
            cohort.truth.push_back({spec.subject_id, task, t.trial_index, bpm, std::move(train.crests)});
            return t;
        };

        for (int b = 0; b < cfg.n_baselines; ++b) {
            session.baselines.push_back(make_trial(Task::Baseline, spec.baseline_bpm, cfg.baseline_duration_s));
        }
        for (int k = 0; k < cfg.trials_per_class; ++k) {
            for (const bool high : {true, false}) {
                const double drift = 1.0 + cfg.trial_rate_sd * std::clamp(rng.normal(), -3.0, 3.0);
                const double bpm = spec.baseline_bpm * (high ? spec.load_bpm_multiplier : 1.0) * drift;
                session.task_trials.push_back(make_trial(high ? high_task : low_task, bpm, cfg.trial_duration_s));
            }
        }
        cohort.subjects.push_back(std::move(spec));
        cohort.sessions.push_back(std::move(session));
    }
    return cohort;
}

}  // namespace ppgnorm
