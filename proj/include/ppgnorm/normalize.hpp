#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/features.hpp"
#include "ppgnorm/peaks.hpp"
#include "ppgnorm/signal_model.hpp"

namespace ppgnorm {

struct ZScoreParams {
    double mu = 0.0;
    double sigma = 1.0;
};

inline ZScoreParams fit_zscore(std::span<const double> samples) {
    if (samples.size() < 2) throw Error(ErrorCode::TooShort, "fit_zscore: need at least 2 samples");
    ZScoreParams p;
    p.mu = mean_of(samples);
    p.sigma = population_std(samples, p.mu);
    if (!(p.sigma > 0.0)) throw Error(ErrorCode::ConstantSignal, "fit_zscore: zero variance");
    return p;
}

inline ZScoreParams fit_zscore(const Recording& recording) { return fit_zscore(recording.samples); }

inline Recording apply_zscore(const Recording& recording, const ZScoreParams& p) {
    Recording out = recording;
    for (double& x : out.samples) x = (x - p.mu) / p.sigma;
    return out;
}

// Concatenate, fit one Z-score on the whole signal, apply it and split the
// result back into the original trials.
inline std::vector<Trial> amplitude_normalize(std::span<const Trial> trials) {
    auto joined = concatenate_trials(trials);
    const auto params = fit_zscore(joined.recording);
    return split_by_markers(apply_zscore(joined.recording, params), joined.markers);
}

struct NormalizationConfig {
    double f_snb = 1.0 / 128.0;  // beats per SNsample
    double min_plausible_bpm = 30.0;
    double max_plausible_bpm = 220.0;

    void validate() const {
        if (!(f_snb > 0.0 && f_snb < 0.5)) {
            throw Error(ErrorCode::InvalidArgument, "f_SNb must lie in (0, 0.5)");
        }
        if (!(min_plausible_bpm > 0.0 && max_plausible_bpm > min_plausible_bpm)) {
            throw Error(ErrorCode::InvalidArgument, "plausible bpm bounds are inconsistent");
        }
    }
};

struct BaselineProfile {
    std::string subject_id;
    double f_b = 0.0;          // beats / second
    double f_nb = 0.0;         // beats / sample
    double f_snc = 0.0;        // SNsamples / sample
    double sample_rate = 0.0;  // f_c
    int n_baselines_used = 0;
};

// f_SNc = (f_b / f_c) * (1 / f_SNb)
inline double personal_resampling_frequency(double f_b, double f_c, const NormalizationConfig& cfg) {
    if (!(f_b > 0.0) || !(f_c > 0.0) || !(cfg.f_snb > 0.0)) {
        throw Error(ErrorCode::NonPositiveInput, "personal_resampling_frequency: inputs must be positive");
    }
    return (f_b / f_c) * (1.0 / cfg.f_snb);
}

// Mean over baselines of f_c / mean inter-peak distance.
inline double estimate_baseline_frequency(std::span<const Recording> baselines, const PeakConfig& peak_cfg,
                                          const NormalizationConfig& cfg = {}) {
    if (baselines.empty()) throw Error(ErrorCode::EmptyInput, "estimate_baseline_frequency: no baselines");
    double sum = 0.0;
    for (const auto& b : baselines) {
        const auto peaks = detect_peaks(b, peak_cfg);
        if (peaks.size() < 3) {
            throw TooFewPeaksError(peaks.size(), 3, "baseline of subject " + b.subject_id);
        }
        const double mean_ibi = static_cast<double>(peaks.back() - peaks.front()) /
                                static_cast<double>(peaks.size() - 1);
        sum += b.spec.sample_rate / mean_ibi;
    }
    const double f_b = sum / static_cast<double>(baselines.size());
    const double bpm = f_b * 60.0;
    if (bpm < cfg.min_plausible_bpm || bpm > cfg.max_plausible_bpm) {
        throw Error(ErrorCode::ImplausibleHeartRate,
                    "subject " + baselines.front().subject_id + ": resting rate " + std::to_string(bpm) +
                        " bpm is outside [" + std::to_string(cfg.min_plausible_bpm) + ", " +
                        std::to_string(cfg.max_plausible_bpm) + "]");
    }
    return f_b;
}

enum class Interpolation { Linear, WindowedSinc };

namespace detail {

inline constexpr double kKaiserBeta = 8.0;
inline constexpr int kSincZeroCrossings = 16;

// Kaiser window sampled on [0, 1]; linear lookup keeps the inner loop cheap.
class KaiserTable {
public:
    static const KaiserTable& instance() {
        static const KaiserTable table;
        return table;
    }

    double operator()(double u) const {
        u = std::abs(u);
        if (u >= 1.0) return 0.0;
        const double pos = u * kSize;
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return values_[i] + (values_[i + 1] - values_[i]) * frac;
    }

private:
    static constexpr std::size_t kSize = 8192;

    KaiserTable() : values_(kSize + 2) {
        const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
        for (std::size_t i = 0; i <= kSize; ++i) {
            const double u = static_cast<double>(i) / kSize;
            values_[i] = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / norm;
        }
        values_[kSize + 1] = 0.0;
    }

    std::vector<double> values_;
};

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

inline double clamped(std::span<const double> x, std::ptrdiff_t i) {
    const auto last = static_cast<std::ptrdiff_t>(x.size()) - 1;
    return x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, last))];
}

}  // namespace detail

// Output sample k interpolates the input at position k / ratio; positions at
// or past the last input sample take the last sample. Output length is
// round(L * ratio).
inline std::vector<double> resample(std::span<const double> x, double ratio, Interpolation method) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        throw Error(ErrorCode::NonPositiveRatio, "resample: ratio must be positive");
    }
    if (x.empty()) throw Error(ErrorCode::EmptyInput, "resample: empty input");
    if (ratio == 1.0) return {x.begin(), x.end()};

    const auto out_len = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(static_cast<double>(x.size()) * ratio)));
    const double last = static_cast<double>(x.size() - 1);
    std::vector<double> out(out_len);

    if (method == Interpolation::Linear) {
        for (std::size_t k = 0; k < out_len; ++k) {
            const double t = static_cast<double>(k) / ratio;
            if (t >= last) {
                out[k] = x.back();
                continue;
            }
            const auto i = static_cast<std::size_t>(t);
            const double frac = t - static_cast<double>(i);
            out[k] = x[i] + (x[i + 1] - x[i]) * frac;
        }
        return out;
    }

    // Windowed sinc, cutoff at the lower of the two Nyquist rates.
    const auto& kaiser = detail::KaiserTable::instance();
    const double bandwidth = std::min(1.0, ratio);
    const double support = detail::kSincZeroCrossings / bandwidth;
    for (std::size_t k = 0; k < out_len; ++k) {
        const double t = static_cast<double>(k) / ratio;
        if (t >= last) {
            out[k] = x.back();
            continue;
        }
        const auto first = static_cast<std::ptrdiff_t>(std::ceil(t - support));
        const auto final = static_cast<std::ptrdiff_t>(std::floor(t + support));
        double acc = 0.0;
        double weight_sum = 0.0;
        for (std::ptrdiff_t i = first; i <= final; ++i) {
            const double tau = t - static_cast<double>(i);
            const double w = detail::sinc(bandwidth * tau) * kaiser(tau / support);
            acc += w * detail::clamped(x, i);
            weight_sum += w;
        }
        out[k] = acc / weight_sum;
    }
    return out;
}

inline Recording resample_to_snd(const Recording& recording, double f_snc,
                                 Interpolation method = Interpolation::WindowedSinc) {
    require_nonempty(recording, "resample_to_snd");
    if (recording.spec.domain != Domain::DiscreteTime) {
        throw Error(ErrorCode::WrongDomain, "resample_to_snd: recording is already subject-normalized");
    }
    if (!(f_snc > 0.0)) throw Error(ErrorCode::NonPositiveRatio, "resample_to_snd: f_SNc must be positive");
    Recording out;
    out.samples = resample(recording.samples, f_snc, method);
    out.spec = {recording.spec.sample_rate * f_snc, Domain::SubjectNormalized};
    out.subject_id = recording.subject_id;
    out.channel_label = recording.channel_label;
    return out;
}

struct NormalizedSubject {
    BaselineProfile profile;
    SubjectSession session;
};

inline BaselineProfile fit_baseline_profile(const SubjectSession& session, const NormalizationConfig& cfg,
                                            const PeakConfig& peak_cfg) {
    if (session.baselines.empty()) {
        throw Error(ErrorCode::EmptyInput, "subject " + session.subject_id + " has no baseline");
    }
    std::vector<Recording> baselines;
    baselines.reserve(session.baselines.size());
    for (const auto& t : session.baselines) baselines.push_back(t.recording);

    BaselineProfile p;
    p.subject_id = session.subject_id;
    p.sample_rate = baselines.front().spec.sample_rate;
    for (const auto& b : baselines) {
        if (b.spec.sample_rate != p.sample_rate) {
            throw Error(ErrorCode::MixedSampleRates, "baselines of subject " + session.subject_id);
        }
    }
    p.f_b = estimate_baseline_frequency(baselines, peak_cfg, cfg);
    p.f_nb = p.f_b / p.sample_rate;
    p.f_snc = personal_resampling_frequency(p.f_b, p.sample_rate, cfg);
    p.n_baselines_used = static_cast<int>(baselines.size());
    return p;
}

// Maps every trial of a subject (baselines included) into the SND with one
// per-subject resampling frequency.
inline NormalizedSubject normalize_subject(const SubjectSession& session, const NormalizationConfig& cfg,
                                           const PeakConfig& peak_cfg,
                                           Interpolation method = Interpolation::WindowedSinc) {
    cfg.validate();
    NormalizedSubject out;
    out.profile = fit_baseline_profile(session, cfg, peak_cfg);
    out.session.subject_id = session.subject_id;
    auto map_trial = [&](const Trial& t) {
        Trial r = t;
        r.recording = resample_to_snd(t.recording, out.profile.f_snc, method);
        return r;
    };
    for (const auto& t : session.baselines) out.session.baselines.push_back(map_trial(t));
    for (const auto& t : session.task_trials) out.session.task_trials.push_back(map_trial(t));
    return out;
}

}  // namespace ppgnorm
