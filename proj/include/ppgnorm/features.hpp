#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/peaks.hpp"
#include "ppgnorm/signal_model.hpp"

namespace ppgnorm {

inline constexpr std::size_t kFeatureCount = 7;

// Column order used everywhere a feature row is flattened or exported.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "min", "max", "mean", "std", "peak_rate", "ibi", "rmssd"};

// peak_rate is peaks per sample; ibi_mean and rmssd are in samples
// (SNsamples for subject-normalized recordings).
struct FeatureVector {
    double minimum = 0.0;
    double maximum = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
    double peak_rate = 0.0;
    double ibi_mean = 0.0;
    double rmssd = 0.0;

    std::array<double, kFeatureCount> to_array() const {
        return {minimum, maximum, mean, std_dev, peak_rate, ibi_mean, rmssd};
    }

    std::vector<double> to_vector() const {
        const auto a = to_array();
        return {a.begin(), a.end()};
    }

    static FeatureVector from_array(const std::array<double, kFeatureCount>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation (N denominator).
inline double population_std(std::span<const double> v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

inline FeatureVector features_from_peaks(std::span<const double> samples,
                                         std::span<const std::size_t> peaks,
                                         std::string_view context = "extract_features") {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, std::string(context) + ": empty recording");
    if (peaks.size() < 3) throw TooFewPeaksError(peaks.size(), 3, std::string(context));

    FeatureVector fv;
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    fv.minimum = *lo;
    fv.maximum = *hi;
    fv.mean = mean_of(samples);
    fv.std_dev = population_std(samples, fv.mean);
    fv.peak_rate = static_cast<double>(peaks.size()) / static_cast<double>(samples.size());

    std::vector<double> ibis(peaks.size() - 1);
    for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
        ibis[i] = static_cast<double>(peaks[i + 1] - peaks[i]);
    }
    fv.ibi_mean = mean_of(ibis);

    double sq = 0.0;
    for (std::size_t i = 0; i + 1 < ibis.size(); ++i) {
        const double d = ibis[i + 1] - ibis[i];
        sq += d * d;
    }
    fv.rmssd = std::sqrt(sq / static_cast<double>(ibis.size() - 1));
    return fv;
}

inline FeatureVector extract_features(const Recording& recording, const PeakConfig& cfg) {
    require_nonempty(recording, "extract_features");
    const auto peaks = detect_peaks(recording, cfg);
    return features_from_peaks(recording.samples, peaks,
                               "extract_features(subject " + recording.subject_id + ")");
}

// Resting-state means of the three rate features for one subject.
struct BaselineFeatureStats {
    std::string subject_id;
    double peak_rate = 0.0;
    double ibi_mean = 0.0;
    double rmssd = 0.0;
};

inline BaselineFeatureStats baseline_feature_stats(std::string subject_id,
                                                   std::span<const FeatureVector> baselines) {
    if (baselines.empty()) {
        throw Error(ErrorCode::EmptyInput, "baseline_feature_stats: no baselines for " + subject_id);
    }
    BaselineFeatureStats stats{std::move(subject_id)};
    for (const auto& fv : baselines) {
        stats.peak_rate += fv.peak_rate;
        stats.ibi_mean += fv.ibi_mean;
        stats.rmssd += fv.rmssd;
    }
    const double n = static_cast<double>(baselines.size());
    stats.peak_rate /= n;
    stats.ibi_mean /= n;
    stats.rmssd /= n;
    return stats;
}

// Baseline-relative change (f - bl) / bl on peak rate, IBI and RMSSD; the
// amplitude features pass through.
inline FeatureVector subject_feature_normalize(const FeatureVector& fv, const BaselineFeatureStats& stats) {
    auto rel = [&](double value, double baseline, std::string_view name) {
        if (baseline == 0.0 || !std::isfinite(baseline)) {
            throw Error(ErrorCode::ZeroBaselineFeature,
                        "subject " + stats.subject_id + ": baseline " + std::string(name) + " is zero");
        }
        return (value - baseline) / baseline;
    };
    FeatureVector out = fv;
    out.peak_rate = rel(fv.peak_rate, stats.peak_rate, "peak_rate");
    out.ibi_mean = rel(fv.ibi_mean, stats.ibi_mean, "ibi");
    out.rmssd = rel(fv.rmssd, stats.rmssd, "rmssd");
    return out;
}

struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> std_dev;

    std::size_t dimension() const noexcept { return mean.size(); }
};

inline StandardizationParams fit_standardization(std::span<const std::vector<double>> rows) {
    if (rows.size() < 2) {
        throw Error(ErrorCode::TooShort, "fit_standardization: need at least 2 training rows");
    }
    const std::size_t dim = rows.front().size();
    StandardizationParams p;
    p.mean.assign(dim, 0.0);
    p.std_dev.assign(dim, 0.0);
    for (const auto& r : rows) {
        if (r.size() != dim) throw Error(ErrorCode::DimensionMismatch, "fit_standardization: ragged rows");
        for (std::size_t j = 0; j < dim; ++j) p.mean[j] += r[j];
    }
    const double n = static_cast<double>(rows.size());
    for (double& m : p.mean) m /= n;
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < dim; ++j) p.std_dev[j] += (r[j] - p.mean[j]) * (r[j] - p.mean[j]);
    }
    for (std::size_t j = 0; j < dim; ++j) {
        p.std_dev[j] = std::sqrt(p.std_dev[j] / n);
        if (!(p.std_dev[j] > 0.0)) {
            const std::string name = dim == kFeatureCount ? std::string(kFeatureNames[j])
                                                          : "column " + std::to_string(j);
            throw Error(ErrorCode::DegenerateFeature, "feature " + name + " has zero variance");
        }
    }
    return p;
}

inline std::vector<double> apply_standardization(std::span<const double> row,
                                                 const StandardizationParams& p) {
    if (row.size() != p.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "apply_standardization: expected " +
                                                      std::to_string(p.dimension()) + " features, got " +
                                                      std::to_string(row.size()));
    }
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - p.mean[j]) / p.std_dev[j];
    return out;
}

inline FeatureVector apply_standardization(const FeatureVector& fv, const StandardizationParams& p) {
    const auto v = apply_standardization(fv.to_vector(), p);
    std::array<double, kFeatureCount> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return FeatureVector::from_array(a);
}

}  // namespace ppgnorm
