#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/signal_model.hpp"

namespace ppgnorm {

struct PeakConfig {
    double min_separation_seconds = 0.33;  // 180 bpm ceiling
    double min_prominence_fraction = 0.3;  // of the recording's peak-to-peak range

    void validate() const {
        if (!(min_separation_seconds > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "min_separation_seconds must be positive");
        }
        if (!(min_prominence_fraction > 0.0 && min_prominence_fraction < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "min_prominence_fraction must lie in (0, 1)");
        }
    }
};

// Topographic prominence of the sample at `peak`: height above the higher of
// the two lowest points reached before meeting a strictly higher sample on
// each side (or the recording edge).
inline double peak_prominence(std::span<const double> x, std::size_t peak) {
    const double h = x[peak];
    double left_min = h;
    for (std::size_t i = peak; i-- > 0;) {
        if (x[i] > h) break;
        left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = peak + 1; i < x.size(); ++i) {
        if (x[i] > h) break;
        right_min = std::min(right_min, x[i]);
    }
    return h - std::max(left_min, right_min);
}

inline std::size_t separation_in_samples(double seconds, double sample_rate) {
    return static_cast<std::size_t>(std::ceil(seconds * sample_rate));
}

// Strict local maxima with enough prominence, thinned so that kept peaks are
// at least `min_separation` samples apart. Conflicts keep the higher peak,
// and the earlier one on equal height. Result is sorted ascending.
inline std::vector<std::size_t> detect_peaks(std::span<const double> x, double sample_rate,
                                             const PeakConfig& cfg) {
    std::vector<std::size_t> peaks;
    if (x.size() < 3) return peaks;

    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double min_prominence = cfg.min_prominence_fraction * (*hi - *lo);
    if (!(*hi > *lo)) return peaks;

    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (x[i - 1] < x[i] && x[i] > x[i + 1] && peak_prominence(x, i) >= min_prominence) {
            candidates.push_back(i);
        }
    }

    const std::size_t min_sep = separation_in_samples(cfg.min_separation_seconds, sample_rate);
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[candidates[a]] > x[candidates[b]];
    });

    std::vector<bool> removed(candidates.size(), false);
    for (std::size_t rank : order) {
        if (removed[rank]) continue;
        const std::size_t pos = candidates[rank];
        for (std::size_t j = rank; j-- > 0 && pos - candidates[j] < min_sep;) removed[j] = true;
        for (std::size_t j = rank + 1; j < candidates.size() && candidates[j] - pos < min_sep; ++j) {
            removed[j] = true;
        }
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!removed[i]) peaks.push_back(candidates[i]);
    }
    return peaks;
}

inline std::vector<std::size_t> detect_peaks(const Recording& recording, const PeakConfig& cfg) {
    require_nonempty(recording, "detect_peaks");
    return detect_peaks(recording.samples, recording.spec.sample_rate, cfg);
}

}  // namespace ppgnorm
