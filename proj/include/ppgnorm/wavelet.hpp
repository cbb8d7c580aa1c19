#pragma once

// Stationary (undecimated) wavelet transform via the a-trous algorithm and
// universal soft-threshold denoising.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/signal_model.hpp"

namespace ppgnorm {

enum class WaveletFamily { FejerKorovkin, Haar };

namespace detail {

// Minimum-phase Fejer-Korovkin scaling filters, generated by
// scripts/gen_fk_filters.py (taps sum to sqrt(2), unit energy).
inline constexpr std::array<double, 4> kFk4{
    0.65392755150243299341, 0.7532724962889091296, 0.053179229684114530988,
    -0.046165715102361605199};

inline constexpr std::array<double, 8> kFk8{
    0.43610067885983586523,  0.80128344384741420102, 0.36624972122043258076,
    -0.14048213402279836718, -0.10525474197881271351, 0.051754052144525871908,
    0.010011123085091791917, -0.0054485807825941813406};

}  // namespace detail

class WaveletSpec {
public:
    static WaveletSpec haar(int levels = 4) {
        const double r = 1.0 / std::numbers::sqrt2;
        return WaveletSpec(WaveletFamily::Haar, 2, levels, {r, r});
    }

    static WaveletSpec fejer_korovkin(int order = 8, int levels = 4) {
        switch (order) {
            case 4:
                return WaveletSpec(WaveletFamily::FejerKorovkin, 4, levels,
                                   {detail::kFk4.begin(), detail::kFk4.end()});
            case 8:
                return WaveletSpec(WaveletFamily::FejerKorovkin, 8, levels,
                                   {detail::kFk8.begin(), detail::kFk8.end()});
            default:
                throw Error(ErrorCode::UnsupportedWavelet,
                            "Fejer-Korovkin order " + std::to_string(order) +
                                " is not available (supported: 4, 8)");
        }
    }

    WaveletFamily family() const noexcept { return family_; }
    int order() const noexcept { return order_; }
    int levels() const noexcept { return levels_; }
    std::size_t divisor() const noexcept { return std::size_t{1} << levels_; }

    const std::vector<double>& lowpass() const noexcept { return lowpass_; }
    const std::vector<double>& highpass() const noexcept { return highpass_; }

    bool same_as(const WaveletSpec& other) const noexcept {
        return family_ == other.family_ && order_ == other.order_ && levels_ == other.levels_;
    }

private:
    WaveletSpec(WaveletFamily family, int order, int levels, std::vector<double> lowpass)
        : family_(family), order_(order), levels_(levels), lowpass_(std::move(lowpass)) {
        if (levels_ < 1 || levels_ > 20) {
            throw Error(ErrorCode::InvalidArgument,
                        "decomposition levels must be in [1, 20], got " + std::to_string(levels_));
        }
        // Quadrature mirror: g[k] = (-1)^k h[L-1-k].
        const std::size_t n = lowpass_.size();
        highpass_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            highpass_[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass_[n - 1 - k];
        }
    }

    WaveletFamily family_;
    int order_;
    int levels_;
    std::vector<double> lowpass_;
    std::vector<double> highpass_;
};

struct SwtDecomposition {
    std::vector<double> approximation;
    std::vector<std::vector<double>> details;  // details[0] is level 1 (finest)
    std::size_t padded_length = 0;
    std::size_t original_length = 0;
    WaveletFamily family = WaveletFamily::FejerKorovkin;
    int order = 0;
    int levels = 0;
};

enum class ThresholdRule { UniversalLiteral, UniversalSigmaScaled };

struct ThresholdSpec {
    ThresholdRule rule = ThresholdRule::UniversalSigmaScaled;
    std::vector<double> thresholds;  // one per detail band, same order as details
};

struct Padded {
    std::vector<double> samples;
    std::size_t pad_length = 0;
};

inline Padded replicate_pad(std::span<const double> samples, std::size_t divisor) {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, "replicate_pad: empty input");
    if (divisor == 0) throw Error(ErrorCode::InvalidArgument, "replicate_pad: divisor must be positive");
    const std::size_t n = samples.size();
    const std::size_t padded = (n + divisor - 1) / divisor * divisor;
    Padded out;
    out.samples.assign(samples.begin(), samples.end());
    out.samples.resize(padded, samples.back());
    out.pad_length = padded - n;
    return out;
}

namespace detail {

// out[n] = sum_k filter[k] * in[(n + step*k) mod N]
inline void correlate_circular(std::span<const double> in, std::span<const double> filter,
                               std::size_t step, std::span<double> out) {
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        std::size_t idx = i;
        const std::size_t stride = step % n;
        for (double f : filter) {
            acc += f * in[idx];
            idx += stride;
            if (idx >= n) idx -= n;
        }
        out[i] = acc;
    }
}

// out[n] += sum_k filter[k] * in[(n - step*k) mod N]
inline void convolve_circular_add(std::span<const double> in, std::span<const double> filter,
                                  std::size_t step, std::span<double> out) {
    const std::size_t n = in.size();
    const std::size_t stride = step % n;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        std::size_t idx = i;
        for (double f : filter) {
            acc += f * in[idx];
            idx = idx >= stride ? idx - stride : idx + n - stride;
        }
        out[i] += acc;
    }
}

inline double median_inplace(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace detail

inline SwtDecomposition swt(std::span<const double> samples, const WaveletSpec& spec,
                            std::size_t original_length = 0) {
    const std::size_t n = samples.size();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "swt: empty input");
    if (n % spec.divisor() != 0) {
        throw Error(ErrorCode::LengthNotDivisible, "swt: length " + std::to_string(n) +
                                                       " is not divisible by " +
                                                       std::to_string(spec.divisor()));
    }

    SwtDecomposition out;
    out.padded_length = n;
    out.original_length = original_length == 0 ? n : original_length;
    out.family = spec.family();
    out.order = spec.order();
    out.levels = spec.levels();
    out.details.reserve(static_cast<std::size_t>(spec.levels()));

    std::vector<double> approx(samples.begin(), samples.end());
    std::vector<double> next(n);
    for (int level = 1; level <= spec.levels(); ++level) {
        const std::size_t step = std::size_t{1} << (level - 1);
        std::vector<double> band(n);
        detail::correlate_circular(approx, spec.highpass(), step, band);
        detail::correlate_circular(approx, spec.lowpass(), step, next);
        out.details.push_back(std::move(band));
        std::swap(approx, next);
    }
    out.approximation = std::move(approx);
    return out;
}

inline std::vector<double> inverse_swt(const SwtDecomposition& decomp, const WaveletSpec& spec) {
    if (decomp.family != spec.family() || decomp.order != spec.order() ||
        decomp.levels != spec.levels() ||
        decomp.details.size() != static_cast<std::size_t>(spec.levels())) {
        throw Error(ErrorCode::SpecMismatch, "inverse_swt: decomposition was produced by another wavelet");
    }
    const std::size_t n = decomp.padded_length;
    std::vector<double> approx = decomp.approximation;
    std::vector<double> next(n);
    for (int level = spec.levels(); level >= 1; --level) {
        const std::size_t step = std::size_t{1} << (level - 1);
        std::fill(next.begin(), next.end(), 0.0);
        detail::convolve_circular_add(approx, spec.lowpass(), step, next);
        detail::convolve_circular_add(decomp.details[static_cast<std::size_t>(level - 1)],
                                      spec.highpass(), step, next);
        for (double& v : next) v *= 0.5;
        std::swap(approx, next);
    }
    return approx;
}

inline double universal_threshold(std::size_t band_length) {
    return std::sqrt(2.0 * std::log(static_cast<double>(band_length)));
}

// Noise scale from the median absolute coefficient (Gaussian MAD constant).
inline double mad_sigma(std::span<const double> band) {
    std::vector<double> mags(band.size());
    std::transform(band.begin(), band.end(), mags.begin(), [](double v) { return std::abs(v); });
    return detail::median_inplace(mags) / 0.6745;
}

inline ThresholdSpec make_thresholds(const SwtDecomposition& decomp, ThresholdRule rule) {
    ThresholdSpec spec;
    spec.rule = rule;
    spec.thresholds.reserve(decomp.details.size());
    for (const auto& band : decomp.details) {
        const double base = universal_threshold(band.size());
        spec.thresholds.push_back(rule == ThresholdRule::UniversalLiteral ? base
                                                                          : mad_sigma(band) * base);
    }
    return spec;
}

inline double soft_threshold_value(double d, double threshold) {
    const double shrunk = std::abs(d) - threshold;
    if (shrunk <= 0.0) return 0.0;
    return std::copysign(shrunk, d);
}

inline SwtDecomposition soft_threshold(SwtDecomposition decomp, const ThresholdSpec& thresholds) {
    if (thresholds.thresholds.size() != decomp.details.size()) {
        throw Error(ErrorCode::BandCountMismatch,
                    "soft_threshold: " + std::to_string(thresholds.thresholds.size()) +
                        " thresholds for " + std::to_string(decomp.details.size()) + " bands");
    }
    for (std::size_t k = 0; k < decomp.details.size(); ++k) {
        const double t = thresholds.thresholds[k];
        for (double& d : decomp.details[k]) d = soft_threshold_value(d, t);
    }
    return decomp;
}

inline Recording denoise(const Recording& recording, const WaveletSpec& spec, ThresholdRule rule) {
    require_nonempty(recording, "denoise");
    if (recording.spec.domain != Domain::DiscreteTime) {
        throw Error(ErrorCode::WrongDomain, "denoise: recording must be in the discrete-time domain");
    }
    const auto padded = replicate_pad(recording.samples, spec.divisor());
    auto decomp = swt(padded.samples, spec, recording.size());
    const auto thresholds = make_thresholds(decomp, rule);
    auto rebuilt = inverse_swt(soft_threshold(std::move(decomp), thresholds), spec);
    rebuilt.resize(recording.size());

    Recording out = recording;
    out.samples = std::move(rebuilt);
    return out;
}

}  // namespace ppgnorm
