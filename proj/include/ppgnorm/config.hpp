#pragma once

// Pipeline configuration: a `key = value` text file with `#` comments and a
// mandatory schema_version line.

#include <charconv>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ppgnorm/classifier.hpp"
#include "ppgnorm/dataset.hpp"
#include "ppgnorm/error.hpp"
#include "ppgnorm/normalize.hpp"
#include "ppgnorm/peaks.hpp"
#include "ppgnorm/synth.hpp"
#include "ppgnorm/util.hpp"
#include "ppgnorm/wavelet.hpp"

namespace ppgnorm {

inline constexpr int kSchemaVersion = 1;

enum class Strategy { AmpN, SubjFeatN, PersFreqN };

inline constexpr std::array<std::pair<Strategy, std::string_view>, 3> kStrategyNames{{
    {Strategy::AmpN, "AmpN"},
    {Strategy::SubjFeatN, "SubjFeatN"},
    {Strategy::PersFreqN, "PersFreqN"},
}};

constexpr std::string_view strategy_name(Strategy s) {
    for (const auto& [k, name] : kStrategyNames) {
        if (k == s) return name;
    }
    return "Unknown";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
    for (const auto& [k, n] : kStrategyNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

// How trials are grouped for the amplitude Z-score: per (subject, session
// column) or per subject regardless of session.
enum class AmplitudeGrouping { Session, Subject };

struct WaveletSettings {
    WaveletFamily family = WaveletFamily::FejerKorovkin;
    int order = 8;
    int levels = 4;
    ThresholdRule rule = ThresholdRule::UniversalSigmaScaled;

    WaveletSpec spec() const {
        return family == WaveletFamily::Haar ? WaveletSpec::haar(levels) : WaveletSpec::fejer_korovkin(order, levels);
    }
};

struct PipelineConfig {
    std::string input = "synthetic";  // or a manifest path
    std::string output_dir = "ppgnorm_out";
    std::uint64_t seed = 42;
    std::size_t threads = 1;
    std::vector<Strategy> strategies{Strategy::AmpN, Strategy::SubjFeatN, Strategy::PersFreqN};
    std::vector<ClassifierKind> classifiers{ClassifierKind::SvmLinear, ClassifierKind::SvmCubic,
                                            ClassifierKind::SvmGaussian, ClassifierKind::Cart};
    std::string scheme = "clawdas";
    WaveletSettings wavelet;
    NormalizationConfig normalize;
    Interpolation interpolation = Interpolation::WindowedSinc;
    AmplitudeGrouping grouping = AmplitudeGrouping::Session;
    PeakConfig peaks;
    ClassifierSpec classifier;  // kind is overwritten per run
    bool standardize_per_fold = true;
    SynthConfig synth;

    bool synthetic_input() const { return input == "synthetic"; }

    ClassifierSpec classifier_spec(ClassifierKind kind) const {
        ClassifierSpec spec = classifier;
        spec.kind = kind;
        return spec;
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
        if (strategies.empty()) fail("strategies must list at least one strategy");
        if (classifiers.empty()) fail("classifiers must list at least one classifier");
        if (threads == 0) fail("threads must be >= 1");
        (void)scheme_by_name(scheme);
        try {
            (void)wavelet.spec();
            normalize.validate();
            peaks.validate();
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UnsupportedWavelet) throw;
            fail(e.what());
        }
        if (!(classifier.svm.box_constraint > 0.0) || !(classifier.svm.tolerance > 0.0)) {
            fail("svm.C and svm.tolerance must be positive");
        }
        if (!(classifier.gaussian_scale > 0.0)) fail("svm.gaussian_scale must be positive");
        if (classifier.cart.max_splits < 0 || classifier.cart.min_leaf < 1) {
            fail("cart.max_splits must be >= 0 and cart.min_leaf >= 1");
        }
        if (synthetic_input()) synth.validate();
    }
};

namespace detail {

inline std::string join_names(const auto& items, auto name_of) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ',';
        out += name_of(item);
    }
    return out;
}

// Shortest text that parses back to the same double.
inline std::string short_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string config_to_text(const PipelineConfig& c) {
    using detail::short_double;
    std::string t;
    auto kv = [&](std::string_view key, const std::string& value) {
        t += key;
        t += " = ";
        t += value;
        t += '\n';
    };
    auto comment = [&](std::string_view text) {
        t += "\n# ";
        t += text;
        t += '\n';
    };
    kv("schema_version", std::to_string(kSchemaVersion));
    comment("input: 'synthetic' or a manifest CSV path");
    kv("input", c.input);
    kv("output_dir", c.output_dir);
    kv("seed", std::to_string(c.seed));
    kv("threads", std::to_string(c.threads));
    kv("strategies", detail::join_names(c.strategies, [](Strategy s) { return std::string(strategy_name(s)); }));
    kv("classifiers",
       detail::join_names(c.classifiers, [](ClassifierKind k) { return std::string(classifier_name(k)); }));
    kv("scheme", c.scheme);

    comment("denoising: family fk|haar, fk order 4|8, threshold sigma_scaled|literal");
    kv("wavelet.family", c.wavelet.family == WaveletFamily::Haar ? "haar" : "fk");
    kv("wavelet.order", std::to_string(c.wavelet.order));
    kv("wavelet.levels", std::to_string(c.wavelet.levels));
    kv("wavelet.threshold", c.wavelet.rule == ThresholdRule::UniversalLiteral ? "literal" : "sigma_scaled");

    comment("normalization; f_SNb in beats per SNsample, grouping session|subject");
    kv("normalize.f_snb", c.normalize.f_snb == 1.0 / 128.0 ? "1/128" : short_double(c.normalize.f_snb));
    kv("normalize.min_bpm", short_double(c.normalize.min_plausible_bpm));
    kv("normalize.max_bpm", short_double(c.normalize.max_plausible_bpm));
    kv("normalize.interpolation", c.interpolation == Interpolation::Linear ? "linear" : "sinc");
    kv("normalize.grouping", c.grouping == AmplitudeGrouping::Subject ? "subject" : "session");

    comment("peak detection, shared by all subjects and domains");
    kv("peaks.min_separation_s", short_double(c.peaks.min_separation_seconds));
    kv("peaks.min_prominence_fraction", short_double(c.peaks.min_prominence_fraction));

    comment("classifiers");
    kv("svm.C", short_double(c.classifier.svm.box_constraint));
    kv("svm.tolerance", short_double(c.classifier.svm.tolerance));
    kv("svm.max_iterations", std::to_string(c.classifier.svm.max_iterations));
    kv("svm.gaussian_scale", short_double(c.classifier.gaussian_scale));
    kv("svm.poly_offset", short_double(c.classifier.poly_offset));
    kv("cart.max_splits", std::to_string(c.classifier.cart.max_splits));
    kv("cart.min_leaf", std::to_string(c.classifier.cart.min_leaf));
    kv("evaluate.standardize_per_fold", c.standardize_per_fold ? "true" : "false");

    comment("synthetic cohort (used when input = synthetic)");
    const auto& s = c.synth;
    kv("synth.subjects", std::to_string(s.n_subjects));
    kv("synth.trials_per_class", std::to_string(s.trials_per_class));
    kv("synth.baselines", std::to_string(s.n_baselines));
    kv("synth.sample_rate", short_double(s.sample_rate));
    kv("synth.baseline_duration_s", short_double(s.baseline_duration_s));
    kv("synth.trial_duration_s", short_double(s.trial_duration_s));
    kv("synth.bpm_min", short_double(s.bpm_min));
    kv("synth.bpm_max", short_double(s.bpm_max));
    kv("synth.hrv_jitter", short_double(s.hrv_jitter));
    kv("synth.gain_min", short_double(s.gain_min));
    kv("synth.gain_max", short_double(s.gain_max));
    kv("synth.load_multiplier", short_double(s.load_multiplier));
    kv("synth.noise_sigma_fraction", short_double(s.noise_sigma_fraction));
    kv("synth.trial_rate_sd", short_double(s.trial_rate_sd));
    kv("synth.trial_gain_sd", short_double(s.trial_gain_sd));
    kv("synth.dc_offset", short_double(s.dc_offset));
    return t;
}

inline std::string default_config_text() { return config_to_text(PipelineConfig{}); }

inline PipelineConfig parse_config(std::string_view text, const std::string& where = "config") {
    PipelineConfig c;
    std::map<std::string, std::pair<std::string, std::size_t>> entries;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        auto line = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        const std::string loc = where + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, loc + ": expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw Error(ErrorCode::ConfigError, loc + ": empty key");
        if (!entries.emplace(key, std::make_pair(value, line_no)).second) {
            throw Error(ErrorCode::ConfigError, loc + ": duplicate key '" + key + "'");
        }
        if (end == text.size()) break;
    }

    auto loc_of = [&](const std::string& key) { return where + ":" + std::to_string(entries.at(key).second); };
    auto bad = [&](const std::string& key, std::string_view what) {
        throw Error(ErrorCode::ConfigError, loc_of(key) + ": " + key + " " + std::string(what));
    };

    const auto version = entries.find("schema_version");
    if (version == entries.end()) throw Error(ErrorCode::ConfigError, where + ": missing schema_version");
    if (parse_int(version->second.first) != kSchemaVersion) {
        bad("schema_version", "must be " + std::to_string(kSchemaVersion));
    }

    auto real = [&](const std::string& key, const std::string& v) {
        // Accept plain numbers and simple fractions such as 1/128.
        if (const auto slash = v.find('/'); slash != std::string::npos) {
            const auto num = parse_double(trim(std::string_view(v).substr(0, slash)));
            const auto den = parse_double(trim(std::string_view(v).substr(slash + 1)));
            if (!num || !den || *den == 0.0) bad(key, "is not a number");
            return *num / *den;
        }
        const auto d = parse_double(v);
        if (!d || !std::isfinite(*d)) bad(key, "is not a number");
        return *d;
    };
    auto integer = [&](const std::string& key, const std::string& v) {
        const auto i = parse_int(v);
        if (!i) bad(key, "is not an integer");
        return *i;
    };
    auto boolean = [&](const std::string& key, const std::string& v) {
        if (v == "true") return true;
        if (v == "false") return false;
        bad(key, "must be true or false");
        return false;
    };
    auto list = [](const std::string& v) {
        std::vector<std::string> out;
        for (auto f : split_fields(v)) {
            if (const auto s = trim(f); !s.empty()) out.emplace_back(s);
        }
        return out;
    };

    for (const auto& [key, entry] : entries) {
        const std::string& v = entry.first;
        if (key == "schema_version") continue;
        else if (key == "input") c.input = v;
        else if (key == "output_dir") c.output_dir = v;
        else if (key == "seed") {
            const auto i = integer(key, v);
            if (i < 0) bad(key, "must be non-negative");
            c.seed = static_cast<std::uint64_t>(i);
        } else if (key == "threads") {
            const auto i = integer(key, v);
            if (i < 1) bad(key, "must be >= 1");
            c.threads = static_cast<std::size_t>(i);
        } else if (key == "strategies") {
            c.strategies.clear();
            for (const auto& name : list(v)) {
                const auto s = parse_strategy(name);
                if (!s) bad(key, "has unknown strategy '" + name + "'");
                c.strategies.push_back(*s);
            }
        } else if (key == "classifiers") {
            c.classifiers.clear();
            for (const auto& name : list(v)) {
                const auto k = parse_classifier(name);
                if (!k) bad(key, "has unknown classifier '" + name + "'");
                c.classifiers.push_back(*k);
            }
        } else if (key == "scheme") c.scheme = v;
        else if (key == "wavelet.family") {
            if (v == "fk") c.wavelet.family = WaveletFamily::FejerKorovkin;
            else if (v == "haar") c.wavelet.family = WaveletFamily::Haar;
            else bad(key, "must be fk or haar");
        } else if (key == "wavelet.order") c.wavelet.order = static_cast<int>(integer(key, v));
        else if (key == "wavelet.levels") c.wavelet.levels = static_cast<int>(integer(key, v));
        else if (key == "wavelet.threshold") {
            if (v == "literal") c.wavelet.rule = ThresholdRule::UniversalLiteral;
            else if (v == "sigma_scaled") c.wavelet.rule = ThresholdRule::UniversalSigmaScaled;
            else bad(key, "must be literal or sigma_scaled");
        } else if (key == "normalize.f_snb") c.normalize.f_snb = real(key, v);
        else if (key == "normalize.min_bpm") c.normalize.min_plausible_bpm = real(key, v);
        else if (key == "normalize.max_bpm") c.normalize.max_plausible_bpm = real(key, v);
        else if (key == "normalize.interpolation") {
            if (v == "sinc") c.interpolation = Interpolation::WindowedSinc;
            else if (v == "linear") c.interpolation = Interpolation::Linear;
            else bad(key, "must be sinc or linear");
        } else if (key == "normalize.grouping") {
            if (v == "session") c.grouping = AmplitudeGrouping::Session;
            else if (v == "subject") c.grouping = AmplitudeGrouping::Subject;
            else bad(key, "must be session or subject");
        } else if (key == "peaks.min_separation_s") c.peaks.min_separation_seconds = real(key, v);
        else if (key == "peaks.min_prominence_fraction") c.peaks.min_prominence_fraction = real(key, v);
        else if (key == "svm.C") c.classifier.svm.box_constraint = real(key, v);
        else if (key == "svm.tolerance") c.classifier.svm.tolerance = real(key, v);
        else if (key == "svm.max_iterations") c.classifier.svm.max_iterations = integer(key, v);
        else if (key == "svm.gaussian_scale") c.classifier.gaussian_scale = real(key, v);
        else if (key == "svm.poly_offset") c.classifier.poly_offset = real(key, v);
        else if (key == "cart.max_splits") c.classifier.cart.max_splits = static_cast<int>(integer(key, v));
        else if (key == "cart.min_leaf") c.classifier.cart.min_leaf = static_cast<int>(integer(key, v));
        else if (key == "evaluate.standardize_per_fold") c.standardize_per_fold = boolean(key, v);
        else if (key == "synth.subjects") c.synth.n_subjects = static_cast<int>(integer(key, v));
        else if (key == "synth.trials_per_class") c.synth.trials_per_class = static_cast<int>(integer(key, v));
        else if (key == "synth.baselines") c.synth.n_baselines = static_cast<int>(integer(key, v));
        else if (key == "synth.sample_rate") c.synth.sample_rate = real(key, v);
        else if (key == "synth.baseline_duration_s") c.synth.baseline_duration_s = real(key, v);
        else if (key == "synth.trial_duration_s") c.synth.trial_duration_s = real(key, v);
        else if (key == "synth.bpm_min") c.synth.bpm_min = real(key, v);
        else if (key == "synth.bpm_max") c.synth.bpm_max = real(key, v);
        else if (key == "synth.hrv_jitter") c.synth.hrv_jitter = real(key, v);
        else if (key == "synth.gain_min") c.synth.gain_min = real(key, v);
        else if (key == "synth.gain_max") c.synth.gain_max = real(key, v);
        else if (key == "synth.load_multiplier") c.synth.load_multiplier = real(key, v);
        else if (key == "synth.noise_sigma_fraction") c.synth.noise_sigma_fraction = real(key, v);
        else if (key == "synth.trial_rate_sd") c.synth.trial_rate_sd = real(key, v);
        else if (key == "synth.trial_gain_sd") c.synth.trial_gain_sd = real(key, v);
        else if (key == "synth.dc_offset") c.synth.dc_offset = real(key, v);
        else throw Error(ErrorCode::ConfigError, loc_of(key) + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

}  // namespace ppgnorm
