#pragma once

// CSV formats: recordings, manifests, features, profiles and reports.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/evaluate.hpp"
#include "ppgnorm/features.hpp"
#include "ppgnorm/normalize.hpp"
#include "ppgnorm/signal_model.hpp"
#include "ppgnorm/synth.hpp"
#include "ppgnorm/util.hpp"

namespace ppgnorm::io {

namespace fs = std::filesystem;

inline constexpr std::string_view kRecordingHeader = "sample_index,ppg";
inline constexpr std::string_view kManifestHeader = "subject_id,task,trial_index,sample_rate,path";
inline constexpr std::string_view kSummaryHeader = "strategy,classifier,accuracy,f1_high,f1_low";
inline constexpr std::string_view kFoldHeader = "strategy,classifier,held_out_subject,tp,fp,fn,tn";
inline constexpr std::string_view kProfileHeader = "subject_id,f_b,f_Nb,f_SNc";

inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

// Splits on LF, dropping a trailing CR and a final empty line.
inline std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

inline std::string recording_to_csv(std::span<const double> samples) {
    std::string out;
    out.reserve(samples.size() * 26 + 20);
    out += kRecordingHeader;
    out += '\n';
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(samples[i]);
        out += '\n';
    }
    return out;
}

inline std::vector<double> parse_recording_csv(std::string_view text, const std::string& where) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines.front()) != kRecordingHeader) {
        throw Error(ErrorCode::MalformedRow, where + ":1: expected header '" + std::string(kRecordingHeader) + "'");
    }
    std::vector<double> samples;
    samples.reserve(lines.size() - 1);
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty()) continue;
        const std::string loc = where + ":" + std::to_string(ln + 1);
        const auto fields = split_fields(line);
        if (fields.size() != 2) throw Error(ErrorCode::MalformedRow, loc + ": expected 2 fields");
        const auto index = parse_int(trim(fields[0]));
        if (!index || *index != static_cast<long long>(samples.size())) {
            throw Error(ErrorCode::MalformedRow, loc + ": sample_index must be " + std::to_string(samples.size()));
        }
        const auto field = trim(fields[1]);
        const auto value = parse_double(field);
        if (!value) {
            const bool non_finite = field == "nan" || field == "NaN" || field == "inf" || field == "-inf" ||
                                    field == "Inf" || field == "-Inf";
            throw Error(non_finite ? ErrorCode::NonFiniteSample : ErrorCode::MalformedRow,
                        loc + ": bad sample value '" + std::string(field) + "'");
        }
        if (!std::isfinite(*value)) throw Error(ErrorCode::NonFiniteSample, loc + ": non-finite sample");
        samples.push_back(*value);
    }
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, where + ": no samples");
    return samples;
}

struct ManifestRow {
    std::string subject_id;
    Task task = Task::Baseline;
    int trial_index = 0;
    double sample_rate = 0.0;
    std::string path;  // relative to the manifest directory unless absolute
    std::string session;
    Domain domain = Domain::DiscreteTime;
};

inline std::string domain_name(Domain d) { return d == Domain::DiscreteTime ? "DTD" : "SND"; }

inline std::string manifest_to_csv(std::span<const ManifestRow> rows) {
    bool with_session = false;
    bool with_domain = false;
    for (const auto& r : rows) {
        with_session |= !r.session.empty();
        with_domain |= r.domain != Domain::DiscreteTime;
    }
    std::string out(kManifestHeader);
    if (with_session) out += ",session";
    if (with_domain) out += ",domain";
    out += '\n';
    for (const auto& r : rows) {
        out += r.subject_id + ',' + std::string(task_name(r.task)) + ',' + std::to_string(r.trial_index) + ',' +
               format_double(r.sample_rate) + ',' + r.path;
        if (with_session) out += ',' + r.session;
        if (with_domain) out += ',' + domain_name(r.domain);
        out += '\n';
    }
    return out;
}

inline std::vector<ManifestRow> parse_manifest_csv(std::string_view text, const std::string& where) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw Error(ErrorCode::MalformedRow, where + ": empty manifest");
    const auto header = split_fields(trim(lines.front()));
    const auto required = split_fields(kManifestHeader);
    if (header.size() < required.size() || !std::equal(required.begin(), required.end(), header.begin())) {
        throw Error(ErrorCode::MalformedRow, where + ":1: expected header '" + std::string(kManifestHeader) + "'");
    }
    int session_col = -1;
    int domain_col = -1;
    for (std::size_t c = required.size(); c < header.size(); ++c) {
        if (header[c] == "session") session_col = static_cast<int>(c);
        else if (header[c] == "domain") domain_col = static_cast<int>(c);
        else throw Error(ErrorCode::MalformedRow, where + ":1: unknown column '" + std::string(header[c]) + "'");
    }

    std::vector<ManifestRow> rows;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty()) continue;
        const std::string loc = where + ":" + std::to_string(ln + 1);
        const auto f = split_fields(line);
        if (f.size() != header.size()) {
            throw Error(ErrorCode::MalformedRow, loc + ": expected " + std::to_string(header.size()) + " fields");
        }
        ManifestRow row;
        row.subject_id = std::string(trim(f[0]));
        if (row.subject_id.empty()) throw Error(ErrorCode::MalformedRow, loc + ": empty subject_id");
        const auto task = parse_task(trim(f[1]));
        if (!task) throw Error(ErrorCode::UnknownTask, loc + ": unknown task '" + std::string(trim(f[1])) + "'");
        row.task = *task;
        const auto idx = parse_int(trim(f[2]));
        if (!idx) throw Error(ErrorCode::MalformedRow, loc + ": bad trial_index");
        row.trial_index = static_cast<int>(*idx);
        const auto rate = parse_double(trim(f[3]));
        if (!rate || !(*rate > 0.0)) throw Error(ErrorCode::MalformedRow, loc + ": bad sample_rate");
        row.sample_rate = *rate;
        row.path = std::string(trim(f[4]));
        if (session_col >= 0) row.session = std::string(trim(f[static_cast<std::size_t>(session_col)]));
        if (domain_col >= 0) {
            const auto d = trim(f[static_cast<std::size_t>(domain_col)]);
            if (d == "DTD") row.domain = Domain::DiscreteTime;
            else if (d == "SND") row.domain = Domain::SubjectNormalized;
            else throw Error(ErrorCode::MalformedRow, loc + ": domain must be DTD or SND");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Sessions in order of first appearance; trials keep manifest order.
inline std::vector<SubjectSession> ingest(const fs::path& manifest_path) {
    const auto rows = parse_manifest_csv(read_text(manifest_path), manifest_path.string());
    const fs::path base = manifest_path.parent_path();
    std::vector<SubjectSession> sessions;
    std::map<std::string, std::size_t> index;
    for (const auto& row : rows) {
        const fs::path p = fs::path(row.path).is_absolute() ? fs::path(row.path) : base / row.path;
        if (!fs::exists(p)) {
            throw Error(ErrorCode::MissingFile, manifest_path.string() + ": recording " + p.string() +
                                                    " (subject " + row.subject_id + ", trial " +
                                                    std::to_string(row.trial_index) + ") does not exist");
        }
        Trial t;
        t.recording.samples = parse_recording_csv(read_text(p), p.string());
        t.recording.spec = {row.sample_rate, row.domain};
        t.recording.subject_id = row.subject_id;
        t.task = row.task;
        t.trial_index = row.trial_index;
        t.session = row.session;

        auto [it, inserted] = index.emplace(row.subject_id, sessions.size());
        if (inserted) sessions.push_back({row.subject_id, {}, {}});
        auto& s = sessions[it->second];
        (t.task == Task::Baseline ? s.baselines : s.task_trials).push_back(std::move(t));
    }
    for (const auto& s : sessions) {
        if (s.baselines.empty()) {
            throw Error(ErrorCode::EmptyInput, manifest_path.string() + ": subject " + s.subject_id +
                                                   " has no Baseline trial");
        }
    }
    return sessions;
}

inline std::string recording_file_name(const std::string& subject, const Trial& t) {
    return subject + "_" + std::to_string(t.trial_index) + "_" + std::string(task_name(t.task)) + ".csv";
}

// Writes every trial as <dir>/recordings/<file> and returns the manifest path.
inline fs::path write_sessions(const fs::path& dir, std::span<const SubjectSession> sessions) {
    std::vector<ManifestRow> rows;
    for (const auto& s : sessions) {
        auto emit = [&](const Trial& t) {
            const std::string rel = "recordings/" + recording_file_name(s.subject_id, t);
            write_text(dir / rel, recording_to_csv(t.recording.samples));
            rows.push_back({s.subject_id, t.task, t.trial_index, t.recording.spec.sample_rate, rel, t.session,
                            t.recording.spec.domain});
        };
        for (const auto& t : s.baselines) emit(t);
        for (const auto& t : s.task_trials) emit(t);
    }
    const fs::path manifest = dir / "manifest.csv";
    write_text(manifest, manifest_to_csv(rows));
    return manifest;
}

struct FeatureRow {
    std::string subject_id;
    Task task = Task::Baseline;
    int trial_index = 0;
    int segment = 0;
    ClassLabel label = ClassLabel::LowCL;
    FeatureVector features;
};

inline std::string features_header() {
    std::string h = "subject_id,task,trial_index,segment,label";
    for (auto name : kFeatureNames) {
        h += ',';
        h += name;
    }
    return h;
}

inline std::string features_to_csv(std::span<const FeatureRow> rows) {
    std::string out = features_header() + '\n';
    for (const auto& r : rows) {
        out += r.subject_id + ',' + std::string(task_name(r.task)) + ',' + std::to_string(r.trial_index) + ',' +
               std::to_string(r.segment) + ',' + std::string(label_name(r.label));
        for (double v : r.features.to_array()) out += ',' + format_double(v);
        out += '\n';
    }
    return out;
}

inline std::vector<FeatureRow> parse_features_csv(std::string_view text, const std::string& where) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines.front()) != features_header()) {
        throw Error(ErrorCode::MalformedRow, where + ":1: expected header '" + features_header() + "'");
    }
    std::vector<FeatureRow> rows;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty()) continue;
        const std::string loc = where + ":" + std::to_string(ln + 1);
        const auto f = split_fields(line);
        if (f.size() != 5 + kFeatureCount) throw Error(ErrorCode::MalformedRow, loc + ": wrong field count");
        FeatureRow r;
        r.subject_id = std::string(f[0]);
        const auto task = parse_task(f[1]);
        if (!task) throw Error(ErrorCode::UnknownTask, loc + ": unknown task '" + std::string(f[1]) + "'");
        r.task = *task;
        const auto idx = parse_int(f[2]);
        const auto seg = parse_int(f[3]);
        const auto label = parse_label(f[4]);
        if (!idx || !seg) throw Error(ErrorCode::MalformedRow, loc + ": bad trial_index/segment");
        if (!label) throw Error(ErrorCode::UnlabeledInstance, loc + ": bad label '" + std::string(f[4]) + "'");
        r.trial_index = static_cast<int>(*idx);
        r.segment = static_cast<int>(*seg);
        r.label = *label;
        std::array<double, kFeatureCount> values{};
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            const auto v = parse_double(f[5 + j]);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorCode::NonFiniteSample, loc + ": bad value for " + std::string(kFeatureNames[j]));
            }
            values[j] = *v;
        }
        r.features = FeatureVector::from_array(values);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string profiles_to_csv(std::span<const BaselineProfile> profiles) {
    std::string out = std::string(kProfileHeader) + '\n';
    for (const auto& p : profiles) {
        out += p.subject_id + ',' + format_double(p.f_b) + ',' + format_double(p.f_nb) + ',' +
               format_double(p.f_snc) + '\n';
    }
    return out;
}

// Crest indices are ';'-separated.
inline std::string ground_truth_to_csv(std::span<const GroundTruthRow> rows) {
    std::string out = "subject_id,task,trial_index,true_bpm,crests\n";
    for (const auto& r : rows) {
        out += r.subject_id + ',' + std::string(task_name(r.task)) + ',' + std::to_string(r.trial_index) + ',' +
               format_double(r.true_bpm) + ',';
        for (std::size_t i = 0; i < r.crests.size(); ++i) {
            if (i) out += ';';
            out += std::to_string(r.crests[i]);
        }
        out += '\n';
    }
    return out;
}

struct SummaryRow {
    std::string strategy;
    std::string classifier;
    double accuracy = 0.0;
    double f1_high = 0.0;
    double f1_low = 0.0;
};

inline std::string summary_to_csv(std::span<const SummaryRow> rows) {
    std::string out = std::string(kSummaryHeader) + '\n';
    for (const auto& r : rows) {
        out += r.strategy + ',' + r.classifier + ',' + format_fixed(r.accuracy, 6) + ',' +
               format_fixed(r.f1_high, 6) + ',' + format_fixed(r.f1_low, 6) + '\n';
    }
    return out;
}

inline std::vector<SummaryRow> parse_summary_csv(std::string_view text, const std::string& where) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines.front()) != kSummaryHeader) {
        throw Error(ErrorCode::MalformedRow, where + ":1: expected header '" + std::string(kSummaryHeader) + "'");
    }
    std::vector<SummaryRow> rows;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty()) continue;
        const auto f = split_fields(line);
        const std::string loc = where + ":" + std::to_string(ln + 1);
        if (f.size() != 5) throw Error(ErrorCode::MalformedRow, loc + ": expected 5 fields");
        const auto acc = parse_double(f[2]);
        const auto fh = parse_double(f[3]);
        const auto fl = parse_double(f[4]);
        if (!acc || !fh || !fl) throw Error(ErrorCode::MalformedRow, loc + ": bad metric value");
        rows.push_back({std::string(f[0]), std::string(f[1]), *acc, *fh, *fl});
    }
    return rows;
}

struct FoldRow {
    std::string strategy;
    std::string classifier;
    std::string held_out;
    ConfusionMatrix confusion;
};

inline std::string folds_to_csv(std::span<const FoldRow> rows) {
    std::string out = std::string(kFoldHeader) + '\n';
    for (const auto& r : rows) {
        out += r.strategy + ',' + r.classifier + ',' + r.held_out + ',' + std::to_string(r.confusion.tp) + ',' +
               std::to_string(r.confusion.fp) + ',' + std::to_string(r.confusion.fn) + ',' +
               std::to_string(r.confusion.tn) + '\n';
    }
    return out;
}

// Fixed-width text table, one row per (strategy, classifier).
inline std::string render_summary_table(std::span<const SummaryRow> rows) {
    std::size_t w_strategy = std::string_view("strategy").size();
    std::size_t w_classifier = std::string_view("classifier").size();
    for (const auto& r : rows) {
        w_strategy = std::max(w_strategy, r.strategy.size());
        w_classifier = std::max(w_classifier, r.classifier.size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    auto lpad = [](std::string s, std::size_t w) {
        return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
    };
    std::string out = pad("strategy", w_strategy) + "  " + pad("classifier", w_classifier) + "  " +
                      lpad("accuracy", 8) + "  " + lpad("f1_high", 8) + "  " + lpad("f1_low", 8) + '\n';
    out += std::string(w_strategy, '-') + "  " + std::string(w_classifier, '-') + "  " + std::string(8, '-') +
           "  " + std::string(8, '-') + "  " + std::string(8, '-') + '\n';
    for (const auto& r : rows) {
        out += pad(r.strategy, w_strategy) + "  " + pad(r.classifier, w_classifier) + "  " +
               lpad(format_fixed(r.accuracy, 4), 8) + "  " + lpad(format_fixed(r.f1_high, 4), 8) + "  " +
               lpad(format_fixed(r.f1_low, 4), 8) + '\n';
    }
    return out;
}

// Long format for plotting: strategy,classifier,metric,value.
inline std::string summary_long_csv(std::span<const SummaryRow> rows) {
    std::string out = "strategy,classifier,metric,value\n";
    for (const auto& r : rows) {
        out += r.strategy + ',' + r.classifier + ",accuracy," + format_fixed(r.accuracy, 6) + '\n';
        out += r.strategy + ',' + r.classifier + ",f1_high," + format_fixed(r.f1_high, 6) + '\n';
        out += r.strategy + ',' + r.classifier + ",f1_low," + format_fixed(r.f1_low, 6) + '\n';
    }
    return out;
}

}  // namespace ppgnorm::io
