#pragma once

// Stable file formats and run bookkeeping. Every JSONL writer emits a
// canonical sort order and shortest round-trip float rendering, so stage
// outputs are diff-stable and digest-stable. Writes go through a temp
// file plus rename.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vtgforge/collection.hpp"
#include "vtgforge/core.hpp"
#include "vtgforge/eval.hpp"
#include "vtgforge/factory.hpp"
#include "vtgforge/rng.hpp"
#include "vtgforge/vocab.hpp"

namespace vtgforge::io {

using nlohmann::json;

class FileFormatError : public std::runtime_error {
public:
    FileFormatError(const std::string& path, std::size_t line, const std::string& message)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + message),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

inline std::string digest_bytes(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

inline std::string digest_file(const std::string& path) { return digest_bytes(read_file(path)); }

// --- generic JSONL ---------------------------------------------------

inline std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<json> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw FileFormatError(path, line_number, "malformed JSON object");
        }
        records.push_back(std::move(record));
    }
    return records;
}

inline void write_jsonl(const std::string& path, const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    atomic_write(path, out);
}

// --- annotations ------------------------------------------------------

inline json annotation_to_json(const MomentAnnotation& ann) {
    json j;
    j["video_id"] = ann.video_id;
    j["start"] = ann.interval.start;
    j["end"] = ann.interval.end;
    j["caption"] = ann.caption;
    j["target_words"] = ann.target_words;
    j["provenance"] =
        ann.provenance == Provenance::Automated ? "automated" : "human_corrected";
    return j;
}

inline MomentAnnotation annotation_from_json(const json& j, const std::string& path,
                                             std::size_t line) {
    for (const char* field : {"video_id", "start", "end", "caption", "provenance"}) {
        if (!j.contains(field)) {
            throw FileFormatError(path, line, std::string("missing field \"") + field + "\"");
        }
    }
    MomentAnnotation ann;
    try {
        ann.video_id = j.at("video_id").get<std::string>();
        ann.interval = TimeInterval{j.at("start").get<double>(), j.at("end").get<double>()};
        ann.caption = j.at("caption").get<std::string>();
        if (j.contains("target_words")) {
            ann.target_words = j.at("target_words").get<std::vector<std::string>>();
        }
        std::string prov = j.at("provenance").get<std::string>();
        if (prov == "automated") {
            ann.provenance = Provenance::Automated;
        } else if (prov == "human_corrected") {
            ann.provenance = Provenance::HumanCorrected;
        } else {
            throw FileFormatError(path, line, "unknown provenance \"" + prov + "\"");
        }
    } catch (const json::exception& e) {
        throw FileFormatError(path, line, e.what());
    }
    if (!ann.interval.valid()) throw FileFormatError(path, line, "invalid interval");
    if (ann.caption.empty()) throw FileFormatError(path, line, "empty caption");
    return ann;
}

inline std::vector<MomentAnnotation> read_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<MomentAnnotation> annotations;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw FileFormatError(path, line_number, "malformed JSON object");
        }
        annotations.push_back(annotation_from_json(record, path, line_number));
    }
    return annotations;
}

inline void write_annotations(const std::string& path,
                              std::vector<MomentAnnotation> annotations) {
    std::sort(annotations.begin(), annotations.end(), [](const auto& a, const auto& b) {
        return std::tie(a.video_id, a.interval.start, a.interval.end, a.caption) <
               std::tie(b.video_id, b.interval.start, b.interval.end, b.caption);
    });
    std::vector<json> records;
    records.reserve(annotations.size());
    for (const auto& ann : annotations) records.push_back(annotation_to_json(ann));
    write_jsonl(path, records);
}

// --- videos -----------------------------------------------------------

inline std::vector<VideoRecord> read_videos(const std::string& path) {
    std::vector<VideoRecord> videos;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        VideoRecord v;
        try {
            v.video_id = j.at("video_id").get<std::string>();
            v.duration = j.at("duration").get<double>();
            if (j.contains("source_keyword") && !j.at("source_keyword").is_null()) {
                v.source_keyword = j.at("source_keyword").get<std::string>();
            }
            if (j.contains("domain_tag") && !j.at("domain_tag").is_null()) {
                v.domain_tag = j.at("domain_tag").get<std::string>();
            }
        } catch (const json::exception& e) {
            throw FileFormatError(path, line, e.what());
        }
        if (!(v.duration > 0.0)) throw FileFormatError(path, line, "duration must be positive");
        videos.push_back(std::move(v));
    }
    std::set<std::string> ids;
    for (const auto& v : videos) {
        if (!ids.insert(v.video_id).second) {
            throw std::runtime_error(path + ": duplicate video_id " + v.video_id);
        }
    }
    return videos;
}

inline void write_videos(const std::string& path, std::vector<VideoRecord> videos) {
    std::sort(videos.begin(), videos.end(),
              [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
    std::vector<json> records;
    for (const auto& v : videos) {
        json j;
        j["video_id"] = v.video_id;
        j["duration"] = v.duration;
        if (v.source_keyword) j["source_keyword"] = *v.source_keyword;
        if (v.domain_tag) j["domain_tag"] = *v.domain_tag;
        records.push_back(std::move(j));
    }
    write_jsonl(path, records);
}

// --- collected videos (plan output) -----------------------------------

inline void write_collected(const std::string& path,
                            std::vector<collect::CollectedVideo> collected) {
    std::sort(collected.begin(), collected.end(), [](const auto& a, const auto& b) {
        return a.candidate.video_id < b.candidate.video_id;
    });
    std::vector<json> records;
    for (const auto& c : collected) {
        json j;
        j["video_id"] = c.candidate.video_id;
        j["duration"] = c.candidate.duration;
        j["url"] = c.candidate.url;
        j["target_word"] = c.target_word;
        j["keyword"] = c.keyword;
        records.push_back(std::move(j));
    }
    write_jsonl(path, records);
}

inline std::vector<collect::CollectedVideo> read_collected(const std::string& path) {
    std::vector<collect::CollectedVideo> collected;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        try {
            collect::CollectedVideo c;
            c.candidate.video_id = j.at("video_id").get<std::string>();
            c.candidate.duration = j.at("duration").get<double>();
            c.candidate.url = j.value("url", std::string{});
            c.target_word = j.value("target_word", std::string{});
            c.keyword = j.value("keyword", std::string{});
            collected.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw FileFormatError(path, line, e.what());
        }
    }
    return collected;
}

// --- expansion state ---------------------------------------------------

inline json expansion_state_to_json(const collect::ExpansionState& state) {
    json j;
    j["round"] = state.round;
    j["remaining_uncovered"] = state.remaining_uncovered;
    j["collected_video_ids"] = state.collected_video_ids;
    j["coverage_history"] = state.coverage_history;
    return j;
}

inline collect::ExpansionState read_expansion_state(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error(path + ": malformed expansion state");
    }
    collect::ExpansionState state;
    state.round = j.value("round", 0);
    if (j.contains("remaining_uncovered")) {
        for (const auto& w : j.at("remaining_uncovered")) {
            state.remaining_uncovered.insert(w.get<std::string>());
        }
    }
    if (j.contains("collected_video_ids")) {
        for (const auto& v : j.at("collected_video_ids")) {
            state.collected_video_ids.insert(v.get<std::string>());
        }
    }
    if (j.contains("coverage_history")) {
        state.coverage_history = j.at("coverage_history").get<std::vector<double>>();
    }
    return state;
}

inline void write_expansion_state(const std::string& path, const collect::ExpansionState& state) {
    atomic_write(path, expansion_state_to_json(state).dump(2) + "\n");
}

// --- training samples --------------------------------------------------

inline json sample_to_json(const factory::TrainingSample& sample) {
    json j;
    j["sample_id"] = sample.sample_id;
    j["task"] = factory::to_string(sample.task);
    j["video_id"] = sample.video_id;
    j["prompt"] = sample.prompt;
    j["target"] = sample.target;
    j["meta"] = sample.meta;
    return j;
}

// Factory emission order is already canonical; preserved as-is.
inline void write_samples(const std::string& path,
                          const std::vector<factory::TrainingSample>& samples) {
    std::vector<json> records;
    records.reserve(samples.size());
    for (const auto& s : samples) records.push_back(sample_to_json(s));
    write_jsonl(path, records);
}

// --- word-list style inputs --------------------------------------------

inline std::vector<std::string> read_word_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto w = trim(line);
        if (!w.empty()) words.emplace_back(w);
    }
    return words;
}

// One word per line, lowercase enforced, no internal whitespace.
inline vocab::Vocabulary read_vocabulary(const std::string& path) {
    vocab::Vocabulary v;
    v.source_label = path;
    std::set<std::string> words;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        auto w = trim(line);
        if (w.empty()) continue;
        std::string lower = to_lower(w);
        if (lower.find(' ') != std::string::npos || lower.find('\t') != std::string::npos) {
            throw FileFormatError(path, line_number, "vocabulary entries cannot contain spaces");
        }
        words.insert(lower);
    }
    v.words.assign(words.begin(), words.end());
    return v;
}

inline std::set<std::string> read_dictionary(const std::string& path) {
    std::set<std::string> dict;
    for (const auto& w : read_word_list(path)) dict.insert(to_lower(w));
    return dict;
}

// Tab-separated `word<TAB>POS`, POS one of NOUN VERB ADJ OTHER. The
// first tag listed for a word wins.
inline vocab::PosLexicon read_pos_lexicon(const std::string& path) {
    vocab::PosLexicon lexicon;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FileFormatError(path, line_number, "expected word<TAB>POS");
        }
        std::string word = to_lower(trim(line.substr(0, tab)));
        std::string tag_text(trim(line.substr(tab + 1)));
        vocab::PosTag tag;
        if (tag_text == "NOUN") {
            tag = vocab::PosTag::Noun;
        } else if (tag_text == "VERB") {
            tag = vocab::PosTag::Verb;
        } else if (tag_text == "ADJ") {
            tag = vocab::PosTag::Adjective;
        } else if (tag_text == "OTHER") {
            tag = vocab::PosTag::Other;
        } else {
            throw FileFormatError(path, line_number, "unknown POS \"" + tag_text + "\"");
        }
        lexicon.emplace(std::move(word), tag);  // first tag wins
    }
    return lexicon;
}

// Tab-separated `word<TAB>frequency`; scientific notation accepted.
inline vocab::FrequencyTable read_frequency_table(const std::string& path) {
    vocab::FrequencyTable table;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FileFormatError(path, line_number, "expected word<TAB>frequency");
        }
        std::string word = to_lower(trim(line.substr(0, tab)));
        double freq = 0.0;
        try {
            freq = std::stod(std::string(trim(line.substr(tab + 1))));
        } catch (const std::exception&) {
            throw FileFormatError(path, line_number, "unparsable frequency");
        }
        if (!(freq > 0.0) || freq > 1.0) {
            throw FileFormatError(path, line_number, "frequency must lie in (0, 1]");
        }
        table.frequencies[word] = freq;
    }
    return table;
}

// --- predictions / golds for evaluation ---------------------------------

struct RawPrediction {
    std::string item_id;
    std::optional<std::string> raw_output;     // model text, needs parsing
    std::optional<TimeInterval> interval;      // pre-parsed mode
};

inline std::vector<RawPrediction> read_predictions(const std::string& path) {
    std::vector<RawPrediction> preds;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        RawPrediction p;
        try {
            p.item_id = j.at("item_id").get<std::string>();
            if (j.contains("raw_output")) {
                p.raw_output = j.at("raw_output").get<std::string>();
            } else if (j.contains("start") && j.contains("end")) {
                p.interval = TimeInterval{j.at("start").get<double>(), j.at("end").get<double>()};
            } else {
                throw FileFormatError(path, line,
                                      "prediction needs raw_output or start/end");
            }
        } catch (const json::exception& e) {
            throw FileFormatError(path, line, e.what());
        }
        preds.push_back(std::move(p));
    }
    return preds;
}

// Test-set items: gold interval plus the caption used for rare-splitting.
struct EvalItem {
    std::string item_id;
    std::string video_id;
    TimeInterval interval;
    std::string caption;
};

inline std::vector<EvalItem> read_eval_items(const std::string& path) {
    std::vector<EvalItem> items;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        try {
            EvalItem item;
            item.item_id = j.at("item_id").get<std::string>();
            item.video_id = j.at("video_id").get<std::string>();
            item.interval = TimeInterval{j.at("start").get<double>(), j.at("end").get<double>()};
            item.caption = j.at("caption").get<std::string>();
            items.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw FileFormatError(path, line, e.what());
        }
    }
    return items;
}

// Baseline scores for hard-example selection.
struct ScoredSample {
    std::string sample_id;
    double iou = 0.0;
};

inline std::vector<ScoredSample> read_scores(const std::string& path) {
    std::vector<ScoredSample> scores;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        try {
            scores.push_back({j.at("sample_id").get<std::string>(),
                              j.at("iou").get<double>()});
        } catch (const json::exception& e) {
            throw FileFormatError(path, line, e.what());
        }
    }
    return scores;
}

// --- eval report -------------------------------------------------------

inline json eval_report_to_json(const eval::EvalReport& report) {
    json j;
    j["split"] = eval::to_string(report.split);
    j["n_items"] = report.n_items;
    j["empty"] = report.empty;
    json recalls;
    for (const auto& [theta, pct] : report.recall) {
        recalls[format_seconds(theta)] = pct;  // "0.3", "0.5", "0.7"
    }
    j["recall"] = recalls;
    return j;
}

inline json dataset_stats_to_json(const eval::DatasetStats& stats) {
    json j;
    j["total_duration_hours"] = stats.total_duration_hours;
    j["duration_per_video_minutes"] = stats.duration_per_video_minutes;
    j["duration_per_moment_seconds"] = stats.duration_per_moment_seconds;
    j["total_queries"] = stats.total_queries;
    j["words_per_query"] = stats.words_per_query;
    j["unique_nouns"] = stats.unique_nouns;
    j["unique_verbs"] = stats.unique_verbs;
    j["unique_adjectives"] = stats.unique_adjectives;
    j["has_moments"] = stats.has_moments;
    return j;
}

// --- pipeline config -----------------------------------------------------

struct PipelineConfig {
    std::string vocabulary_path;
    std::string dictionary_path;
    std::string pos_lexicon_path;
    std::string frequency_table_path;
    std::string templates_dir;  // optional; built-in templates when empty
    std::string client_mode = "mock";
    std::uint64_t seed = 0;
    collect::RoundLimits limits;
    double coverage_target = collect::kDefaultCoverageTarget;
    double rare_threshold = vocab::kRareFrequencyThreshold;
    double agreement_iou = 0.5;
    int max_rounds = 10;
    std::string llm_base_url;
    std::string search_base_url;
};

inline PipelineConfig parse_config(const json& j, const std::string& base_dir) {
    PipelineConfig cfg;
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        std::filesystem::path path(p);
        if (path.is_absolute() || base_dir.empty()) return p;
        return (std::filesystem::path(base_dir) / path).string();
    };
    cfg.vocabulary_path = resolve(j.value("vocabulary", std::string{}));
    cfg.dictionary_path = resolve(j.value("dictionary", std::string{}));
    cfg.pos_lexicon_path = resolve(j.value("pos_lexicon", std::string{}));
    cfg.frequency_table_path = resolve(j.value("frequency_table", std::string{}));
    cfg.templates_dir = resolve(j.value("templates_dir", std::string{}));
    cfg.client_mode = j.value("client_mode", std::string{"mock"});
    cfg.seed = j.value("seed", 0ull);
    cfg.coverage_target = j.value("coverage_target", collect::kDefaultCoverageTarget);
    cfg.rare_threshold = j.value("rare_threshold", vocab::kRareFrequencyThreshold);
    cfg.agreement_iou = j.value("agreement_iou", 0.5);
    cfg.max_rounds = j.value("max_rounds", 10);
    cfg.llm_base_url = j.value("llm_base_url", std::string{});
    cfg.search_base_url = j.value("search_base_url", std::string{});
    if (j.contains("limits")) {
        const auto& l = j.at("limits");
        cfg.limits.word_budget = l.value("word_budget", cfg.limits.word_budget);
        cfg.limits.max_keywords_per_word =
            l.value("max_keywords_per_word", cfg.limits.max_keywords_per_word);
        cfg.limits.max_candidates_per_keyword =
            l.value("max_candidates_per_keyword", cfg.limits.max_candidates_per_keyword);
        cfg.limits.max_in_flight = l.value("max_in_flight", cfg.limits.max_in_flight);
        cfg.limits.retry_attempts = l.value("retry_attempts", cfg.limits.retry_attempts);
        cfg.limits.retry_backoff_ms = l.value("retry_backoff_ms", cfg.limits.retry_backoff_ms);
    }

    for (double threshold : {cfg.coverage_target, cfg.agreement_iou}) {
        if (threshold < 0.0 || threshold > 1.0) {
            throw std::runtime_error("config: thresholds must lie in [0, 1]");
        }
    }
    if (cfg.client_mode != "mock" && cfg.client_mode != "live") {
        throw std::runtime_error("config: client_mode must be \"mock\" or \"live\"");
    }
    for (const std::string& path :
         {cfg.vocabulary_path, cfg.dictionary_path, cfg.pos_lexicon_path,
          cfg.frequency_table_path}) {
        if (!path.empty() && !std::filesystem::exists(path)) {
            throw std::runtime_error("config: referenced file does not exist: " + path);
        }
    }
    if (!cfg.templates_dir.empty() && !std::filesystem::exists(cfg.templates_dir)) {
        throw std::runtime_error("config: templates_dir does not exist: " + cfg.templates_dir);
    }
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error(path + ": malformed config JSON");
    }
    return parse_config(j, std::filesystem::path(path).parent_path().string());
}

// Digest over the canonical serialization (sorted keys, no whitespace),
// so formatting changes do not perturb it but any field change does.
inline std::string config_digest(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw std::runtime_error(path + ": malformed config JSON");
    return digest_bytes(j.dump());
}

// --- run manifest --------------------------------------------------------

inline constexpr const char* kToolVersion = "vtgforge 0.1.0";

// Digest record for one pipeline run: config, inputs, per-stage outputs.
// Paths are recorded exactly as given on the command line, so runs driven
// from a work directory with relative paths reproduce byte-identically.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::map<std::string, std::string> inputs;                           // path -> digest
    std::map<std::string, std::map<std::string, std::string>> stages;    // stage -> path -> digest
};

inline json manifest_to_json(const RunManifest& m) {
    json j;
    j["tool_version"] = m.tool_version;
    j["seed"] = m.seed;
    j["config_digest"] = m.config_digest;
    j["inputs"] = m.inputs;
    json stages = json::object();
    for (const auto& [stage, outputs] : m.stages) stages[stage] = outputs;
    j["stages"] = stages;
    return j;
}

inline RunManifest read_manifest(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error(path + ": malformed manifest");
    }
    RunManifest m;
    m.tool_version = j.value("tool_version", std::string{});
    m.seed = j.value("seed", 0ull);
    m.config_digest = j.value("config_digest", std::string{});
    if (j.contains("inputs")) {
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    }
    if (j.contains("stages")) {
        m.stages =
            j.at("stages").get<std::map<std::string, std::map<std::string, std::string>>>();
    }
    return m;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
    atomic_write(path, manifest_to_json(m).dump(2) + "\n");
}

// Read-modify-write accumulation: each stage records the digests of the
// files it read and wrote under its own name.
inline void record_stage(const std::string& manifest_path, const std::string& stage,
                         std::uint64_t seed, const std::string& config_digest_value,
                         const std::vector<std::string>& input_paths,
                         const std::vector<std::string>& output_paths) {
    RunManifest m;
    if (std::filesystem::exists(manifest_path)) {
        m = read_manifest(manifest_path);
    }
    m.tool_version = kToolVersion;
    m.seed = seed;
    if (!config_digest_value.empty()) m.config_digest = config_digest_value;
    for (const auto& p : input_paths) m.inputs[p] = digest_file(p);
    auto& outputs = m.stages[stage];
    for (const auto& p : output_paths) outputs[p] = digest_file(p);
    write_manifest(manifest_path, m);
}

}  // namespace vtgforge::io
