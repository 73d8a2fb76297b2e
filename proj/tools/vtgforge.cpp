// vtgforge command-line tool: chains the dataset pipeline stages
// (coverage analysis, expansion planning, annotation, training-data
// construction, reward scoring, evaluation, statistics) over the stable
// JSONL schemas, with optional run-manifest recording for reproducible
// pipelines.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vtgforge/http_client.hpp"
#include "vtgforge/vtgforge.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vtgforge;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string manifest_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool mock = false;
};

io::PipelineConfig effective_config(const GlobalOptions& g) {
    io::PipelineConfig cfg;
    if (!g.config_path.empty()) cfg = io::load_config(g.config_path);
    if (g.seed_set) cfg.seed = g.seed;
    if (g.mock) cfg.client_mode = "mock";
    return cfg;
}

std::unique_ptr<collect::AnnotatorClient> make_client(const io::PipelineConfig& cfg) {
    if (cfg.client_mode == "mock") {
        return std::make_unique<collect::MockAnnotatorClient>(cfg.seed);
    }
    const char* llm_key = std::getenv("VTGFORGE_LLM_KEY");
    const char* search_key = std::getenv("VTGFORGE_SEARCH_KEY");
    if (!llm_key || !search_key) {
        throw std::runtime_error(
            "live client mode needs VTGFORGE_LLM_KEY and VTGFORGE_SEARCH_KEY in the "
            "environment (or pass --mock)");
    }
    collect::HttpClientConfig http;
    http.llm_base_url = cfg.llm_base_url;
    http.search_base_url = cfg.search_base_url;
    http.llm_key = llm_key;
    http.search_key = search_key;
    return std::make_unique<collect::HttpAnnotatorClient>(http);
}

prompts::PromptTemplates load_templates(const io::PipelineConfig& cfg) {
    prompts::PromptTemplates t;
    if (cfg.templates_dir.empty()) return t;
    auto maybe = [&](const char* name, std::string& slot) {
        fs::path p = fs::path(cfg.templates_dir) / name;
        if (fs::exists(p)) slot = io::read_file(p.string());
    };
    maybe("keyword_prompt.txt", t.keyword);
    maybe("caption_prompt.txt", t.caption);
    maybe("task_grounding.txt", t.grounding);
    maybe("task_cot.txt", t.cot);
    maybe("task_captioning.txt", t.captioning);
    maybe("task_matching.txt", t.matching);
    maybe("task_status.txt", t.status);
    return t;
}

void maybe_record_stage(const GlobalOptions& g, const std::string& stage, std::uint64_t seed,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs) {
    if (g.manifest_path.empty()) return;
    std::string cfg_digest;
    if (!g.config_path.empty()) cfg_digest = io::config_digest(g.config_path);
    io::record_stage(g.manifest_path, stage, seed, cfg_digest, inputs, outputs);
}

std::vector<std::string> captions_of(const std::vector<MomentAnnotation>& annotations) {
    std::vector<std::string> out;
    out.reserve(annotations.size());
    for (const auto& a : annotations) out.push_back(a.caption);
    return out;
}

std::map<std::string, VideoRecord> video_map(const std::vector<VideoRecord>& videos) {
    std::map<std::string, VideoRecord> m;
    for (const auto& v : videos) m[v.video_id] = v;
    return m;
}

// --- subcommand bodies -------------------------------------------------

int run_coverage(const GlobalOptions& g, const std::string& vocab_path,
                 const std::string& annotations_path, const std::string& pos_path,
                 const std::string& out_path) {
    auto target = io::read_vocabulary(vocab_path);
    auto annotations = io::read_annotations(annotations_path);
    vocab::PosLexicon lexicon;
    if (!pos_path.empty()) lexicon = io::read_pos_lexicon(pos_path);
    auto tokens = vocab::tokenize_queries(captions_of(annotations));
    auto report = vocab::compute_coverage(target, tokens, lexicon);

    json j;
    j["target_size"] = report.target_size;
    j["covered"] = report.covered;
    j["coverage_ratio"] = report.coverage_ratio;
    j["uncovered_words"] = vocab::uncovered_words(report);
    j["pos_counts"] = {{"NOUN", report.pos_counts[vocab::PosTag::Noun]},
                       {"VERB", report.pos_counts[vocab::PosTag::Verb]},
                       {"ADJ", report.pos_counts[vocab::PosTag::Adjective]},
                       {"OTHER", report.pos_counts[vocab::PosTag::Other]}};
    std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) {
        io::atomic_write(out_path, text);
        maybe_record_stage(g, "coverage", effective_config(g).seed,
                           {vocab_path, annotations_path}, {out_path});
    }
    std::cout << text;
    return 0;
}

int run_plan(const GlobalOptions& g, const std::string& annotations_path,
             const std::string& state_in, const std::string& state_out,
             const std::string& videos_out) {
    auto cfg = effective_config(g);
    if (cfg.vocabulary_path.empty()) {
        throw std::runtime_error("plan requires a config with a vocabulary path");
    }
    auto target = io::read_vocabulary(cfg.vocabulary_path);

    std::vector<MomentAnnotation> corpus;
    if (!annotations_path.empty()) corpus = io::read_annotations(annotations_path);
    auto tokens = vocab::tokenize_queries(captions_of(corpus));

    collect::ExpansionState state;
    if (!state_in.empty() && fs::exists(state_in)) state = io::read_expansion_state(state_in);

    auto client = make_client(cfg);
    auto templates = load_templates(cfg);
    auto outcome =
        collect::run_expansion_round(state, target, tokens, *client, cfg.limits,
                                     templates.keyword);

    io::write_expansion_state(state_out, outcome.state);
    if (!videos_out.empty()) io::write_collected(videos_out, outcome.accepted);

    double coverage = outcome.state.coverage_history.back();
    bool stop = collect::should_stop(outcome.state, cfg.coverage_target, cfg.max_rounds);
    std::cout << "round " << outcome.state.round << ": coverage " << coverage << ", "
              << outcome.accepted.size() << " new videos, "
              << outcome.failures.size() << " word failures"
              << (stop ? " [stop condition met]" : "") << "\n";
    for (const auto& [word, message] : outcome.failures) {
        std::cerr << "  failed: " << word << ": " << message << "\n";
    }

    std::vector<std::string> inputs;
    if (!annotations_path.empty()) inputs.push_back(annotations_path);
    std::vector<std::string> outputs{state_out};
    if (!videos_out.empty()) outputs.push_back(videos_out);
    maybe_record_stage(g, "plan", cfg.seed, inputs, outputs);
    return 0;
}

int run_keywords(const GlobalOptions& g, const std::string& words_path,
                 const std::string& out_path) {
    auto cfg = effective_config(g);
    auto client = make_client(cfg);
    auto templates = load_templates(cfg);
    auto words = io::read_word_list(words_path);
    std::sort(words.begin(), words.end());

    std::vector<json> records;
    for (const auto& word : words) {
        auto plan = collect::generate_keywords(word, *client, templates.keyword);
        json j;
        j["target_word"] = plan.target_word;
        j["keywords"] = plan.keywords;
        j["generation_round"] = plan.generation_round;
        records.push_back(std::move(j));
    }
    io::write_jsonl(out_path, records);
    std::cout << "wrote " << records.size() << " keyword plans to " << out_path << "\n";
    maybe_record_stage(g, "keywords", cfg.seed, {words_path}, {out_path});
    return 0;
}

int run_annotate(const GlobalOptions& g, const std::string& videos_path,
                 const std::string& out_path, const std::string& rejects_path) {
    auto cfg = effective_config(g);
    auto client = make_client(cfg);
    auto templates = load_templates(cfg);
    auto collected = io::read_collected(videos_path);
    std::sort(collected.begin(), collected.end(), [](const auto& a, const auto& b) {
        return a.candidate.video_id < b.candidate.video_id;
    });

    std::vector<MomentAnnotation> all;
    std::vector<json> rejects;
    for (const auto& c : collected) {
        annotate::CaptionPromptSpec spec;
        spec.video_id = c.candidate.video_id;
        spec.duration = c.candidate.duration;
        if (!c.target_word.empty()) spec.target_words.push_back(c.target_word);

        std::string prompt = annotate::build_caption_prompt(spec, templates.caption);
        std::string completion = client->complete(prompt);
        VideoRecord video{c.candidate.video_id, c.candidate.duration, c.keyword, {}};
        auto parsed = annotate::parse_dense_captions(completion, video, spec.target_words);
        auto [accepted, dupes] = annotate::validate_annotations(parsed.accepted, video);
        all.insert(all.end(), accepted.begin(), accepted.end());
        for (const auto& r : parsed.rejected) {
            json j;
            j["video_id"] = c.candidate.video_id;
            j["line"] = r.line.line_number;
            j["text"] = r.line.caption;
            j["reason"] = annotate::to_string(r.reason);
            rejects.push_back(std::move(j));
        }
        for (const auto& [ann, reason] : dupes) {
            json j;
            j["video_id"] = ann.video_id;
            j["text"] = ann.caption;
            j["reason"] = annotate::to_string(reason);
            rejects.push_back(std::move(j));
        }
    }
    io::write_annotations(out_path, all);
    if (!rejects_path.empty()) io::write_jsonl(rejects_path, rejects);
    std::cout << "annotated " << collected.size() << " videos: " << all.size()
              << " accepted, " << rejects.size() << " rejected lines\n";

    std::vector<std::string> outputs{out_path};
    if (!rejects_path.empty()) outputs.push_back(rejects_path);
    maybe_record_stage(g, "annotate", cfg.seed, {videos_path}, outputs);
    return 0;
}

int run_validate(const GlobalOptions& g, const std::string& annotations_path,
                 const std::string& videos_path, const std::string& out_path,
                 const std::string& rejects_path) {
    auto annotations = io::read_annotations(annotations_path);
    auto videos = video_map(io::read_videos(videos_path));

    std::map<std::string, std::vector<MomentAnnotation>> by_video;
    for (const auto& ann : annotations) by_video[ann.video_id].push_back(ann);

    std::vector<MomentAnnotation> accepted;
    std::vector<json> rejects;
    for (const auto& [video_id, group] : by_video) {
        auto it = videos.find(video_id);
        if (it == videos.end()) {
            for (const auto& ann : group) {
                json j;
                j["video_id"] = ann.video_id;
                j["text"] = ann.caption;
                j["reason"] = "UnknownVideo";
                rejects.push_back(std::move(j));
            }
            continue;
        }
        auto [ok, bad] = annotate::validate_annotations(group, it->second);
        accepted.insert(accepted.end(), ok.begin(), ok.end());
        for (const auto& [ann, reason] : bad) {
            json j;
            j["video_id"] = ann.video_id;
            j["text"] = ann.caption;
            j["reason"] = annotate::to_string(reason);
            rejects.push_back(std::move(j));
        }
    }
    io::write_annotations(out_path, accepted);
    if (!rejects_path.empty()) io::write_jsonl(rejects_path, rejects);
    std::cout << accepted.size() << " accepted, " << rejects.size() << " rejected\n";

    std::vector<std::string> outputs{out_path};
    if (!rejects_path.empty()) outputs.push_back(rejects_path);
    maybe_record_stage(g, "validate", effective_config(g).seed,
                       {annotations_path, videos_path}, outputs);
    return rejects.empty() ? 0 : 0;
}

int run_build_sft(const GlobalOptions& g, const std::string& annotations_path,
                  const std::string& videos_path, const std::string& out_path) {
    auto cfg = effective_config(g);
    auto annotations = io::read_annotations(annotations_path);
    auto videos = video_map(io::read_videos(videos_path));
    auto samples =
        factory::build_sft_samples(annotations, videos, cfg.seed, load_templates(cfg));
    io::write_samples(out_path, samples);
    std::cout << "wrote " << samples.size() << " SFT samples to " << out_path << "\n";
    maybe_record_stage(g, "build-sft", cfg.seed, {annotations_path, videos_path}, {out_path});
    return 0;
}

int run_build_cot(const GlobalOptions& g, const std::string& annotations_path,
                  const std::string& videos_path, const std::string& variant_name,
                  const std::string& out_path) {
    auto cfg = effective_config(g);
    factory::CotVariant variant = variant_name == "rule" ? factory::CotVariant::RuleBased
                                                         : factory::CotVariant::ContentAware;
    auto annotations = io::read_annotations(annotations_path);
    auto videos = video_map(io::read_videos(videos_path));
    auto samples =
        factory::build_cot_samples(annotations, videos, variant, cfg.seed, load_templates(cfg));
    io::write_samples(out_path, samples);
    std::cout << "wrote " << samples.size() << " CoT samples (" << variant_name << ") to "
              << out_path << "\n";
    maybe_record_stage(g, std::string("build-cot-") + variant_name, cfg.seed,
                       {annotations_path, videos_path}, {out_path});
    return 0;
}

int run_select_hard(const GlobalOptions& g, const std::string& samples_path,
                    const std::string& scores_path, std::size_t count, double target_mean,
                    double band, const std::string& out_path) {
    auto scores = io::read_scores(scores_path);
    std::vector<double> ious;
    ious.reserve(scores.size());
    for (const auto& s : scores) ious.push_back(s.iou);
    auto selection = factory::select_hard_indices(ious, count, target_mean, band);

    std::map<std::string, json> samples_by_id;
    for (const auto& j : io::read_jsonl(samples_path)) {
        samples_by_id[j.at("sample_id").get<std::string>()] = j;
    }
    std::vector<json> selected;
    for (std::size_t i : selection.indices) {
        auto it = samples_by_id.find(scores[i].sample_id);
        if (it == samples_by_id.end()) {
            throw std::runtime_error("score references unknown sample_id " +
                                     scores[i].sample_id);
        }
        selected.push_back(it->second);
    }
    io::write_jsonl(out_path, selected);
    std::cout << "selected " << selected.size() << " hard examples, achieved mean IoU "
              << selection.achieved_mean << " (band " << selection.final_band << ")\n";
    maybe_record_stage(g, "select-hard", effective_config(g).seed,
                       {samples_path, scores_path}, {out_path});
    return 0;
}

int run_reward(const GlobalOptions& g, const std::string& predictions_path,
               const std::string& items_path, const std::string& videos_path,
               const std::string& out_path, bool advantages) {
    auto predictions = io::read_predictions(predictions_path);
    auto items = io::read_eval_items(items_path);
    auto videos = video_map(io::read_videos(videos_path));

    std::map<std::string, const io::EvalItem*> item_by_id;
    for (const auto& item : items) item_by_id[item.item_id] = &item;

    struct Row {
        std::string item_id;
        std::size_t input_index;
        reward::RewardBreakdown breakdown;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        auto it = item_by_id.find(p.item_id);
        if (it == item_by_id.end()) {
            throw std::runtime_error("prediction references unknown item_id " + p.item_id);
        }
        auto vit = videos.find(it->second->video_id);
        if (vit == videos.end()) {
            throw std::runtime_error("item " + p.item_id + " references unknown video " +
                                     it->second->video_id);
        }
        double duration = vit->second.duration;
        reward::RewardBreakdown breakdown;
        if (p.raw_output) {
            breakdown = reward::composite_reward(*p.raw_output, it->second->interval, duration);
        } else {
            // pre-parsed mode: treat the interval as a well-formed answer
            breakdown.parsed.well_formed = p.interval->valid();
            if (breakdown.parsed.well_formed) {
                breakdown.parsed.answer_interval = p.interval;
                breakdown.r_tiou =
                    reward::tiou_reward(*p.interval, it->second->interval, duration);
                breakdown.r_format = 1.0;
            } else {
                breakdown.parsed.parse_error = reward::ParseError::InvertedInterval;
            }
            breakdown.r_total = breakdown.r_tiou + breakdown.r_format;
        }
        rows.push_back({p.item_id, i, std::move(breakdown)});
    }

    // group-relative advantages over rows sharing an item_id
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) groups[rows[i].item_id].push_back(i);
    std::map<std::size_t, double> advantage_by_row;
    if (advantages) {
        for (const auto& [id, members] : groups) {
            std::vector<double> rewards;
            for (std::size_t i : members) rewards.push_back(rows[i].breakdown.r_total);
            auto norm = reward::group_advantages(rewards);
            for (std::size_t k = 0; k < members.size(); ++k) {
                advantage_by_row[members[k]] = norm[k];
            }
        }
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.item_id, a.input_index) < std::tie(b.item_id, b.input_index);
    });
    std::vector<json> records;
    std::size_t malformed = 0;
    for (const auto& row : rows) {
        json j;
        j["item_id"] = row.item_id;
        j["r_tiou"] = row.breakdown.r_tiou;
        j["r_format"] = row.breakdown.r_format;
        j["r_total"] = row.breakdown.r_total;
        j["well_formed"] = row.breakdown.parsed.well_formed;
        if (row.breakdown.parsed.parse_error) {
            j["parse_error"] = reward::to_string(*row.breakdown.parsed.parse_error);
            ++malformed;
        }
        if (row.breakdown.parsed.answer_interval) {
            j["pred_start"] = row.breakdown.parsed.answer_interval->start;
            j["pred_end"] = row.breakdown.parsed.answer_interval->end;
        }
        if (advantages) j["advantage"] = advantage_by_row[row.input_index];
        records.push_back(std::move(j));
    }
    io::write_jsonl(out_path, records);
    std::cout << "scored " << records.size() << " outputs (" << malformed
              << " malformed) to " << out_path << "\n";
    maybe_record_stage(g, "reward", effective_config(g).seed,
                       {predictions_path, items_path, videos_path}, {out_path});
    return 0;
}

int run_eval(const GlobalOptions& g, const std::string& predictions_path,
             const std::string& items_path, const std::string& freq_path,
             const std::string& split_name, const std::string& out_dir) {
    auto cfg = effective_config(g);
    auto predictions_raw = io::read_predictions(predictions_path);
    auto items = io::read_eval_items(items_path);

    std::vector<eval::Prediction> predictions;
    for (const auto& p : predictions_raw) {
        eval::Prediction pred;
        pred.item_id = p.item_id;
        if (p.raw_output) {
            auto parsed = reward::parse_answer(*p.raw_output);
            if (parsed.well_formed) pred.interval = parsed.answer_interval;
        } else if (p.interval && p.interval->valid()) {
            pred.interval = p.interval;
        }
        predictions.push_back(std::move(pred));
    }

    std::vector<eval::GoldItem> golds;
    std::vector<std::pair<std::string, MomentAnnotation>> annotations;
    for (const auto& item : items) {
        golds.push_back({item.item_id, item.interval});
        MomentAnnotation ann;
        ann.video_id = item.video_id;
        ann.interval = item.interval;
        ann.caption = item.caption;
        annotations.emplace_back(item.item_id, std::move(ann));
    }

    vocab::FrequencyTable table;
    if (!freq_path.empty()) {
        table = io::read_frequency_table(freq_path);
    } else if (!cfg.frequency_table_path.empty()) {
        table = io::read_frequency_table(cfg.frequency_table_path);
    }

    auto reports = eval::evaluate_splits(predictions, golds, annotations, table);
    std::vector<std::string> outputs;
    auto emit = [&](eval::Split split) {
        json j = io::eval_report_to_json(reports.at(split));
        std::string text = j.dump(2) + "\n";
        std::cout << text;
        if (!out_dir.empty()) {
            std::string path =
                (fs::path(out_dir) / (std::string("eval_") + eval::to_string(split) + ".json"))
                    .string();
            io::atomic_write(path, text);
            outputs.push_back(path);
        }
    };
    if (split_name == "all") {
        emit(eval::Split::Full);
        emit(eval::Split::Rare);
        emit(eval::Split::Common);
    } else if (split_name == "full") {
        emit(eval::Split::Full);
    } else if (split_name == "rare") {
        emit(eval::Split::Rare);
    } else {
        emit(eval::Split::Common);
    }
    maybe_record_stage(g, "eval", cfg.seed, {predictions_path, items_path}, outputs);
    return 0;
}

int run_stats(const GlobalOptions& g, const std::string& videos_path,
              const std::string& annotations_path, const std::string& pos_path,
              const std::string& out_path) {
    auto videos = io::read_videos(videos_path);
    auto annotations = io::read_annotations(annotations_path);
    vocab::PosLexicon lexicon;
    if (!pos_path.empty()) lexicon = io::read_pos_lexicon(pos_path);
    auto stats = eval::dataset_stats(videos, annotations, lexicon);

    json j = io::dataset_stats_to_json(stats);
    char line[256];
    std::snprintf(line, sizeof(line), "%-22s %10.4f h\n", "Total Duration",
                  stats.total_duration_hours);
    std::string table = line;
    std::snprintf(line, sizeof(line), "%-22s %10.4f min\n", "Duration / Video",
                  stats.duration_per_video_minutes);
    table += line;
    std::snprintf(line, sizeof(line), "%-22s %10.4f s\n", "Duration / Moment",
                  stats.duration_per_moment_seconds);
    table += line;
    std::snprintf(line, sizeof(line), "%-22s %10zu\n", "Total Queries", stats.total_queries);
    table += line;
    std::snprintf(line, sizeof(line), "%-22s %10.4f\n", "# Words / Query",
                  stats.words_per_query);
    table += line;
    std::snprintf(line, sizeof(line), "%-22s %10zu\n", "Unique Nouns", stats.unique_nouns);
    table += line;
    std::snprintf(line, sizeof(line), "%-22s %10zu\n", "Unique Verbs", stats.unique_verbs);
    table += line;
    std::snprintf(line, sizeof(line), "%-22s %10zu\n", "Unique Adjectives",
                  stats.unique_adjectives);
    table += line;
    std::cout << table;

    if (!out_path.empty()) {
        io::atomic_write(out_path, j.dump(2) + "\n");
        maybe_record_stage(g, "stats", effective_config(g).seed,
                           {videos_path, annotations_path}, {out_path});
    }
    return 0;
}

int run_agreement(const GlobalOptions& g, const std::string& automated_path,
                  const std::string& corrected_path, double threshold,
                  const std::string& key_name, const std::string& out_path) {
    auto automated = io::read_annotations(automated_path);
    auto corrected = io::read_annotations(corrected_path);
    auto key = key_name == "index" ? annotate::PairingKey::VideoAndIndex
                                   : annotate::PairingKey::VideoAndCaption;
    auto report = annotate::agreement_rate(automated, corrected, threshold, key);

    json j;
    j["rate"] = report.rate;
    j["n_automated"] = report.n_automated;
    j["n_paired"] = report.n_paired;
    j["n_agreeing"] = report.n_agreeing;
    j["unpaired_keys"] = report.unpaired_keys;
    std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        io::atomic_write(out_path, text);
        maybe_record_stage(g, "agreement", effective_config(g).seed,
                           {automated_path, corrected_path}, {out_path});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vtgforge: dataset pipeline, training-data factory, and evaluation "
                 "engine for video temporal grounding"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "pipeline config JSON");
    app.add_option("--manifest", g.manifest_path, "run manifest to create or update");
    auto* seed_opt = app.add_option("--seed", g.seed, "seed overriding the config");
    app.add_flag("--mock", g.mock, "use the deterministic mock client (no credentials)");

    std::string vocab_path, annotations_path, pos_path, out_path, state_in, state_out;
    std::string videos_path, rejects_path, words_path, variant = "content";
    std::string scores_path, samples_path, predictions_path, items_path, freq_path;
    std::string split = "full", key_name = "caption", corrected_path, out_dir;
    std::size_t count = 0;
    double target_mean = 0.3, band = 0.15, threshold = 0.5;
    bool advantages = false;

    auto* coverage = app.add_subcommand("coverage", "vocabulary coverage report");
    coverage->add_option("--vocab", vocab_path)->required();
    coverage->add_option("--annotations", annotations_path)->required();
    coverage->add_option("--pos-lexicon", pos_path);
    coverage->add_option("--out", out_path);

    auto* plan = app.add_subcommand("plan", "run one coverage-expansion round");
    plan->add_option("--annotations", annotations_path, "current annotation corpus");
    plan->add_option("--state", state_in, "expansion state checkpoint to resume");
    plan->add_option("--out-state", state_out)->required();
    plan->add_option("--out-videos", videos_path, "accepted video candidates");

    auto* keywords = app.add_subcommand("keywords", "generate per-word keyword plans");
    keywords->add_option("--words", words_path)->required();
    keywords->add_option("--out", out_path)->required();

    auto* annotate_cmd = app.add_subcommand("annotate", "prompt, parse, and validate captions");
    annotate_cmd->add_option("--videos", videos_path)->required();
    annotate_cmd->add_option("--out", out_path)->required();
    annotate_cmd->add_option("--rejects", rejects_path);

    auto* validate = app.add_subcommand("validate", "validate annotations against videos");
    validate->add_option("--annotations", annotations_path)->required();
    validate->add_option("--videos", videos_path)->required();
    validate->add_option("--out", out_path)->required();
    validate->add_option("--rejects", rejects_path);

    auto* build_sft = app.add_subcommand("build-sft", "build the multi-task SFT set");
    build_sft->add_option("--annotations", annotations_path)->required();
    build_sft->add_option("--videos", videos_path)->required();
    build_sft->add_option("--out", out_path)->required();

    auto* build_cot = app.add_subcommand("build-cot", "build self-correction CoT samples");
    build_cot->add_option("--annotations", annotations_path)->required();
    build_cot->add_option("--videos", videos_path)->required();
    build_cot->add_option("--variant", variant)
        ->check(CLI::IsMember({"content", "rule"}));
    build_cot->add_option("--out", out_path)->required();

    auto* select_hard = app.add_subcommand("select-hard", "select RL hard examples");
    select_hard->add_option("--samples", samples_path)->required();
    select_hard->add_option("--scores", scores_path)->required();
    select_hard->add_option("--count", count)->required();
    select_hard->add_option("--target-mean", target_mean);
    select_hard->add_option("--band", band);
    select_hard->add_option("--out", out_path)->required();

    auto* reward_cmd = app.add_subcommand("reward", "score a predictions file");
    reward_cmd->add_option("--predictions", predictions_path)->required();
    reward_cmd->add_option("--items", items_path)->required();
    reward_cmd->add_option("--videos", videos_path)->required();
    reward_cmd->add_option("--out", out_path)->required();
    reward_cmd->add_flag("--advantages", advantages, "add group-relative advantages");

    auto* eval_cmd = app.add_subcommand("eval", "R1@IoU evaluation reports");
    eval_cmd->add_option("--predictions", predictions_path)->required();
    eval_cmd->add_option("--items", items_path)->required();
    eval_cmd->add_option("--freq", freq_path, "frequency table for the rare split");
    eval_cmd->add_option("--split", split)->check(CLI::IsMember({"full", "rare", "common", "all"}));
    eval_cmd->add_option("--out-dir", out_dir);

    auto* stats = app.add_subcommand("stats", "dataset statistics table");
    stats->add_option("--videos", videos_path)->required();
    stats->add_option("--annotations", annotations_path)->required();
    stats->add_option("--pos-lexicon", pos_path);
    stats->add_option("--out", out_path);

    auto* agreement = app.add_subcommand("agreement", "automated vs corrected agreement rate");
    agreement->add_option("--automated", annotations_path)->required();
    agreement->add_option("--corrected", corrected_path)->required();
    agreement->add_option("--threshold", threshold);
    agreement->add_option("--key", key_name)->check(CLI::IsMember({"caption", "index"}));
    agreement->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    g.seed_set = seed_opt->count() > 0;

    try {
        if (*coverage) return run_coverage(g, vocab_path, annotations_path, pos_path, out_path);
        if (*plan) return run_plan(g, annotations_path, state_in, state_out, videos_path);
        if (*keywords) return run_keywords(g, words_path, out_path);
        if (*annotate_cmd) return run_annotate(g, videos_path, out_path, rejects_path);
        if (*validate) {
            return run_validate(g, annotations_path, videos_path, out_path, rejects_path);
        }
        if (*build_sft) return run_build_sft(g, annotations_path, videos_path, out_path);
        if (*build_cot) {
            return run_build_cot(g, annotations_path, videos_path, variant, out_path);
        }
        if (*select_hard) {
            return run_select_hard(g, samples_path, scores_path, count, target_mean, band,
                                   out_path);
        }
        if (*reward_cmd) {
            return run_reward(g, predictions_path, items_path, videos_path, out_path,
                              advantages);
        }
        if (*eval_cmd) {
            return run_eval(g, predictions_path, items_path, freq_path, split, out_dir);
        }
        if (*stats) return run_stats(g, videos_path, annotations_path, pos_path, out_path);
        if (*agreement) {
            return run_agreement(g, annotations_path, corrected_path, threshold, key_name,
                                 out_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
