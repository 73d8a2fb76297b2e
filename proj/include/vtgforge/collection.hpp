#pragma once

// Interactive targeted video collection: translates uncovered target
// words into event-centric search keywords through the LLM client,
// searches, deduplicates, and drives the outer coverage-expansion loop.
// Per-word work fans out with a bounded in-flight limit; results merge in
// word order so runs with a deterministic client are byte-reproducible.

#include <algorithm>
#include <future>
#include <optional>
#include <semaphore>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vtgforge/clients.hpp"
#include "vtgforge/prompts.hpp"
#include "vtgforge/vocab.hpp"

namespace vtgforge::collect {

struct KeywordPlan {
    std::string target_word;
    std::vector<std::string> keywords;  // non-empty
    int generation_round = 1;
};

struct ExpansionState {
    int round = 0;
    std::set<std::string> remaining_uncovered;
    std::set<std::string> collected_video_ids;
    std::vector<double> coverage_history;  // non-decreasing across rounds
};

struct RoundLimits {
    int word_budget = 16;             // uncovered words attempted per round
    int max_keywords_per_word = 5;
    int max_candidates_per_keyword = 10;
    int max_in_flight = 4;
    int retry_attempts = 3;
    int retry_backoff_ms = 100;
};

// A search hit accepted into the dataset, with the word and keyword that
// retrieved it.
struct CollectedVideo {
    VideoCandidate candidate;
    std::string target_word;
    std::string keyword;
};

struct RoundOutcome {
    ExpansionState state;
    std::vector<CollectedVideo> accepted;
    std::vector<std::pair<std::string, std::string>> failures;  // (word, message)
};

// Prompts the client with the keyword template and parses one keyword per
// line, capped at five. Falls back to "<word> event footage" when the
// completion parses to nothing. Transport failures surface as ClientError
// carrying the word for requeue.
inline KeywordPlan generate_keywords(const std::string& target_word, AnnotatorClient& client,
                                     const std::string& template_text = prompts::kKeywordPrompt,
                                     int generation_round = 1) {
    if (target_word.empty()) {
        throw std::invalid_argument("generate_keywords: empty target word");
    }
    std::string prompt = render_template(template_text, {{"word", target_word}});
    std::string completion;
    try {
        completion = client.complete(prompt);
    } catch (const ClientError& e) {
        throw ClientError(e.what(), target_word);
    } catch (const std::exception& e) {
        throw ClientError(e.what(), target_word);
    }

    KeywordPlan plan;
    plan.target_word = target_word;
    plan.generation_round = generation_round;
    std::istringstream lines(completion);
    std::string line;
    while (plan.keywords.size() < 5 && std::getline(lines, line)) {
        auto kw = trim(line);
        if (!kw.empty()) plan.keywords.emplace_back(kw);
    }
    if (plan.keywords.empty()) {
        plan.keywords.push_back(target_word + " event footage");
    }
    return plan;
}

// Drops candidates whose id was already seen or duplicates earlier
// entries in the same batch; first occurrence wins.
inline std::vector<VideoCandidate> dedup_candidates(const std::vector<VideoCandidate>& candidates,
                                                    const std::set<std::string>& seen) {
    std::vector<VideoCandidate> out;
    std::set<std::string> batch;
    for (const auto& c : candidates) {
        if (seen.count(c.video_id) || !batch.insert(c.video_id).second) continue;
        out.push_back(c);
    }
    return out;
}

namespace detail {

struct WordResult {
    std::string word;
    std::vector<CollectedVideo> hits;  // not yet deduplicated
    std::optional<std::string> failure;
};

template <typename Fn>
auto with_retries(int attempts, int backoff_ms, Fn&& fn) {
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const ClientError&) {
            if (attempt + 1 >= attempts) throw;
            if (backoff_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms << attempt));
            }
        }
    }
}

inline WordResult collect_for_word(const std::string& word, AnnotatorClient& client,
                                   const RoundLimits& limits,
                                   const std::string& keyword_template, int round) {
    WordResult result;
    result.word = word;
    try {
        KeywordPlan plan = with_retries(limits.retry_attempts, limits.retry_backoff_ms, [&] {
            return generate_keywords(word, client, keyword_template, round);
        });
        std::size_t n_keywords =
            std::min<std::size_t>(plan.keywords.size(), limits.max_keywords_per_word);
        for (std::size_t k = 0; k < n_keywords; ++k) {
            const auto& keyword = plan.keywords[k];
            auto hits = with_retries(limits.retry_attempts, limits.retry_backoff_ms,
                                     [&] { return client.search(keyword); });
            if (hits.size() > static_cast<std::size_t>(limits.max_candidates_per_keyword)) {
                hits.resize(limits.max_candidates_per_keyword);
            }
            for (auto& h : hits) {
                result.hits.push_back({std::move(h), word, keyword});
            }
        }
    } catch (const ClientError& e) {
        result.failure = e.what();
    }
    return result;
}

}  // namespace detail

// One round of Semantic Coverage Iterative Expansion. Recomputes coverage
// of the supplied corpus, attempts up to `word_budget` uncovered words,
// and appends deduplicated search hits. A round where every client call
// fails still returns a valid state; failed words simply stay uncovered.
inline RoundOutcome run_expansion_round(const ExpansionState& state,
                                        const vocab::Vocabulary& target,
                                        const vocab::TokenMultiset& corpus_tokens,
                                        AnnotatorClient& client, const RoundLimits& limits,
                                        const std::string& keyword_template = prompts::kKeywordPrompt) {
    if (limits.word_budget <= 0) {
        throw std::invalid_argument("run_expansion_round: budget must be positive");
    }

    RoundOutcome outcome;
    outcome.state = state;
    outcome.state.round = state.round + 1;

    auto report = vocab::compute_coverage(target, corpus_tokens);
    outcome.state.remaining_uncovered.clear();
    outcome.state.remaining_uncovered.insert(report.uncovered.begin(), report.uncovered.end());
    outcome.state.coverage_history.push_back(report.coverage_ratio);

    std::vector<std::string> batch;
    for (const auto& word : outcome.state.remaining_uncovered) {
        if (batch.size() >= static_cast<std::size_t>(limits.word_budget)) break;
        batch.push_back(word);
    }

    // fan out per word, then merge strictly in word order
    std::vector<detail::WordResult> results(batch.size());
    {
        std::counting_semaphore<> slots(std::max(1, limits.max_in_flight));
        std::vector<std::future<void>> tasks;
        tasks.reserve(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            tasks.push_back(std::async(std::launch::async, [&, i] {
                slots.acquire();
                results[i] = detail::collect_for_word(batch[i], client, limits,
                                                      keyword_template,
                                                      outcome.state.round);
                slots.release();
            }));
        }
        for (auto& t : tasks) t.get();
    }

    for (auto& r : results) {
        if (r.failure) {
            outcome.failures.emplace_back(r.word, *r.failure);
            continue;
        }
        std::vector<VideoCandidate> flat;
        flat.reserve(r.hits.size());
        for (const auto& h : r.hits) flat.push_back(h.candidate);
        auto fresh = dedup_candidates(flat, outcome.state.collected_video_ids);
        std::set<std::string> fresh_ids;
        for (const auto& c : fresh) fresh_ids.insert(c.video_id);
        for (auto& h : r.hits) {
            if (fresh_ids.erase(h.candidate.video_id)) {
                outcome.state.collected_video_ids.insert(h.candidate.video_id);
                outcome.accepted.push_back(std::move(h));
            }
        }
    }
    return outcome;
}

inline constexpr double kDefaultCoverageTarget = 0.95;

// True once the latest coverage reaches the target or the round budget is
// exhausted.
inline bool should_stop(const ExpansionState& state,
                        double target_coverage = kDefaultCoverageTarget,
                        int max_rounds = 10) {
    double latest = state.coverage_history.empty() ? 0.0 : state.coverage_history.back();
    return latest >= target_coverage || state.round >= max_rounds;
}

}  // namespace vtgforge::collect
