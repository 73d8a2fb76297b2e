#pragma once

// Target-word identification and corpus coverage analysis: vocabulary
// cleaning, coverage reports against a query corpus, rare-word
// classification, and the rare/common query split used by evaluation.

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vtgforge/core.hpp"
#include "vtgforge/text.hpp"

namespace vtgforge::vocab {

enum class PosTag { Noun, Verb, Adjective, Other };

inline const char* to_string(PosTag t) {
    switch (t) {
        case PosTag::Noun: return "NOUN";
        case PosTag::Verb: return "VERB";
        case PosTag::Adjective: return "ADJ";
        case PosTag::Other: return "OTHER";
    }
    return "";
}

// word -> tag; on duplicate words the first-listed tag wins.
using PosLexicon = std::unordered_map<std::string, PosTag>;

// word -> occurrence count. std::map keeps iteration deterministic.
using TokenMultiset = std::map<std::string, std::size_t>;

// Ordered set of lowercase words.
struct Vocabulary {
    std::vector<std::string> words;  // sorted, unique
    std::string source_label;

    bool contains(const std::string& w) const {
        return std::binary_search(words.begin(), words.end(), w);
    }
    std::size_t size() const { return words.size(); }
};

struct VocabularyReport {
    std::size_t target_size = 0;
    std::size_t covered = 0;
    double coverage_ratio = 0.0;
    std::vector<std::string> uncovered;           // lexicographic
    std::map<PosTag, std::size_t> pos_counts;     // unique covered words per POS
};

struct FrequencyTable {
    std::unordered_map<std::string, double> frequencies;  // each in (0, 1]
    double default_frequency = 0.0;  // absent words count as never observed

    double lookup(const std::string& word) const {
        auto it = frequencies.find(word);
        return it == frequencies.end() ? default_frequency : it->second;
    }
};

// Keeps the raw words that are purely alphabetic after lowercasing, are
// not subword fragments (leading "##"), and pass the spell check, i.e.
// appear verbatim in the dictionary. Output is sorted and deduplicated.
inline Vocabulary clean_vocabulary(const std::vector<std::string>& raw_words,
                                   const std::set<std::string>& dictionary,
                                   std::string source_label = {}) {
    if (raw_words.empty()) {
        throw std::invalid_argument("clean_vocabulary: empty input word list");
    }
    if (dictionary.empty()) {
        throw std::invalid_argument("clean_vocabulary: empty dictionary");
    }
    std::set<std::string> kept;
    for (const auto& raw : raw_words) {
        if (raw.rfind("##", 0) == 0) continue;
        std::string w = to_lower(raw);
        if (w.empty() || !std::all_of(w.begin(), w.end(), [](char c) {
                return c >= 'a' && c <= 'z';
            })) {
            continue;
        }
        if (dictionary.count(w)) kept.insert(std::move(w));
    }
    Vocabulary out;
    out.words.assign(kept.begin(), kept.end());
    out.source_label = std::move(source_label);
    return out;
}

// Splits on every non-alphabetic character, lowercases, drops empties.
inline TokenMultiset tokenize_query(std::string_view query) {
    TokenMultiset tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            ++tokens[current];
            current.clear();
        }
    };
    for (char c : query) {
        if (ascii_alpha(c)) {
            current.push_back(ascii_lower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

inline void merge_tokens(TokenMultiset& into, const TokenMultiset& from) {
    for (const auto& [w, n] : from) into[w] += n;
}

// Tokenizes a whole corpus. Queries are processed in parallel chunks and
// merged in query order, so the result is identical to the sequential
// scan regardless of scheduling.
inline TokenMultiset tokenize_queries(const std::vector<std::string>& queries) {
    constexpr std::size_t kParallelThreshold = 512;
    TokenMultiset all;
    if (queries.size() < kParallelThreshold) {
        for (const auto& q : queries) merge_tokens(all, tokenize_query(q));
        return all;
    }
    const std::size_t n_chunks = 8;
    const std::size_t chunk = (queries.size() + n_chunks - 1) / n_chunks;
    std::vector<std::future<TokenMultiset>> parts;
    for (std::size_t lo = 0; lo < queries.size(); lo += chunk) {
        std::size_t hi = std::min(lo + chunk, queries.size());
        parts.push_back(std::async(std::launch::async, [&queries, lo, hi] {
            TokenMultiset part;
            for (std::size_t i = lo; i < hi; ++i) merge_tokens(part, tokenize_query(queries[i]));
            return part;
        }));
    }
    for (auto& p : parts) merge_tokens(all, p.get());
    return all;
}

// A target word counts as covered iff its exact lowercase form appears in
// the corpus tokens; no stemming or lemmatization.
inline VocabularyReport compute_coverage(const Vocabulary& target,
                                         const TokenMultiset& corpus_tokens,
                                         const PosLexicon& pos_lexicon = {}) {
    if (target.words.empty()) {
        throw std::invalid_argument("compute_coverage: empty target vocabulary");
    }
    VocabularyReport report;
    report.target_size = target.words.size();
    report.pos_counts = {{PosTag::Noun, 0},
                         {PosTag::Verb, 0},
                         {PosTag::Adjective, 0},
                         {PosTag::Other, 0}};
    for (const auto& word : target.words) {
        if (corpus_tokens.count(word)) {
            ++report.covered;
            auto it = pos_lexicon.find(word);
            PosTag tag = it == pos_lexicon.end() ? PosTag::Other : it->second;
            ++report.pos_counts[tag];
        } else {
            report.uncovered.push_back(word);
        }
    }
    report.coverage_ratio =
        static_cast<double>(report.covered) / static_cast<double>(report.target_size);
    return report;
}

inline std::vector<std::string> uncovered_words(const VocabularyReport& report) {
    std::vector<std::string> out = report.uncovered;
    std::sort(out.begin(), out.end());
    return out;
}

inline constexpr double kRareFrequencyThreshold = 1e-7;

// A word is rare iff its relative frequency is strictly below the
// threshold. Absent words fall back to the table default, which is below
// any sensible threshold: unseen means rare.
inline bool classify_rare(const std::string& word, const FrequencyTable& table,
                          double threshold = kRareFrequencyThreshold) {
    if (word.empty()) {
        throw std::invalid_argument("classify_rare: empty word");
    }
    return table.lookup(word) < threshold;
}

// An annotation is rare iff any token of its caption classifies rare.
// Returns (rare, common); the partition is exhaustive and disjoint and
// preserves input order.
inline std::pair<std::vector<MomentAnnotation>, std::vector<MomentAnnotation>>
split_rare_queries(const std::vector<MomentAnnotation>& annotations,
                   const FrequencyTable& table,
                   double threshold = kRareFrequencyThreshold) {
    std::vector<MomentAnnotation> rare;
    std::vector<MomentAnnotation> common;
    for (const auto& ann : annotations) {
        bool is_rare = false;
        for (const auto& [token, count] : tokenize_query(ann.caption)) {
            (void)count;
            if (classify_rare(token, table, threshold)) {
                is_rare = true;
                break;
            }
        }
        (is_rare ? rare : common).push_back(ann);
    }
    return {std::move(rare), std::move(common)};
}

}  // namespace vtgforge::vocab
