#pragma once

// Prompt templates for keyword generation, dense-caption annotation, and
// the SFT task factory. The defaults below are also shipped as editable
// files under templates/; a config may point at modified copies. Lines
// containing the {target_words} placeholder are dropped entirely when no
// target words are supplied.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vtgforge/text.hpp"

namespace vtgforge::prompts {

inline constexpr const char* kKeywordPrompt =
    "You are helping collect videos that show distinct, locatable temporal events.\n"
    "Generate up to 5 specific, event-centric search phrases likely to show a distinct "
    "temporal event involving \"{word}\".\n"
    "Prefer concrete scenes and activities over abstract or static imagery.\n"
    "Write one search phrase per line and nothing else.\n";

inline constexpr const char* kCaptionPrompt =
    "Watch the video and describe the events in the video with precise timestamps.\n"
    "The video is {duration} seconds long.\n"
    "Write one event per line in the exact format:\n"
    "START - END: CAPTION\n"
    "where START and END are seconds as decimal numbers, for example:\n"
    "12.0 - 30.5: A person lights a candle on a cake.\n"
    "Cover the full video from beginning to end and keep each caption to one factual sentence.\n"
    "Target words: {target_words}\n"
    "Use each target word in a caption wherever it is visually accurate.\n";

inline constexpr const char* kGroundingPrompt =
    "Watch the video and find the event described by the query.\n"
    "Query: {caption}\n"
    "Respond with the event interval as <answer><START to END></answer>, "
    "using seconds as decimal numbers.\n";

inline constexpr const char* kCotPrompt =
    "Watch the video and find the event described by the query.\n"
    "Query: {caption}\n"
    "First reason inside <think></think>: state a coarse localization, check it against "
    "the video, and refine it. Then give the final interval as "
    "<answer><START to END></answer>.\n";

inline constexpr const char* kCaptioningPrompt =
    "Describe the event that occurs between {start} and {end} seconds in the video.\n"
    "Respond with a single sentence.\n";

inline constexpr const char* kMatchingPrompt =
    "Query: {caption}\n"
    "Clip: {start} to {end} seconds.\n"
    "Does the clip match the query? Answer exactly one of: match, partial match, mismatch.\n";

inline constexpr const char* kStatusPrompt =
    "Query: {caption}\n"
    "At time {t} seconds, what is the status of the event described by the query?\n"
    "Answer exactly one of: Not Started, In Progress, Ended.\n";

struct PromptTemplates {
    std::string keyword = kKeywordPrompt;
    std::string caption = kCaptionPrompt;
    std::string grounding = kGroundingPrompt;
    std::string cot = kCotPrompt;
    std::string captioning = kCaptioningPrompt;
    std::string matching = kMatchingPrompt;
    std::string status = kStatusPrompt;
};

inline std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ", ";
        out += words[i];
    }
    return out;
}

// Renders a template, removing every line that references {target_words}
// when the word list is empty.
inline std::string render_with_targets(const std::string& tpl,
                                       std::map<std::string, std::string> values,
                                       const std::vector<std::string>& target_words) {
    std::string body = tpl;
    if (target_words.empty()) {
        std::istringstream in(tpl);
        std::string line;
        std::string kept;
        bool drop_next_usage_line = false;
        while (std::getline(in, line)) {
            if (line.find("{target_words}") != std::string::npos) {
                drop_next_usage_line = true;
                continue;
            }
            if (drop_next_usage_line && line.find("target word") != std::string::npos) {
                drop_next_usage_line = false;
                continue;
            }
            kept += line;
            kept += '\n';
        }
        body = kept;
    } else {
        values["target_words"] = join_words(target_words);
    }
    return render_template(body, values);
}

}  // namespace vtgforge::prompts
