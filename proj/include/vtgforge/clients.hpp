#pragma once

// Pluggable clients for the collection pipeline: an LLM completion
// endpoint and a video search endpoint behind one interface. The mock
// implementation is a pure function of (seed, input), so mock runs are
// reproducible regardless of call order or scheduling.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtgforge/rng.hpp"
#include "vtgforge/text.hpp"

namespace vtgforge::collect {

struct VideoCandidate {
    std::string video_id;
    double duration = 0.0;  // seconds
    std::string url;
};

// Transport-level failure; carries the target word (when known) so the
// caller can requeue it.
class ClientError : public std::runtime_error {
public:
    explicit ClientError(const std::string& message, std::string word = {})
        : std::runtime_error(message), word_(std::move(word)) {}
    const std::string& word() const { return word_; }

private:
    std::string word_;
};

class AnnotatorClient {
public:
    virtual ~AnnotatorClient() = default;
    virtual std::string complete(const std::string& prompt) = 0;
    virtual std::vector<VideoCandidate> search(const std::string& query) = 0;
};

// Deterministic stand-in for the LLM and the video platform. Recognizes
// the default prompt templates by their fixed marker lines; arbitrary
// prompts yield an empty completion.
class MockAnnotatorClient : public AnnotatorClient {
public:
    explicit MockAnnotatorClient(std::uint64_t seed) : seed_(seed) {}

    std::string complete(const std::string& prompt) override {
        if (prompt.find("START - END: CAPTION") != std::string::npos) {
            return mock_captions(prompt);
        }
        if (prompt.find("search phrase") != std::string::npos) {
            return mock_keywords(prompt);
        }
        return "";
    }

    std::vector<VideoCandidate> search(const std::string& query) override {
        Rng rng(mix_seed(seed_, fnv1a64("search:" + query)));
        std::vector<VideoCandidate> out;
        const std::size_t n = 10;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t token = rng();
            char id[32];
            std::snprintf(id, sizeof(id), "v%012llx",
                          static_cast<unsigned long long>(token & 0xffffffffffffull));
            double duration = 30.0 + static_cast<double>(token % 2701) / 10.0;
            out.push_back({id, duration, std::string("mock://video/") + id});
        }
        return out;
    }

private:
    std::string mock_keywords(const std::string& prompt) const {
        std::string word = first_quoted(prompt).value_or("footage");
        Rng rng(mix_seed(seed_, fnv1a64("keywords:" + prompt)));
        static const char* kScenes[] = {"close up demonstration", "event compilation",
                                        "step by step process",  "documentary scene",
                                        "workshop session"};
        std::size_t n = 2 + uniform_below(rng, 3);
        std::string out;
        for (std::size_t i = 0; i < n; ++i) {
            out += word + " " + kScenes[(uniform_below(rng, 5))];
            out += '\n';
        }
        return out;
    }

    std::string mock_captions(const std::string& prompt) const {
        double duration = parse_duration(prompt).value_or(30.0);
        std::vector<std::string> targets = parse_target_words(prompt);
        Rng rng(mix_seed(seed_, fnv1a64("captions:" + prompt)));

        std::string out;
        std::size_t n_events = 2 + uniform_below(rng, 3);
        double cursor = 0.0;
        std::size_t target_idx = 0;
        for (std::size_t i = 0; i < n_events && cursor < duration; ++i) {
            double remaining = duration - cursor;
            double span = remaining / static_cast<double>(n_events - i);
            double s = cursor;
            double e = std::min(duration, cursor + span * (0.6 + 0.4 * uniform_unit(rng)));
            if (e - s < 1.0) e = std::min(duration, s + 1.0);
            cursor = e;

            std::string caption;
            if (target_idx < targets.size()) {
                caption = "A person carefully demonstrates " + targets[target_idx++] +
                          " in the scene.";
            } else {
                caption = "The camera follows the ongoing activity in the scene.";
            }
            out += format_seconds(s) + " - " + format_seconds(e) + ": " + caption + "\n";

            // occasionally nest a shorter event inside, so downstream
            // consumers see enclosing pairs
            if (e - s > 4.0 && uniform_unit(rng) < 0.5) {
                double pad = (e - s) * 0.2;
                double ns = s + pad;
                double ne = e - pad;
                std::string inner =
                    target_idx < targets.size()
                        ? "A close view shows " + targets[target_idx++] + " in detail."
                        : "A close view shows the key moment in detail.";
                out += format_seconds(ns) + " - " + format_seconds(ne) + ": " + inner + "\n";
            }
        }
        return out;
    }

    static std::optional<std::string> first_quoted(const std::string& text) {
        auto open = text.find('"');
        if (open == std::string::npos) return std::nullopt;
        auto close = text.find('"', open + 1);
        if (close == std::string::npos) return std::nullopt;
        return text.substr(open + 1, close - open - 1);
    }

    static std::optional<double> parse_duration(const std::string& prompt) {
        auto pos = prompt.find(" seconds long");
        if (pos == std::string::npos) return std::nullopt;
        auto start = prompt.find_last_of(' ', pos - 1);
        if (start == std::string::npos) return std::nullopt;
        try {
            return std::stod(prompt.substr(start + 1, pos - start - 1));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    static std::vector<std::string> parse_target_words(const std::string& prompt) {
        std::vector<std::string> words;
        auto pos = prompt.find("Target words: ");
        if (pos == std::string::npos) return words;
        auto eol = prompt.find('\n', pos);
        std::string list = prompt.substr(pos + 14, eol - pos - 14);
        std::string current;
        for (char c : list + ",") {
            if (c == ',') {
                auto w = trim(current);
                if (!w.empty()) words.emplace_back(w);
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        return words;
    }

    std::uint64_t seed_;
};

}  // namespace vtgforge::collect
