#pragma once

// Live AnnotatorClient speaking a minimal HTTP+JSON protocol:
//   POST {llm_endpoint}/complete   {"prompt": "..."} -> {"completion": "..."}
//   GET  {search_endpoint}/search?q=...
//        -> {"results": [{"video_id": "...", "duration": 12.3, "url": "..."}]}
// Credentials are sent as bearer tokens and come from the environment
// (VTGFORGE_LLM_KEY, VTGFORGE_SEARCH_KEY). Kept in its own header so the
// rest of the library does not pay for the HTTP dependency.

#include <memory>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vtgforge/clients.hpp"

namespace vtgforge::collect {

struct HttpClientConfig {
    std::string llm_base_url;     // e.g. http://localhost:8080
    std::string search_base_url;  // may equal llm_base_url
    std::string llm_key;
    std::string search_key;
    int timeout_seconds = 30;
};

class HttpAnnotatorClient : public AnnotatorClient {
public:
    explicit HttpAnnotatorClient(HttpClientConfig config) : config_(std::move(config)) {
        if (config_.llm_base_url.empty() || config_.search_base_url.empty()) {
            throw std::invalid_argument("HttpAnnotatorClient: endpoints not configured");
        }
    }

    std::string complete(const std::string& prompt) override {
        httplib::Client cli(config_.llm_base_url);
        cli.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.llm_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.llm_key);
        }
        nlohmann::json body{{"prompt", prompt}};
        auto res = cli.Post("/complete", headers, body.dump(), "application/json");
        if (!res || res->status != 200) {
            throw ClientError("LLM endpoint failure: " + status_text(res));
        }
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("completion")) {
            throw ClientError("LLM endpoint returned malformed JSON");
        }
        return parsed["completion"].get<std::string>();
    }

    std::vector<VideoCandidate> search(const std::string& query) override {
        httplib::Client cli(config_.search_base_url);
        cli.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.search_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.search_key);
        }
        httplib::Params params{{"q", query}};
        auto res = cli.Get("/search", params, headers);
        if (!res || res->status != 200) {
            throw ClientError("search endpoint failure: " + status_text(res));
        }
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("results")) {
            throw ClientError("search endpoint returned malformed JSON");
        }
        std::vector<VideoCandidate> out;
        for (const auto& item : parsed["results"]) {
            out.push_back({item.at("video_id").get<std::string>(),
                           item.at("duration").get<double>(),
                           item.value("url", std::string{})});
        }
        return out;
    }

private:
    static std::string status_text(const httplib::Result& res) {
        if (!res) return "no response (" + httplib::to_string(res.error()) + ")";
        return "HTTP " + std::to_string(res->status);
    }

    HttpClientConfig config_;
};

}  // namespace vtgforge::collect
