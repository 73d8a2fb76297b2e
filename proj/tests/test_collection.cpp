#include <catch2/catch_amalgamated.hpp>

#include <atomic>

#include "vtgforge/collection.hpp"
#include "vtgforge/io.hpp"

using namespace vtgforge;
using namespace vtgforge::collect;

namespace {

class ScriptedClient : public AnnotatorClient {
public:
    explicit ScriptedClient(std::string completion) : completion_(std::move(completion)) {}
    std::string complete(const std::string&) override {
        ++completions;
        return completion_;
    }
    std::vector<VideoCandidate> search(const std::string& query) override {
        ++searches;
        return {{"vid-" + query, 60.0, "mock://" + query}};
    }
    std::atomic<int> completions{0};
    std::atomic<int> searches{0};

private:
    std::string completion_;
};

class FailingSearchClient : public ScriptedClient {
public:
    using ScriptedClient::ScriptedClient;
    std::vector<VideoCandidate> search(const std::string&) override {
        throw ClientError("search backend down");
    }
};

vocab::Vocabulary make_target(std::initializer_list<const char*> words) {
    vocab::Vocabulary v;
    for (const char* w : words) v.words.push_back(w);
    std::sort(v.words.begin(), v.words.end());
    return v;
}

RoundLimits fast_limits() {
    RoundLimits limits;
    limits.retry_backoff_ms = 0;
    return limits;
}

}  // namespace

TEST_CASE("generate_keywords parses one keyword per line, capped at five", "[collection]") {
    ScriptedClient client("alpha scene\nbeta scene\n\n  gamma scene  \n");
    auto plan = generate_keywords("alpha", client);
    CHECK(plan.keywords == std::vector<std::string>{"alpha scene", "beta scene", "gamma scene"});

    ScriptedClient many("k1\nk2\nk3\nk4\nk5\nk6\nk7\n");
    CHECK(generate_keywords("x", many).keywords.size() == 5);
}

TEST_CASE("generate_keywords falls back when the completion is empty", "[collection]") {
    ScriptedClient empty("");
    auto plan = generate_keywords("candle", empty);
    CHECK(plan.keywords == std::vector<std::string>{"candle event footage"});
    CHECK_THROWS_AS(generate_keywords("", empty), std::invalid_argument);
}

TEST_CASE("generate_keywords wraps transport failures with the word", "[collection]") {
    struct BrokenClient : AnnotatorClient {
        std::string complete(const std::string&) override {
            throw std::runtime_error("connection reset");
        }
        std::vector<VideoCandidate> search(const std::string&) override { return {}; }
    } broken;
    try {
        generate_keywords("meticulous", broken);
        FAIL("expected ClientError");
    } catch (const ClientError& e) {
        CHECK(e.word() == "meticulous");
    }
}

TEST_CASE("dedup_candidates removes seen and in-batch duplicates", "[collection]") {
    VideoCandidate v1{"v1", 1, ""}, v2{"v2", 1, ""}, v3{"v3", 1, ""};
    auto out = dedup_candidates({v1, v2, v1}, {});
    REQUIRE(out.size() == 2);
    CHECK(out[0].video_id == "v1");
    CHECK(out[1].video_id == "v2");

    CHECK(dedup_candidates({v1}, {"v1"}).empty());

    auto mixed = dedup_candidates({v3, v1, v3, v2}, {"v2"});
    REQUIRE(mixed.size() == 2);
    CHECK(mixed[0].video_id == "v3");
    CHECK(mixed[1].video_id == "v1");
}

TEST_CASE("run_expansion_round attempts at most the word budget", "[collection]") {
    auto target = make_target({"alpha", "beta", "gamma"});
    ScriptedClient client("keyword line\n");
    auto limits = fast_limits();
    limits.word_budget = 2;

    ExpansionState state;
    auto outcome = run_expansion_round(state, target, {}, client, limits);
    CHECK(outcome.state.round == 1);
    CHECK(client.completions.load() == 2);  // one keyword prompt per attempted word
    REQUIRE(outcome.state.coverage_history.size() == 1);
    CHECK(outcome.state.coverage_history[0] == 0.0);
    CHECK(outcome.state.remaining_uncovered.size() == 3);
    // both words share the scripted keyword, so the second word's hit
    // deduplicates against the first
    REQUIRE(outcome.accepted.size() == 1);
    CHECK(outcome.accepted[0].target_word == "alpha");
    CHECK(outcome.state.collected_video_ids.size() == 1);
}

TEST_CASE("run_expansion_round refreshes stale uncovered sets", "[collection]") {
    auto target = make_target({"alpha", "beta", "gamma"});
    vocab::TokenMultiset corpus{{"alpha", 1}, {"beta", 1}};
    ScriptedClient client("keyword line\n");
    auto limits = fast_limits();
    limits.word_budget = 8;

    ExpansionState stale;
    stale.remaining_uncovered = {"alpha", "beta", "gamma"};
    auto outcome = run_expansion_round(stale, target, corpus, client, limits);
    CHECK(outcome.state.remaining_uncovered == std::set<std::string>{"gamma"});
    CHECK(outcome.state.coverage_history.back() == 2.0 / 3.0);
}

TEST_CASE("run_expansion_round with nothing uncovered only advances the round", "[collection]") {
    auto target = make_target({"alpha"});
    vocab::TokenMultiset corpus{{"alpha", 3}};
    ScriptedClient client("kw\n");
    auto outcome = run_expansion_round({}, target, corpus, client, fast_limits());
    CHECK(outcome.state.round == 1);
    CHECK(outcome.accepted.empty());
    CHECK(outcome.state.collected_video_ids.empty());
    CHECK(outcome.state.coverage_history == std::vector<double>{1.0});
    CHECK(client.completions.load() == 0);
}

TEST_CASE("a round of failing searches still returns a valid state", "[collection]") {
    auto target = make_target({"alpha", "beta"});
    FailingSearchClient client("kw\n");
    auto limits = fast_limits();

    ExpansionState state;
    state.collected_video_ids = {"existing"};
    auto outcome = run_expansion_round(state, target, {}, client, limits);
    CHECK(outcome.state.collected_video_ids == std::set<std::string>{"existing"});
    CHECK(outcome.failures.size() == 2);
    CHECK(outcome.accepted.empty());
    REQUIRE(outcome.state.coverage_history.size() == 1);
    CHECK(outcome.state.coverage_history[0] == 0.0);
    // three retry attempts per failing search
    CHECK(client.searches.load() == 2 * 3);
}

TEST_CASE("mock expansion runs are deterministic across schedules", "[collection]") {
    auto target = make_target({"alpha", "beta", "gamma", "delta", "epsilon", "zeta"});
    auto limits = fast_limits();
    limits.word_budget = 6;

    auto run = [&](int in_flight) {
        MockAnnotatorClient client(42);
        auto l = limits;
        l.max_in_flight = in_flight;
        auto outcome = run_expansion_round({}, target, {}, client, l);
        return io::expansion_state_to_json(outcome.state).dump() + "|" +
               [&] {
                   std::string ids;
                   for (const auto& c : outcome.accepted) ids += c.candidate.video_id + ",";
                   return ids;
               }();
    };
    auto a = run(4);
    auto b = run(4);
    auto c = run(1);
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("collected ids never duplicate across rounds", "[collection]") {
    auto target = make_target({"alpha", "beta"});
    MockAnnotatorClient client(7);
    auto limits = fast_limits();
    auto first = run_expansion_round({}, target, {}, client, limits);
    auto second = run_expansion_round(first.state, target, {}, client, limits);
    // same mock yields the same candidates; dedup keeps the set stable
    CHECK(second.state.collected_video_ids == first.state.collected_video_ids);
    CHECK(second.accepted.empty());
    CHECK(second.state.coverage_history.size() == 2);
    CHECK(second.state.coverage_history[0] <= second.state.coverage_history[1] + 1e-12);
}

TEST_CASE("should_stop respects threshold and round budget", "[collection]") {
    ExpansionState s;
    s.coverage_history = {0.96};
    s.round = 3;
    CHECK(should_stop(s, 0.95, 10));

    s.coverage_history = {0.50};
    s.round = 10;
    CHECK(should_stop(s, 0.95, 10));

    s.coverage_history = {0.949999};
    s.round = 1;
    CHECK_FALSE(should_stop(s, 0.95, 10));

    CHECK_FALSE(should_stop(ExpansionState{}, 0.95, 10));
}
