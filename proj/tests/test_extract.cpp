#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "peerscout/digest.hpp"
#include "peerscout/extract.hpp"
#include "test_support.hpp"

using namespace peerscout;
using nlohmann::json;
using testsupport::TempDir;
using testsupport::fixtures_dir;
using testsupport::read_file;
using testsupport::write_file;

namespace {

constexpr const char* kKeyEnv = "PEERSCOUT_TEST_KEY";

// Chat-completion stub that replays a scripted queue of responses and
// records the requests it saw.
class MockChat {
public:
    struct Scripted {
        int status = 200;
        std::string content;  // wrapped into a completion body when status 200
        bool raw_body = false;
        std::string body;
    };

    MockChat() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            std::lock_guard lock(mutex_);
            ++requests_;
            last_auth_ = req.get_header_value("Authorization");
            last_body_ = req.body;
            Scripted next;
            if (!script_.empty()) {
                next = script_.front();
                script_.pop_front();
            } else {
                next = {200, "{{'PRODUCT': []}}", false, ""};
            }
            res.status = next.status;
            if (next.raw_body) {
                res.set_content(next.body, "application/json");
            } else {
                json body = {{"id", "chatcmpl-test"},
                             {"object", "chat.completion"},
                             {"choices",
                              json::array({{{"index", 0},
                                            {"message", {{"role", "assistant"},
                                                         {"content", next.content}}},
                                            {"finish_reason", "stop"}}})}};
                res.set_content(body.dump(), "application/json");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockChat() {
        server_.stop();
        thread_.join();
    }

    void push(Scripted s) {
        std::lock_guard lock(mutex_);
        script_.push_back(std::move(s));
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }
    int requests() const {
        std::lock_guard lock(mutex_);
        return requests_;
    }
    std::string last_auth() const {
        std::lock_guard lock(mutex_);
        return last_auth_;
    }
    std::string last_body() const {
        std::lock_guard lock(mutex_);
        return last_body_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mutex_;
    int requests_ = 0;
    std::string last_auth_;
    std::string last_body_;
    std::deque<Scripted> script_;
};

CompanyRecord record(std::int64_t page_id, const std::string& name,
                     const std::string& summary) {
    CompanyRecord r;
    r.page_id = page_id;
    r.name = name;
    r.summary = normalize_text(summary);
    r.word_count = word_count(r.summary);
    return r;
}

AnnotatedDocument annotated(std::int64_t page_id, const std::string& summary,
                            std::initializer_list<std::string_view> gold) {
    AnnotatedDocument doc;
    doc.company = record(page_id, "doc" + std::to_string(page_id), summary);
    doc.gold = ProductSet::from_strings(gold);
    return doc;
}

ExtractorConfig llm_config(const std::string& endpoint,
                           const std::filesystem::path& response_dir) {
    ExtractorConfig config;
    config.kind = ExtractorKind::llm;
    config.endpoint_url = endpoint;
    config.model_name = "mock-model";
    config.credential_env = kKeyEnv;
    config.response_dir = response_dir;
    config.retries = 2;
    config.timeout_seconds = 5;
    return config;
}

// Independent matcher: term occurs at a space-delimited word start and its
// right neighbour is absent or non-alphanumeric.
bool occurs(const std::string& text, const std::string& term) {
    auto alnum = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    };
    for (std::size_t pos = 0; pos + term.size() <= text.size(); ++pos) {
        if (pos != 0 && text[pos - 1] != ' ') continue;
        if (text.compare(pos, term.size(), term) != 0) continue;
        if (pos + term.size() == text.size() || !alnum(text[pos + term.size()])) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("kind and status names round-trip") {
    for (auto kind : {ExtractorKind::llm, ExtractorKind::gazetteer,
                      ExtractorKind::replay}) {
        CHECK(extractor_kind_from_string(to_string(kind)) == kind);
    }
    for (auto status : {ExtractionStatus::ok, ExtractionStatus::empty,
                        ExtractionStatus::parse_failed,
                        ExtractionStatus::service_failed}) {
        CHECK(extraction_status_from_string(to_string(status)) == status);
    }
    CHECK_FALSE(extractor_kind_from_string("mystery").has_value());
    CHECK_FALSE(extraction_status_from_string("mystery").has_value());
}

TEST_CASE("default token limit keys off the 16k marker") {
    CHECK(default_token_limit("gpt-3.5-turbo") == 4096);
    CHECK(default_token_limit("gpt-3.5-turbo-16k") == 16384);
    CHECK(default_token_limit("gpt-3.5-turbo-16k-0613") == 16384);
    CHECK(default_token_limit("other") == 4096);
}

TEST_CASE("extractor ids name the kind and model") {
    ExtractorConfig config;
    config.kind = ExtractorKind::gazetteer;
    CHECK(config.extractor_id() == "gazetteer");
    config.kind = ExtractorKind::llm;
    config.model_name = "gpt-3.5-turbo";
    CHECK(config.extractor_id() == "llm:gpt-3.5-turbo");
    config.kind = ExtractorKind::replay;
    CHECK(config.extractor_id() == "replay:gpt-3.5-turbo");
}

TEST_CASE("validate pinpoints missing llm and replay settings") {
    ExtractorConfig config;
    config.kind = ExtractorKind::gazetteer;
    CHECK(config.validate().empty());

    config.kind = ExtractorKind::llm;
    CHECK_FALSE(config.validate().empty());
    config.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
    config.model_name = "m";
    config.credential_env = "PEERSCOUT_UNSET_KEY";
    unsetenv("PEERSCOUT_UNSET_KEY");
    CHECK(config.validate().find("PEERSCOUT_UNSET_KEY") != std::string::npos);
    setenv("PEERSCOUT_UNSET_KEY", "x", 1);
    CHECK(config.validate().empty());
    unsetenv("PEERSCOUT_UNSET_KEY");

    config.kind = ExtractorKind::replay;
    config.response_dir.clear();
    CHECK_FALSE(config.validate().empty());
    config.response_dir = "/tmp";
    CHECK(config.validate().empty());
}

TEST_CASE("response_path buckets by model and prompt digest") {
    const auto path = response_path("/store", "gpt-3.5-turbo", "prompt text");
    CHECK(path == std::filesystem::path("/store/gpt-3.5-turbo/"
                                        "86f704a3919a173d7a7020a33a62e7aa2614ef"
                                        "fb8612f2d4aad41812fae61472.json"));
}

TEST_CASE("chat_completion_content pulls the first choice") {
    CHECK(chat_completion_content(
              R"({"choices":[{"message":{"content":"hello"}}]})") == "hello");
    CHECK_FALSE(chat_completion_content("not json").has_value());
    CHECK_FALSE(chat_completion_content(R"({"choices":[]})").has_value());
    CHECK_FALSE(chat_completion_content(R"({"choices":[{"message":{}}]})").has_value());
}

TEST_CASE("gazetteer predicts every dictionary term at a word boundary") {
    ExtractorConfig config;
    config.kind = ExtractorKind::gazetteer;
    config.train_examples = {
        annotated(1, "", {"gas", "natural gas", "oil", "gps technology",
                          "satellites", "it's"})};

    const auto target = record(
        9, "T",
        "The firm sells natural gas, oil, and GPS technology worldwide.");
    const auto result = extract(config, target);
    CHECK(result.status == ExtractionStatus::ok);
    CHECK(result.extractor_id == "gazetteer");
    // "gas" and "natural gas" both occur; all occurrences are reported.
    // Absent dictionary terms (satellites, it's) stay out.
    CHECK(result.predicted ==
          ProductSet::from_strings({"gas", "natural gas", "oil", "gps technology"}));
}

TEST_CASE("gazetteer respects word boundaries") {
    ExtractorConfig config;
    config.kind = ExtractorKind::gazetteer;
    config.train_examples = {annotated(1, "", {"gas", "oil"})};

    CHECK(extract(config, record(2, "T", "gasoline prices")).predicted.empty());
    CHECK(extract(config, record(3, "T", "Big Oil. profits")).predicted ==
          ProductSet::from_strings({"oil"}));
    CHECK(extract(config, record(4, "T", "turmoil everywhere")).predicted.empty());
    CHECK(extract(config, record(5, "T", "gas")).predicted ==
          ProductSet::from_strings({"gas"}));
    CHECK(extract(config, record(6, "T", "liquefied gas, mostly")).predicted ==
          ProductSet::from_strings({"gas"}));
}

TEST_CASE("gazetteer with an empty dictionary predicts nothing and stays ok") {
    ExtractorConfig config;
    config.kind = ExtractorKind::gazetteer;
    const auto result = extract(config, record(1, "T", "sells oil"));
    CHECK(result.status == ExtractionStatus::ok);
    CHECK(result.predicted.empty());
}

TEST_CASE("gazetteer agrees with the brute-force matcher on random cases") {
    std::mt19937_64 rng(4242);
    const std::vector<std::string> vocab = {
        "gas",       "natural gas",  "oil",        "crude oil",
        "satellite", "satellites",   "lithium",    "power generation",
        "wind",      "wind power",   "gps",        "gps technology",
        "ice cream", "cream",        "tea",        "x9",
    };
    const std::vector<std::string> fillers = {"the",    "firm",  "sells", "and",
                                              "mostly", "fine",  "goods", "overseas",
                                              "gaso",   "oiled", "teak",  "icecream"};
    for (int iter = 0; iter < 300; ++iter) {
        ProductSet dictionary;
        for (const auto& term : vocab) {
            if (rng() % 2) dictionary.insert(term);
        }
        std::string text;
        const std::size_t tokens = rng() % 30;
        for (std::size_t t = 0; t < tokens; ++t) {
            if (!text.empty()) text += ' ';
            std::string word = rng() % 3 == 0 ? vocab[rng() % vocab.size()]
                                              : fillers[rng() % fillers.size()];
            switch (rng() % 5) {
                case 0: word += ','; break;
                case 1: word += '.'; break;
                case 2: word = "(" + word + ")"; break;
                default: break;
            }
            text += word;
        }

        AnnotatedDocument dict_doc;
        dict_doc.company = record(1, "dict", "");
        dict_doc.gold = dictionary;
        ExtractorConfig config;
        config.kind = ExtractorKind::gazetteer;
        config.train_examples = {dict_doc};

        const auto target = record(2, "T", text);
        const auto result = extract(config, target);

        ProductSet expected;
        const auto lowered = ascii_lower(target.summary.str());
        for (const auto& term : dictionary) {
            if (occurs(lowered, term)) expected.insert(term);
        }
        CAPTURE(text);
        CHECK(result.predicted == expected);
    }
}

TEST_CASE("llm extraction posts the prompt and caches the response") {
    setenv(kKeyEnv, "test-key-123", 1);
    MockChat mock;
    TempDir tmp("llm_ok");
    auto config = llm_config(mock.endpoint(), tmp.path());
    config.train_examples = {annotated(1, "Maker of pumps.", {"pumps"})};

    mock.push({200, "{{'PRODUCT': ['oil', 'gas']}}", false, ""});
    const auto target = record(7, "Oily", "Oily sells oil and gas.");
    const auto result = extract(config, target);

    CHECK(result.status == ExtractionStatus::ok);
    CHECK(result.predicted == ProductSet::from_strings({"gas", "oil"}));
    CHECK(result.extractor_id == "llm:mock-model");
    REQUIRE(result.raw.has_value());
    CHECK(result.raw->text == "{{'PRODUCT': ['oil', 'gas']}}");
    CHECK(mock.requests() == 1);
    CHECK(mock.last_auth() == "Bearer test-key-123");

    const auto request = json::parse(mock.last_body());
    CHECK(request["model"] == "mock-model");
    REQUIRE(request["messages"].size() == 2);
    CHECK(request["messages"][0]["role"] == "system");
    CHECK(request["messages"][0]["content"] == "");
    CHECK(request["messages"][1]["role"] == "user");
    const auto prompt = request["messages"][1]["content"].get<std::string>();
    CHECK(prompt.find("2. Sentence: Oily sells oil and gas.") != std::string::npos);
    CHECK_FALSE(request.contains("temperature"));
    CHECK(request["max_tokens"] == 256);

    // The verbatim body lands in the response store, keyed by prompt digest.
    const auto stored = response_path(tmp.path(), "mock-model", prompt);
    REQUIRE(std::filesystem::exists(stored));
    CHECK(chat_completion_content(read_file(stored)) ==
          "{{'PRODUCT': ['oil', 'gas']}}");

    // A rerun against a dead endpoint is served from the store.
    auto offline = llm_config("http://127.0.0.1:1/v1/chat/completions", tmp.path());
    offline.train_examples = config.train_examples;
    const auto cached = extract(offline, target);
    CHECK(cached.status == ExtractionStatus::ok);
    CHECK(cached.predicted == result.predicted);
    CHECK(mock.requests() == 1);
}

TEST_CASE("llm requests carry temperature only when configured") {
    setenv(kKeyEnv, "test-key-123", 1);
    MockChat mock;
    TempDir tmp("llm_temp");
    auto config = llm_config(mock.endpoint(), tmp.path());
    config.temperature = 0.0;
    mock.push({200, "{{'PRODUCT': None}}", false, ""});
    extract(config, record(8, "T", "A company."));
    const auto request = json::parse(mock.last_body());
    REQUIRE(request.contains("temperature"));
    CHECK(request["temperature"] == 0.0);
}

TEST_CASE("llm retries transient failures and stops on hard ones") {
    setenv(kKeyEnv, "test-key-123", 1);

    SUBCASE("500 then success") {
        MockChat mock;
        TempDir tmp("llm_500");
        auto config = llm_config(mock.endpoint(), tmp.path());
        mock.push({500, "", true, "upstream exploded"});
        mock.push({200, "{{'PRODUCT': ['oil']}}", false, ""});
        const auto result = extract(config, record(9, "T", "Sells oil."));
        CHECK(result.status == ExtractionStatus::ok);
        CHECK(mock.requests() == 2);
    }

    SUBCASE("429 exhausts retries") {
        MockChat mock;
        TempDir tmp("llm_429");
        auto config = llm_config(mock.endpoint(), tmp.path());
        config.retries = 1;
        mock.push({429, "", true, "slow down"});
        mock.push({429, "", true, "slow down"});
        const auto result = extract(config, record(10, "T", "Sells oil."));
        CHECK(result.status == ExtractionStatus::service_failed);
        CHECK(result.message.find("429") != std::string::npos);
        CHECK(mock.requests() == 2);
    }

    SUBCASE("401 is not retried") {
        MockChat mock;
        TempDir tmp("llm_401");
        auto config = llm_config(mock.endpoint(), tmp.path());
        mock.push({401, "", true, "bad key"});
        const auto result = extract(config, record(11, "T", "Sells oil."));
        CHECK(result.status == ExtractionStatus::service_failed);
        CHECK(result.message.find("401") != std::string::npos);
        CHECK(mock.requests() == 1);
    }

    SUBCASE("unreachable endpoint") {
        TempDir tmp("llm_dead");
        auto config = llm_config("http://127.0.0.1:1/v1/chat/completions", tmp.path());
        const auto result = extract(config, record(12, "T", "Sells oil."));
        CHECK(result.status == ExtractionStatus::service_failed);
        CHECK(result.message.find("connection failed") != std::string::npos);
    }
}

TEST_CASE("llm classifies empty, unparseable, and malformed responses") {
    setenv(kKeyEnv, "test-key-123", 1);

    SUBCASE("explicit none is empty") {
        MockChat mock;
        TempDir tmp("llm_none");
        auto config = llm_config(mock.endpoint(), tmp.path());
        mock.push({200, "{{'PRODUCT': None}}", false, ""});
        const auto result = extract(config, record(13, "T", "A shell company."));
        CHECK(result.status == ExtractionStatus::empty);
        CHECK(result.predicted.empty());
        CHECK(result.raw.has_value());
    }

    SUBCASE("prose without a construct is parse_failed") {
        MockChat mock;
        TempDir tmp("llm_prose");
        auto config = llm_config(mock.endpoint(), tmp.path());
        mock.push({200, "I could not find any entities worth reporting.", false, ""});
        const auto result = extract(config, record(14, "T", "A shell company."));
        CHECK(result.status == ExtractionStatus::parse_failed);
        REQUIRE(result.raw.has_value());
        CHECK(result.raw->text == "I could not find any entities worth reporting.");
        CHECK_FALSE(result.message.empty());
    }

    SUBCASE("non-completion body is service_failed") {
        MockChat mock;
        TempDir tmp("llm_bad_body");
        auto config = llm_config(mock.endpoint(), tmp.path());
        mock.push({200, "", true, "surprise plain text"});
        const auto result = extract(config, record(15, "T", "A shell company."));
        CHECK(result.status == ExtractionStatus::service_failed);
        CHECK(result.message.find("malformed") != std::string::npos);
    }
}

TEST_CASE("invalid config surfaces as service_failed rather than a throw") {
    ExtractorConfig config;
    config.kind = ExtractorKind::llm;
    const auto result = extract(config, record(1, "T", "text"));
    CHECK(result.status == ExtractionStatus::service_failed);
    CHECK_FALSE(result.message.empty());
}

TEST_CASE("oversize prompts fail before any service call") {
    setenv(kKeyEnv, "test-key-123", 1);
    const auto corpus =
        load_corpus(fixtures_dir() / "corpus" / "companies13.jsonl");
    const auto universe =
        load_corpus(fixtures_dir() / "universe" / "universe20.jsonl");
    const CompanyRecord& chevron = universe.front().company;
    REQUIRE(chevron.page_id == 284749);

    // Thirteen examples push the prompt past the 4096-token budget of the
    // base model; the 16k variant accepts it and replays the recording.
    auto config = llm_config("http://127.0.0.1:1/v1/chat/completions",
                             fixtures_dir() / "cache" / "responses");
    config.train_examples = corpus;
    config.model_name = "gpt-3.5-turbo";
    const auto blocked = extract(config, chevron);
    CHECK(blocked.status == ExtractionStatus::service_failed);
    CHECK(blocked.message.find("exceeds model limit 4096") != std::string::npos);

    config.model_name = "gpt-3.5-turbo-16k";
    const auto replayed = extract(config, chevron);
    CHECK(replayed.status == ExtractionStatus::ok);
    CHECK(replayed.predicted ==
          ProductSet::from_strings({"energy", "gas", "lubricants", "oil",
                                    "power generation", "refining"}));
}

TEST_CASE("replay serves recordings and fails loudly on misses") {
    const auto corpus =
        load_corpus(fixtures_dir() / "corpus" / "companies13.jsonl");
    const auto universe =
        load_corpus(fixtures_dir() / "universe" / "universe20.jsonl");

    ExtractorConfig config;
    config.kind = ExtractorKind::replay;
    config.model_name = "gpt-3.5-turbo-16k";
    config.response_dir = fixtures_dir() / "cache" / "responses";
    config.train_examples = corpus;

    const auto hit = extract(config, universe.front().company);
    CHECK(hit.status == ExtractionStatus::ok);
    CHECK(hit.extractor_id == "replay:gpt-3.5-turbo-16k");

    const auto miss = extract(config, record(424242, "Novel Co", "Entirely new text."));
    CHECK(miss.status == ExtractionStatus::service_failed);
    CHECK(miss.message.find("no recorded response") != std::string::npos);
    CHECK(miss.message.find(sha256_hex(render_prompt(
              config.train_examples, normalize_text("Entirely new text.")))) !=
          std::string::npos);
}

TEST_CASE("extract_batch keeps input order and honors the cache override") {
    const auto corpus =
        load_corpus(fixtures_dir() / "corpus" / "companies13.jsonl");
    const auto universe =
        load_corpus(fixtures_dir() / "universe" / "universe20.jsonl");
    std::vector<CompanyRecord> targets;
    for (const auto& doc : universe) targets.push_back(doc.company);

    ExtractorConfig config;
    config.kind = ExtractorKind::replay;
    config.model_name = "gpt-3.5-turbo-16k";
    config.response_dir = "/nonexistent";
    config.train_examples = corpus;

    const auto results = extract_batch(config, targets, 4,
                                       fixtures_dir() / "cache" / "responses");
    REQUIRE(results.size() == targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        CHECK(results[i].page_id == targets[i].page_id);
        CHECK(results[i].status == ExtractionStatus::ok);
    }
}

TEST_CASE("results round-trip through their jsonl serialization") {
    TempDir tmp("results_io");
    const auto path = tmp.path() / "results.jsonl";

    std::vector<ExtractionResult> results(4);
    results[0].page_id = 1;
    results[0].name = "A";
    results[0].extractor_id = "gazetteer";
    results[0].predicted = ProductSet::from_strings({"oil", "gas"});
    results[0].status = ExtractionStatus::ok;
    results[1].page_id = 2;
    results[1].extractor_id = "llm:m";
    results[1].status = ExtractionStatus::empty;
    results[1].raw = RawModelOutput{"{{'PRODUCT': None}}"};
    results[2].page_id = 3;
    results[2].extractor_id = "llm:m";
    results[2].status = ExtractionStatus::parse_failed;
    results[2].raw = RawModelOutput{"gibberish"};
    results[2].message = "no recognizable PRODUCT construct in response";
    results[3].page_id = 4;
    results[3].extractor_id = "replay:m";
    results[3].status = ExtractionStatus::service_failed;
    results[3].message = "no recorded response for prompt digest abc";

    const std::vector<std::string> header = {"# manifest {\"command\":\"test\"}"};
    save_results(path, results, header);
    const auto loaded = load_results(path);
    REQUIRE(loaded.size() == results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(loaded[i].page_id == results[i].page_id);
        CHECK(loaded[i].name == results[i].name);
        CHECK(loaded[i].extractor_id == results[i].extractor_id);
        CHECK(loaded[i].predicted == results[i].predicted);
        CHECK(loaded[i].status == results[i].status);
        CHECK(loaded[i].message == results[i].message);
        CHECK((loaded[i].raw.has_value() == results[i].raw.has_value()));
        if (loaded[i].raw) CHECK(loaded[i].raw->text == results[i].raw->text);
    }
}

TEST_CASE("load_results reports the offending line") {
    TempDir tmp("results_err");
    const auto path = tmp.path() / "bad.jsonl";

    write_file(path, "# ok\n{\"page_id\":1,\"extractor_id\":\"g\",\"status\":\"nope\","
                     "\"predicted\":[]}\n");
    CHECK_THROWS_AS(load_results(path), std::runtime_error);

    write_file(path, "{\"page_id\":-4,\"extractor_id\":\"g\",\"status\":\"ok\","
                     "\"predicted\":[]}\n");
    CHECK_THROWS_AS(load_results(path), std::runtime_error);

    write_file(path, "# one\nnot json\n");
    try {
        load_results(path);
        FAIL("expected runtime_error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }

    CHECK_THROWS_AS(load_results(tmp.path() / "absent.jsonl"), std::runtime_error);
}
