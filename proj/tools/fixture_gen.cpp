// Regenerates the derived test fixtures from the hand-authored sources:
//   corpus/companies13.jsonl   canonical corpus (cache pages + annotations)
//   golden/apple_prompt.txt    one-example prompt render
//   cache/responses/...        recorded responses for the replay extractor
//   universe/universe20_results.jsonl  replay extraction over the universe
//
// Run from the repository root after editing cache pages, annotations, or
// the universe file:  fixture-gen [fixtures-dir]

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "peerscout/corpus.hpp"
#include "peerscout/digest.hpp"
#include "peerscout/eval.hpp"
#include "peerscout/extract.hpp"
#include "peerscout/prompt.hpp"
#include "peerscout/rand.hpp"
#include "peerscout/wiki.hpp"

namespace {

using namespace peerscout;
using nlohmann::json;

constexpr std::uint64_t kBaseSeed = 42;
constexpr int kTrials = 3;
constexpr int kMaxShots = 9;
constexpr const char* kSweepModel = "gpt-3.5-turbo";
constexpr const char* kUniverseModel = "gpt-3.5-turbo-16k";

// Simulated recall rate: improves with the number of training examples.
double recall_rate(int n_shot) { return 0.50 + 0.045 * n_shot; }

// Distractor predictions; none occurs in any gold set (asserted below).
const std::vector<std::string> kDistractors = {"marketing", "logistics",
                                               "advertising", "sponsorship"};

// Predicted product sets recorded for the out-of-sample universe. The
// page-id keyed lists pin the peer-ranking fixture counts.
const std::map<std::int64_t, std::vector<std::string>> kUniversePredictions = {
    {284749, {"energy", "gas", "lubricants", "oil", "power generation", "refining"}},
    {1325529, {"crude oil", "gas", "natural gas", "oil", "pipelines", "refining"}},
    {1325530, {"crude oil", "drilling services", "gas", "natural gas", "oil"}},
    {23409980, {"chemicals", "gas", "lubricants", "oil", "power generation"}},
    {18998720, {"biofuels", "gas", "oil", "power generation", "refining"}},
    {28014927, {"electricity", "energy", "natural gas", "oil", "wind power"}},
    {47428211, {"natural gas", "oil", "petrochemicals", "refining"}},
    {2086678, {"crude oil", "energy", "exploration services", "natural gas"}},
    {15366815, {"crude oil", "natural gas", "oil", "royalty interests"}},
    {1140903, {"gas", "liquefied natural gas", "natural gas", "oil"}},
    {32320197, {"earth observation imagery", "satellites"}},
    {1075261, {"air conditioners", "elevators", "satellites"}},
    {54647879, {"satellites", "transponder leasing"}},
    {63554945, {"aircraft engines", "missiles", "satellites"}},
    {18933266, {"commercial airplanes", "rockets", "satellites"}},
    {8207797, {"carbon fiber", "composite materials", "satellites"}},
    {451805, {"broadband", "data communication", "mobile telephone services"}},
    {2415553, {"satellites", "video broadcasting"}},
    {374039, {"cellular services", "satellite"}},
    {8484883, {"analog semiconductors", "mixed-signal semiconductors", "satellites"}},
};

std::string joined_items(const ProductSet& items, char quote) {
    std::string out;
    bool first = true;
    for (const auto& item : items) {
        if (!first) out += ", ";
        out += quote;
        out += item;
        out += quote;
        first = false;
    }
    return out;
}

// Response content in one of several shapes the tolerant parser accepts,
// chosen by the style selector so the recordings exercise all of them.
std::string response_content(const ProductSet& items, std::uint64_t style) {
    if (items.empty()) {
        return (style & 1) ? "{{'PRODUCT': None}}" : "{{'PRODUCT': []}}";
    }
    switch (style % 6) {
        case 0: return format_output_value(items);
        case 1: return "{\"PRODUCT\": [" + joined_items(items, '"') + "]}";
        case 2:
            return "Sure! Here is the output: {{'PRODUCT': [" +
                   joined_items(items, '\'') + "]}} Hope that helps.";
        case 3: return "Output: " + format_output_value(items);
        case 4: return "{ 'PRODUCT' : [ " + joined_items(items, '\'') + " ] }";
        case 5: return "{{'product': [" + joined_items(items, '\'') + "]}}";
    }
    return format_output_value(items);
}

std::string response_body(const std::string& model, const std::string& content) {
    nlohmann::ordered_json body;
    body["id"] = "chatcmpl-fixture";
    body["object"] = "chat.completion";
    body["model"] = model;
    body["choices"] = nlohmann::ordered_json::array();
    body["choices"].push_back({{"index", 0},
                               {"message", {{"role", "assistant"}, {"content", content}}},
                               {"finish_reason", "stop"}});
    return body.dump();
}

void write_recording(const std::filesystem::path& responses_dir,
                     const std::string& model, const std::string& prompt,
                     const ProductSet& expected, const std::string& content) {
    const auto parsed = parse_output(content);
    if (!parsed || !(*parsed == expected)) {
        std::cerr << "fixture-gen: self-check failed for content: " << content << '\n';
        std::exit(1);
    }
    const auto path = response_path(responses_dir, model, prompt);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << response_body(model, content);
}

// Deterministic simulated prediction: a recall_rate(n) subset of the gold
// set plus an occasional distractor.
ProductSet simulate_prediction(const AnnotatedDocument& doc, int n_shot, int trial) {
    std::uint64_t state = splitmix64(kBaseSeed ^ splitmix64(
        (static_cast<std::uint64_t>(n_shot) << 40) ^
        (static_cast<std::uint64_t>(trial) << 32) ^
        static_cast<std::uint64_t>(doc.company.page_id)));
    auto next_unit = [&state]() {
        state = splitmix64(state);
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };

    ProductSet predicted;
    const double rate = recall_rate(n_shot);
    for (const auto& item : doc.gold) {
        if (next_unit() < rate) predicted.insert(item);
    }
    if (next_unit() < 0.15) {
        state = splitmix64(state);
        predicted.insert(kDistractors[state % kDistractors.size()]);
    }
    return predicted;
}

std::map<std::int64_t, ProductSet> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "fixture-gen: cannot open " << path << '\n';
        std::exit(1);
    }
    std::map<std::int64_t, ProductSet> annotations;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const json obj = json::parse(line);
        ProductSet products;
        for (const auto& item : obj.at("products")) {
            products.insert(item.get<std::string>());
        }
        annotations[obj.at("page_id").get<std::int64_t>()] = std::move(products);
    }
    return annotations;
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path fixtures = argc > 1 ? argv[1] : "fixtures";
    const auto cache_dir = fixtures / "cache";
    const auto responses_dir = cache_dir / "responses";

    WikiConfig wiki_config;
    wiki_config.api_base = "http://127.0.0.1:1/w/api.php";  // cache only, no network
    wiki_config.cache_dir = cache_dir;
    wiki_config.min_interval = std::chrono::milliseconds(0);
    WikiClient client(wiki_config);

    const auto ids = load_ingest_list(fixtures / "corpus" / "page_ids.txt");
    const auto annotations = load_annotations(fixtures / "corpus" / "annotations.jsonl");

    std::vector<AnnotatedDocument> corpus;
    for (const auto& entry : ids) {
        const auto cached = client.fetch_summary(entry.page_id);
        AnnotatedDocument doc;
        doc.company.name = cached.page_ref.title;
        doc.company.page_id = cached.page_ref.page_id;
        doc.company.summary = cached.normalized_summary;
        doc.company.word_count = word_count(doc.company.summary);
        const auto annotation = annotations.find(entry.page_id);
        if (annotation == annotations.end()) {
            std::cerr << "fixture-gen: no annotation for page " << entry.page_id << '\n';
            return 1;
        }
        doc.gold = annotation->second;
        corpus.push_back(std::move(doc));
    }
    save_corpus(fixtures / "corpus" / "companies13.jsonl", corpus);
    std::cout << "wrote corpus with " << corpus.size() << " records\n";

    for (const auto& doc : corpus) {
        for (const auto& distractor : kDistractors) {
            if (doc.gold.contains(distractor)) {
                std::cerr << "fixture-gen: distractor '" << distractor
                          << "' collides with gold of " << doc.company.name << '\n';
                return 1;
            }
        }
    }

    const AnnotatedDocument* apple = nullptr;
    const AnnotatedDocument* sqm = nullptr;
    for (const auto& doc : corpus) {
        if (doc.company.page_id == 856) apple = &doc;
        if (doc.company.page_id == 7290045) sqm = &doc;
    }
    if (!apple || !sqm) {
        std::cerr << "fixture-gen: corpus is missing the Apple or SQM record\n";
        return 1;
    }
    std::filesystem::create_directories(fixtures / "golden");
    {
        std::ofstream out(fixtures / "golden" / "apple_prompt.txt",
                          std::ios::binary | std::ios::trunc);
        out << render_prompt(std::span(apple, 1), sqm->company.summary);
    }
    std::cout << "wrote golden prompt\n";

    // The SQM zero-shot recording is pinned to the worked example the
    // metrics acceptance check uses; the rest are simulated.
    const ProductSet sqm_zero_shot = ProductSet::from_strings(
        {"plant nutrients", "iodine", "lithium", "industrial chemicals"});

    std::size_t recordings = 0;
    for (int n = 0; n <= kMaxShots; ++n) {
        for (int trial = 0; trial < kTrials; ++trial) {
            const auto seed = derive_trial_seed(kBaseSeed, n, trial);
            const auto split = split_train_test(corpus, static_cast<std::size_t>(n), seed);
            for (const auto& doc : split.test) {
                const auto prompt = render_prompt(split.train, doc.company.summary);
                const auto path = response_path(responses_dir, kSweepModel, prompt);
                if (std::filesystem::exists(path)) continue;

                ProductSet predicted;
                if (n == 0 && doc.company.page_id == 7290045) {
                    predicted = sqm_zero_shot;
                } else {
                    predicted = simulate_prediction(doc, n, trial);
                }
                const auto style = splitmix64(
                    std::hash<std::string>{}(sha256_hex(prompt)));
                const std::string content =
                    (n == 0 && doc.company.page_id == 7290045)
                        ? "{{'PRODUCT': ['plant nutrients', 'iodine', 'lithium', "
                          "'industrial chemicals']}}"
                        : response_content(predicted, style);
                write_recording(responses_dir, kSweepModel, prompt, predicted, content);
                ++recordings;
            }
        }
    }
    std::cout << "wrote " << recordings << " sweep recordings\n";

    const auto universe =
        load_corpus(fixtures / "universe" / "universe20.jsonl");
    std::size_t universe_recordings = 0;
    for (const auto& doc : universe) {
        const auto prediction = kUniversePredictions.find(doc.company.page_id);
        if (prediction == kUniversePredictions.end()) {
            std::cerr << "fixture-gen: no planned prediction for page "
                      << doc.company.page_id << '\n';
            return 1;
        }
        const auto predicted = ProductSet::from_strings(prediction->second);
        const auto prompt = render_prompt(corpus, doc.company.summary);
        write_recording(responses_dir, kUniverseModel, prompt, predicted,
                        format_output_value(predicted));
        ++universe_recordings;
    }
    std::cout << "wrote " << universe_recordings << " universe recordings\n";

    ExtractorConfig replay;
    replay.kind = ExtractorKind::replay;
    replay.model_name = kUniverseModel;
    replay.response_dir = responses_dir;
    replay.train_examples = corpus;
    std::vector<CompanyRecord> targets;
    for (const auto& doc : universe) targets.push_back(doc.company);
    const auto results = extract_batch(replay, targets, 1);
    for (const auto& result : results) {
        if (result.status != ExtractionStatus::ok) {
            std::cerr << "fixture-gen: universe replay failed for " << result.page_id
                      << ": " << result.message << '\n';
            return 1;
        }
    }
    save_results(fixtures / "universe" / "universe20_results.jsonl", results);
    std::cout << "wrote universe results for " << results.size() << " companies\n";
    return 0;
}
