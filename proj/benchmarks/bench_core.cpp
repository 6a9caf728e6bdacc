#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "peerscout/corpus.hpp"
#include "peerscout/extract.hpp"
#include "peerscout/peers.hpp"
#include "peerscout/prompt.hpp"
#include "peerscout/text.hpp"

using namespace peerscout;

namespace {

std::string mixed_raw_text(std::size_t approx_bytes) {
    static const std::vector<std::string> chunks = {
        "Sociedad  Qu\xc3\xadmica y Minera ",  "designs and sells chemicals,\n",
        "plant\tnutrients, iodine and ",       "lithium \xe2\x84\xa2 products ",
        "for customers worldwide. ",           "\xc3\x9c" "ber \xc5\x92uvre \xc3\x86on ",
    };
    std::string raw;
    std::size_t i = 0;
    while (raw.size() < approx_bytes) raw += chunks[i++ % chunks.size()];
    return raw;
}

ExtractorConfig gazetteer_config() {
    ExtractorConfig config;
    config.kind = ExtractorKind::gazetteer;
    AnnotatedDocument doc;
    doc.company.page_id = 1;
    doc.company.name = "Vocab";
    doc.gold = ProductSet::from_strings(
        {"oil", "natural gas", "gas", "lithium", "iodine", "plant nutrients",
         "chemical", "satellites", "gps technology", "power generation",
         "refining", "lubricants", "wind power", "solar power", "jet fuel",
         "asphalt"});
    config.train_examples = {doc};
    return config;
}

CompanyRecord long_target() {
    CompanyRecord target;
    target.page_id = 2;
    target.name = "Target";
    std::string text;
    for (int i = 0; i < 40; ++i) {
        text +=
            "The company explores for oil and natural gas, refines crude into "
            "jet fuel and asphalt, and sells lithium, iodine and plant "
            "nutrients alongside gps technology and wind power services. ";
    }
    target.summary = normalize_text(text);
    return target;
}

std::vector<ExtractionResult> synthetic_universe(std::size_t companies) {
    std::mt19937_64 rng(99);
    std::vector<std::string> vocab;
    for (int i = 0; i < 60; ++i) vocab.push_back("product" + std::to_string(i));
    std::vector<ExtractionResult> results;
    for (std::size_t i = 0; i < companies; ++i) {
        ExtractionResult r;
        r.page_id = static_cast<std::int64_t>(i + 1);
        r.name = "Company " + std::to_string(i + 1);
        r.extractor_id = "synthetic";
        const std::size_t n = 2 + rng() % 8;
        for (std::size_t k = 0; k < n; ++k) r.predicted.insert(vocab[rng() % vocab.size()]);
        r.status = ExtractionStatus::ok;
        results.push_back(std::move(r));
    }
    return results;
}

void bench_normalize_text(benchmark::State& state) {
    const auto raw = mixed_raw_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize_text(raw));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(raw.size()));
}
BENCHMARK(bench_normalize_text)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 18);

void bench_gazetteer_extract(benchmark::State& state) {
    const auto config = gazetteer_config();
    const auto target = long_target();
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract(config, target));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(target.summary.str().size()));
}
BENCHMARK(bench_gazetteer_extract);

void bench_parse_output(benchmark::State& state) {
    const std::string response =
        "Sure, here are the extracted entities: {{'PRODUCT': ['oil', 'natural "
        "gas', 'lithium', 'plant nutrients', 'gps technology', 'satellites', "
        "'power generation', 'refining']}} as requested.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_output(response));
    }
}
BENCHMARK(bench_parse_output);

void bench_build_network(benchmark::State& state) {
    const auto universe = synthetic_universe(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_network(universe));
    }
}
BENCHMARK(bench_build_network)->Arg(20)->Arg(100)->Arg(400);

void bench_render_prompt(benchmark::State& state) {
    std::vector<AnnotatedDocument> train;
    for (int i = 0; i < 9; ++i) {
        AnnotatedDocument doc;
        doc.company.page_id = i + 1;
        doc.company.name = "Example " + std::to_string(i + 1);
        doc.company.summary = long_target().summary;
        doc.gold = ProductSet::from_strings({"oil", "natural gas", "lithium"});
        train.push_back(std::move(doc));
    }
    const auto target = long_target();
    for (auto _ : state) {
        benchmark::DoNotOptimize(render_prompt(train, target.summary));
    }
}
BENCHMARK(bench_render_prompt);

}  // namespace

BENCHMARK_MAIN();
