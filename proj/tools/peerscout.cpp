// Command line pipeline: ingest summaries, extract products, evaluate
// n-shot sweeps, rank comparable companies, analyze the similarity network.
//
// Exit codes: 0 success (per-item failures allowed), 1 usage or
// configuration error, 2 total operational failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peerscout/corpus.hpp"
#include "peerscout/eval.hpp"
#include "peerscout/extract.hpp"
#include "peerscout/manifest.hpp"
#include "peerscout/peers.hpp"
#include "peerscout/version.hpp"
#include "peerscout/wiki.hpp"

namespace {

using namespace peerscout;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct CommonOptions {
    std::string cache_dir;
    std::string corpus_path;
    std::string universe_path;
    std::string out_path;
    std::string format = "table";
};

struct ExtractorOptions {
    std::string extractor = "gazetteer";
    std::string model = "gpt-3.5-turbo";
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string credential_env = "OPENAI_API_KEY";
    double temperature = -1.0;  // negative: leave at service default
    std::size_t max_output_tokens = 256;
    std::size_t token_limit = 0;
    int retries = 3;
    int timeout_seconds = 60;
    int parallelism = 1;
    int min_interval_ms = 0;
};

void add_extractor_flags(CLI::App& cmd, ExtractorOptions& opts) {
    cmd.add_option("--extractor", opts.extractor, "Extractor kind")
        ->check(CLI::IsMember({"llm", "gazetteer", "replay"}))
        ->capture_default_str();
    cmd.add_option("--model", opts.model, "Model name for llm/replay extractors")
        ->capture_default_str();
    cmd.add_option("--endpoint", opts.endpoint, "Chat-completion endpoint URL")
        ->capture_default_str();
    cmd.add_option("--credential-env", opts.credential_env,
                   "Name of the environment variable holding the service key")
        ->capture_default_str();
    cmd.add_option("--temperature", opts.temperature,
                   "Sampling temperature (omit for the service default)");
    cmd.add_option("--max-output-tokens", opts.max_output_tokens,
                   "Completion token budget reserved for the response")
        ->capture_default_str();
    cmd.add_option("--token-limit", opts.token_limit,
                   "Model context limit override (0 derives it from the model name)")
        ->capture_default_str();
    cmd.add_option("--retries", opts.retries, "Retry count for service failures")
        ->capture_default_str();
    cmd.add_option("--timeout", opts.timeout_seconds, "Request timeout in seconds")
        ->capture_default_str();
    cmd.add_option("--parallelism", opts.parallelism, "Concurrent requests")
        ->capture_default_str();
    cmd.add_option("--min-interval-ms", opts.min_interval_ms,
                   "Minimum milliseconds between request starts")
        ->capture_default_str();
}

ExtractorConfig build_extractor_config(const ExtractorOptions& opts,
                                       const std::string& cache_dir,
                                       std::vector<AnnotatedDocument> train) {
    ExtractorConfig config;
    config.kind = *extractor_kind_from_string(opts.extractor);
    config.endpoint_url = opts.endpoint;
    config.model_name = opts.model;
    if (opts.temperature >= 0.0) config.temperature = opts.temperature;
    config.max_output_tokens = opts.max_output_tokens;
    config.credential_env = opts.credential_env;
    config.token_limit = opts.token_limit;
    config.retries = opts.retries;
    config.timeout_seconds = opts.timeout_seconds;
    config.min_interval = std::chrono::milliseconds(opts.min_interval_ms);
    if (!cache_dir.empty()) {
        config.response_dir = std::filesystem::path(cache_dir) / "responses";
    }
    config.train_examples = std::move(train);
    return config;
}

std::string extractor_config_text(const std::string& command,
                                  const ExtractorOptions& opts) {
    std::ostringstream text;
    text << "command=" << command << "\nextractor=" << opts.extractor << "\nmodel="
         << opts.model << "\nendpoint=" << opts.endpoint << "\ntemperature="
         << opts.temperature << "\nmax_output_tokens=" << opts.max_output_tokens
         << "\ntoken_limit=" << opts.token_limit << '\n';
    return text.str();
}

// Accepts "3", "1,4,7", and "0..9" range syntax.
std::vector<int> parse_shot_counts(const std::string& text) {
    std::vector<int> shots;
    const auto range = text.find("..");
    if (range != std::string::npos) {
        const int lo = std::stoi(text.substr(0, range));
        const int hi = std::stoi(text.substr(range + 2));
        if (hi < lo) throw std::invalid_argument("descending range: " + text);
        for (int n = lo; n <= hi; ++n) shots.push_back(n);
        return shots;
    }
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) shots.push_back(std::stoi(item));
    }
    if (shots.empty()) throw std::invalid_argument("no shot counts in: " + text);
    return shots;
}

void write_artifact(const std::filesystem::path& path, const RunManifest& manifest,
                    const std::string& body) {
    if (!path.parent_path().empty()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << manifest_line(manifest) << '\n' << body;
}

int cmd_ingest(const CommonOptions& common, const std::string& input_path,
               const WikiConfig& wiki_config, int parallelism) {
    const auto entries = load_ingest_list(input_path);
    if (entries.empty()) {
        std::cerr << "ingest: no entries in " << input_path << '\n';
        return kExitFailure;
    }
    WikiClient client(wiki_config);
    const auto [records, report] = client.ingest_universe(entries, parallelism);
    for (const auto& failure : report.failures) {
        std::cerr << "ingest: " << failure.input << ": " << failure.message << '\n';
    }
    if (records.empty()) {
        std::cerr << "ingest: all " << entries.size() << " entries failed\n";
        return kExitFailure;
    }

    std::vector<AnnotatedDocument> docs;
    docs.reserve(records.size());
    for (const auto& record : records) docs.push_back({record, {}});

    const auto manifest = make_manifest(
        "ingest", "command=ingest\napi_base=" + wiki_config.api_base + '\n',
        {{"input", input_path}});
    std::string body;
    for (const auto& doc : docs) body += corpus_line(doc) + '\n';
    write_artifact(common.out_path, manifest, body);

    std::cout << "ingested " << records.size() << " of " << entries.size()
              << " entries into " << common.out_path << '\n';
    return kExitOk;
}

int cmd_extract(const CommonOptions& common, const ExtractorOptions& opts) {
    const auto corpus = load_corpus(common.corpus_path);
    std::vector<AnnotatedDocument> targets;
    if (!common.universe_path.empty()) {
        targets = load_corpus(common.universe_path);
    } else {
        targets = corpus;
    }

    auto config = build_extractor_config(opts, common.cache_dir, corpus);
    if (const auto problem = config.validate(); !problem.empty()) {
        std::cerr << "extract: " << problem << '\n';
        return kExitUsage;
    }

    std::vector<CompanyRecord> records;
    records.reserve(targets.size());
    for (const auto& doc : targets) records.push_back(doc.company);

    const auto results = extract_batch(config, records, opts.parallelism);

    std::size_t failures = 0;
    for (const auto& result : results) {
        if (result.status == ExtractionStatus::parse_failed ||
            result.status == ExtractionStatus::service_failed) {
            ++failures;
            std::cerr << "extract: " << result.name << " (" << result.page_id
                      << "): " << to_string(result.status) << ": " << result.message
                      << '\n';
        }
    }

    std::vector<std::pair<std::string, std::filesystem::path>> inputs = {
        {"corpus", common.corpus_path}};
    if (!common.universe_path.empty()) inputs.push_back({"universe", common.universe_path});
    const auto manifest =
        make_manifest("extract", extractor_config_text("extract", opts), inputs);
    std::string body;
    for (const auto& result : results) body += result_line(result) + '\n';
    write_artifact(common.out_path, manifest, body);

    std::cout << "extracted " << results.size() - failures << " of " << results.size()
              << " targets into " << common.out_path << '\n';
    return failures == results.size() && !results.empty() ? kExitFailure : kExitOk;
}

int cmd_eval(const CommonOptions& common, const ExtractorOptions& opts,
             const std::string& shots_text, int trials, std::uint64_t seed) {
    const auto corpus = load_corpus(common.corpus_path);
    const auto shots = parse_shot_counts(shots_text);
    for (const int n : shots) {
        if (n < 0 || static_cast<std::size_t>(n) >= corpus.size()) {
            std::cerr << "eval: n_shot " << n << " out of range for a corpus of "
                      << corpus.size() << " documents\n";
            return kExitUsage;
        }
    }

    auto config = build_extractor_config(opts, common.cache_dir, {});
    if (const auto problem = config.validate(); !problem.empty()) {
        std::cerr << "eval: " << problem << '\n';
        return kExitUsage;
    }

    const int parallelism = opts.parallelism;
    const auto hook = [parallelism](const ExtractorConfig& trial_config,
                                    std::span<const CompanyRecord> targets) {
        return extract_batch(trial_config, targets, parallelism);
    };
    const auto sweep = run_sweep(config, corpus, shots, trials, seed, hook);

    const std::string csv = sweep_csv(sweep);
    if (!common.out_path.empty()) {
        std::ostringstream config_text;
        config_text << extractor_config_text("eval", opts) << "n_shots=" << shots_text
                    << "\ntrials=" << trials << "\nseed=" << seed << '\n';
        const auto manifest =
            make_manifest("eval", config_text.str(), {{"corpus", common.corpus_path}});
        write_artifact(common.out_path, manifest, csv);
    }
    std::cout << (common.format == "machine" ? csv : format_sweep_table(sweep));
    return kExitOk;
}

int cmd_peers(const CommonOptions& common, std::int64_t target_id, std::size_t top_n) {
    const auto corpus = load_corpus(common.corpus_path);
    const AnnotatedDocument* target = nullptr;
    for (const auto& doc : corpus) {
        if (doc.company.page_id == target_id) target = &doc;
    }
    if (!target) {
        std::cerr << "peers: target page id " << target_id << " not in "
                  << common.corpus_path << '\n';
        return kExitUsage;
    }

    const auto universe = load_results(common.universe_path);
    const auto peers = rank_peers(target_id, target->gold, universe, top_n);

    std::string machine;
    for (const auto& peer : peers) machine += peer_line(peer) + '\n';
    if (!common.out_path.empty()) {
        const auto manifest = make_manifest(
            "peers",
            "command=peers\ntarget=" + std::to_string(target_id) +
                "\ntop=" + std::to_string(top_n) + '\n',
            {{"corpus", common.corpus_path}, {"universe", common.universe_path}});
        write_artifact(common.out_path, manifest, machine);
    }
    if (common.format == "machine") {
        std::cout << machine;
    } else {
        std::cout << "peer group for " << target->company.name << " (" << target_id
                  << ")\n"
                  << format_peer_table(peers);
    }
    return kExitOk;
}

int cmd_network(const CommonOptions& common, const std::string& edges_path,
                const std::string& dist_path) {
    const auto universe = load_results(common.universe_path);
    const auto network = build_network(universe);
    const auto distribution = strength_distribution(network);
    const auto power = fit_power_law(distribution);
    const auto exponential = fit_exponential(distribution);

    const auto manifest =
        make_manifest("network", "command=network\n",
                      {{"universe", common.universe_path}});
    if (!edges_path.empty()) {
        write_artifact(edges_path, manifest, edges_csv(network));
    }
    if (!dist_path.empty()) {
        write_artifact(dist_path, manifest, distribution_csv(distribution));
    }
    std::cout << format_network_summary(network, distribution, power, exponential);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"company product extraction and peer group pipeline"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.set_config("--config", "", "INI config file; explicit flags win");
    app.require_subcommand(1);

    CommonOptions common;
    ExtractorOptions ext;

    auto* ingest = app.add_subcommand("ingest", "Fetch summaries into a corpus file");
    std::string ingest_input;
    WikiConfig wiki_config;
    int ingest_parallelism = 2;
    int ingest_interval_ms = 1000;
    ingest->add_option("--input", ingest_input, "Company names or page ids, one per line")
        ->required();
    ingest->add_option("--cache-dir", common.cache_dir, "Page cache directory")
        ->required();
    ingest->add_option("--out", common.out_path, "Corpus file to write")->required();
    ingest->add_option("--api-base", wiki_config.api_base, "MediaWiki API base URL")
        ->capture_default_str();
    ingest->add_option("--parallelism", ingest_parallelism, "Concurrent fetches")
        ->capture_default_str();
    ingest->add_option("--min-interval-ms", ingest_interval_ms,
                       "Minimum milliseconds between request starts")
        ->capture_default_str();
    ingest->add_option("--retries", wiki_config.retries, "Retry count")
        ->capture_default_str();
    ingest->add_option("--timeout", wiki_config.timeout_seconds,
                       "Request timeout in seconds")
        ->capture_default_str();

    auto* extract = app.add_subcommand("extract", "Extract product sets from summaries");
    extract->add_option("--corpus", common.corpus_path,
                        "Annotated corpus (training examples and dictionary)")
        ->required();
    extract->add_option("--universe", common.universe_path,
                        "Target corpus file (defaults to --corpus)");
    extract->add_option("--cache-dir", common.cache_dir,
                        "Cache root; responses stored under <cache-dir>/responses");
    extract->add_option("--out", common.out_path, "Results file to write")->required();
    add_extractor_flags(*extract, ext);

    auto* eval = app.add_subcommand("eval", "Run the n-shot evaluation sweep");
    std::string shots_text = "0..9";
    int trials = 3;
    std::uint64_t seed = 42;
    eval->add_option("--corpus", common.corpus_path, "Annotated corpus")->required();
    eval->add_option("--cache-dir", common.cache_dir,
                     "Cache root; responses stored under <cache-dir>/responses");
    eval->add_option("--n-shots", shots_text,
                     "Training example counts: N, N..M, or comma list")
        ->capture_default_str();
    eval->add_option("--trials", trials, "Trials per shot count")->capture_default_str();
    eval->add_option("--seed", seed, "Base seed for train/test splits")
        ->capture_default_str();
    eval->add_option("--out", common.out_path, "Series CSV file to write");
    eval->add_option("--format", common.format, "table or machine")
        ->check(CLI::IsMember({"table", "machine"}))
        ->capture_default_str();
    add_extractor_flags(*eval, ext);

    auto* peers = app.add_subcommand("peers", "Rank comparable companies for a target");
    std::int64_t target_id = 0;
    std::size_t top_n = 10;
    peers->add_option("--target", target_id, "Target company page id")->required();
    peers->add_option("--corpus", common.corpus_path, "Annotated corpus with the target")
        ->required();
    peers->add_option("--universe", common.universe_path, "Extraction results file")
        ->required();
    peers->add_option("--top", top_n, "Maximum peers to return")->capture_default_str();
    peers->add_option("--out", common.out_path, "Machine-readable peer file to write");
    peers->add_option("--format", common.format, "table or machine")
        ->check(CLI::IsMember({"table", "machine"}))
        ->capture_default_str();

    auto* network = app.add_subcommand("network", "Build the similarity network");
    std::string edges_path;
    std::string dist_path;
    network->add_option("--universe", common.universe_path, "Extraction results file")
        ->required();
    network->add_option("--out-edges", edges_path, "Edge list CSV to write");
    network->add_option("--out-dist", dist_path, "Strength distribution CSV to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (ingest->parsed()) {
            wiki_config.cache_dir = common.cache_dir;
            wiki_config.min_interval = std::chrono::milliseconds(ingest_interval_ms);
            return cmd_ingest(common, ingest_input, wiki_config, ingest_parallelism);
        }
        if (extract->parsed()) return cmd_extract(common, ext);
        if (eval->parsed()) return cmd_eval(common, ext, shots_text, trials, seed);
        if (peers->parsed()) return cmd_peers(common, target_id, top_n);
        if (network->parsed()) return cmd_network(common, edges_path, dist_path);
    } catch (const CorpusError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const WikiError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
