#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peerscout/corpus.hpp"
#include "peerscout/prompt.hpp"

namespace peerscout {

enum class ExtractorKind { llm, gazetteer, replay };

std::string_view to_string(ExtractorKind kind);
std::optional<ExtractorKind> extractor_kind_from_string(std::string_view name);

// 4096 for the base chat model, 16384 for "16k" variants.
std::size_t default_token_limit(std::string_view model_name);

struct ExtractorConfig {
    ExtractorKind kind = ExtractorKind::gazetteer;

    // llm only.
    std::string endpoint_url;
    std::string model_name;
    std::optional<double> temperature;  // service default when unset
    std::size_t max_output_tokens = 256;
    std::string credential_env;  // name of the env var holding the key
    std::size_t token_limit = 0;  // 0: derived from model_name
    int retries = 3;
    int timeout_seconds = 60;
    std::chrono::milliseconds min_interval{0};

    // llm and replay: response store root; llm writes through it, replay
    // reads it only.
    std::filesystem::path response_dir;

    // Few-shot examples for llm/replay prompts; gazetteer dictionary source.
    std::vector<AnnotatedDocument> train_examples;

    std::string extractor_id() const;
    // Empty string when valid, else a description of the problem.
    std::string validate() const;
};

enum class ExtractionStatus { ok, empty, parse_failed, service_failed };

std::string_view to_string(ExtractionStatus status);
std::optional<ExtractionStatus> extraction_status_from_string(std::string_view name);

struct ExtractionResult {
    std::int64_t page_id = 0;
    std::string name;  // carried through for reports; may be empty
    ProductSet predicted;
    std::string extractor_id;
    std::optional<RawModelOutput> raw;
    ExtractionStatus status = ExtractionStatus::ok;
    std::string message;  // failure detail
};

// Single-document extraction. Never throws for per-document service or
// parse problems; those come back in the status.
ExtractionResult extract(const ExtractorConfig& config, const CompanyRecord& target);

// Ordered, bounded-concurrency batch. cache_dir overrides
// config.response_dir when non-empty; cache hits make no service call.
std::vector<ExtractionResult> extract_batch(const ExtractorConfig& config,
                                            std::span<const CompanyRecord> universe,
                                            int parallelism,
                                            const std::filesystem::path& cache_dir = {});

// Results file: one JSON object per line, '#' header lines skipped on load.
std::string result_line(const ExtractionResult& result);
void save_results(const std::filesystem::path& path,
                  std::span<const ExtractionResult> results,
                  std::span<const std::string> header_lines = {});
std::vector<ExtractionResult> load_results(const std::filesystem::path& path);

// Path of the cached/recorded response body for a rendered prompt.
std::filesystem::path response_path(const std::filesystem::path& root,
                                    std::string_view model_name,
                                    std::string_view prompt);

// Pulls choices[0].message.content out of a chat-completion response body.
std::optional<std::string> chat_completion_content(const std::string& body);

}  // namespace peerscout
