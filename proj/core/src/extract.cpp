#include "peerscout/extract.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "peerscout/digest.hpp"
#include "peerscout/http.hpp"

namespace peerscout {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ExtractorKind kind) {
    switch (kind) {
        case ExtractorKind::llm: return "llm";
        case ExtractorKind::gazetteer: return "gazetteer";
        case ExtractorKind::replay: return "replay";
    }
    return "unknown";
}

std::optional<ExtractorKind> extractor_kind_from_string(std::string_view name) {
    if (name == "llm") return ExtractorKind::llm;
    if (name == "gazetteer") return ExtractorKind::gazetteer;
    if (name == "replay") return ExtractorKind::replay;
    return std::nullopt;
}

std::string_view to_string(ExtractionStatus status) {
    switch (status) {
        case ExtractionStatus::ok: return "ok";
        case ExtractionStatus::empty: return "empty";
        case ExtractionStatus::parse_failed: return "parse_failed";
        case ExtractionStatus::service_failed: return "service_failed";
    }
    return "unknown";
}

std::optional<ExtractionStatus> extraction_status_from_string(std::string_view name) {
    if (name == "ok") return ExtractionStatus::ok;
    if (name == "empty") return ExtractionStatus::empty;
    if (name == "parse_failed") return ExtractionStatus::parse_failed;
    if (name == "service_failed") return ExtractionStatus::service_failed;
    return std::nullopt;
}

std::size_t default_token_limit(std::string_view model_name) {
    return model_name.find("16k") != std::string_view::npos ? 16384 : 4096;
}

std::string ExtractorConfig::extractor_id() const {
    if (kind == ExtractorKind::gazetteer) return "gazetteer";
    return std::string(to_string(kind)) + ":" + model_name;
}

std::string ExtractorConfig::validate() const {
    if (kind == ExtractorKind::llm) {
        if (endpoint_url.empty()) return "llm extractor requires an endpoint url";
        if (model_name.empty()) return "llm extractor requires a model name";
        if (credential_env.empty()) return "llm extractor requires a credential env var name";
        const char* key = std::getenv(credential_env.c_str());
        if (!key || !*key) {
            return "credential env var " + credential_env + " is not set";
        }
    }
    if (kind == ExtractorKind::replay) {
        if (model_name.empty()) return "replay extractor requires a model name";
        if (response_dir.empty()) return "replay extractor requires a response directory";
    }
    return {};
}

std::filesystem::path response_path(const std::filesystem::path& root,
                                    std::string_view model_name,
                                    std::string_view prompt) {
    return root / std::string(model_name) / (sha256_hex(prompt) + ".json");
}

std::optional<std::string> chat_completion_content(const std::string& body) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty()) {
        return std::nullopt;
    }
    const auto& message = parsed["choices"][0];
    if (!message.contains("message") || !message["message"].contains("content")) {
        return std::nullopt;
    }
    return message["message"]["content"].get<std::string>();
}

namespace {

std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& body) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + "." + std::to_string(::getpid()) + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << body;
    }
    std::filesystem::rename(tmp, path);
}

// Word-boundary test over normalized text: neighbours must be absent or
// non-alphanumeric.
bool boundary_at(const std::string& text, std::size_t pos, std::size_t len) {
    auto alnum = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    };
    if (pos > 0 && alnum(text[pos - 1])) return false;
    if (pos + len < text.size() && alnum(text[pos + len])) return false;
    return true;
}

// Dictionary scan: index terms by first word, then try every candidate at
// every word start. Finds all occurring terms, overlapping or not.
ProductSet gazetteer_scan(const ProductSet& dictionary, const NormalizedText& summary) {
    const std::string text = ascii_lower(summary.str());

    std::unordered_map<std::string, std::vector<const std::string*>> by_first_word;
    for (const auto& term : dictionary) {
        const auto space = term.find(' ');
        by_first_word[term.substr(0, space)].push_back(&term);
    }

    ProductSet predicted;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] == ' ') {
            ++pos;
            continue;
        }
        const std::size_t word_end = std::min(text.find(' ', pos), text.size());
        // Candidate keys anchored at this word, shrinking from the full
        // word so punctuation-adjacent terms ("gas," vs "gas") still hit.
        for (std::size_t end = word_end; end > pos; --end) {
            const auto it = by_first_word.find(text.substr(pos, end - pos));
            if (it == by_first_word.end()) continue;
            for (const std::string* term : it->second) {
                if (pos + term->size() > text.size()) continue;
                if (text.compare(pos, term->size(), *term) != 0) continue;
                if (boundary_at(text, pos, term->size())) predicted.insert(*term);
            }
        }
        pos = word_end;
    }
    return predicted;
}

ExtractionResult make_failure(const CompanyRecord& target, const ExtractorConfig& config,
                              ExtractionStatus status, std::string message) {
    ExtractionResult result;
    result.page_id = target.page_id;
    result.name = target.name;
    result.extractor_id = config.extractor_id();
    result.status = status;
    result.message = std::move(message);
    return result;
}

std::string build_request_body(const ExtractorConfig& config, const std::string& prompt) {
    ordered_json body;
    body["model"] = config.model_name;
    body["messages"] = ordered_json::array();
    body["messages"].push_back({{"role", "system"}, {"content", ""}});
    body["messages"].push_back({{"role", "user"}, {"content", prompt}});
    if (config.temperature) body["temperature"] = *config.temperature;
    body["max_tokens"] = config.max_output_tokens;
    return body.dump();
}

std::optional<std::string> post_completion(const ExtractorConfig& config,
                                           const std::string& prompt,
                                           std::string& error) {
    const char* key = std::getenv(config.credential_env.c_str());
    if (!key || !*key) {
        error = "credential env var " + config.credential_env + " is not set";
        return std::nullopt;
    }
    const std::map<std::string, std::string> headers = {
        {"Authorization", std::string("Bearer ") + key}};
    const std::string request = build_request_body(config, prompt);

    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        const auto response =
            http_post_json(config.endpoint_url, headers, request, config.timeout_seconds);
        if (!response) {
            error = "connection failed: " + config.endpoint_url;
            continue;
        }
        if (response->status == 429 || response->status >= 500) {
            error = "service returned HTTP " + std::to_string(response->status);
            continue;
        }
        if (response->status != 200) {
            error = "service returned HTTP " + std::to_string(response->status);
            return std::nullopt;
        }
        return response->body;
    }
    return std::nullopt;
}

ExtractionResult extract_with_responses(const ExtractorConfig& config,
                                        const CompanyRecord& target) {
    const std::string prompt = render_prompt(config.train_examples, target.summary);

    const std::size_t limit =
        config.token_limit ? config.token_limit : default_token_limit(config.model_name);
    const std::size_t estimated = estimate_tokens(prompt);
    if (estimated + config.max_output_tokens > limit) {
        return make_failure(target, config, ExtractionStatus::service_failed,
                            "estimated prompt size " + std::to_string(estimated) +
                                " tokens exceeds model limit " + std::to_string(limit));
    }

    std::optional<std::string> body;
    const auto stored = config.response_dir.empty()
                            ? std::filesystem::path{}
                            : response_path(config.response_dir, config.model_name, prompt);
    if (!stored.empty()) body = read_file(stored);

    if (!body) {
        if (config.kind == ExtractorKind::replay) {
            return make_failure(target, config, ExtractionStatus::service_failed,
                                "no recorded response for prompt digest " +
                                    sha256_hex(prompt));
        }
        std::string error = "service request failed";
        body = post_completion(config, prompt, error);
        if (!body) {
            return make_failure(target, config, ExtractionStatus::service_failed, error);
        }
        if (!stored.empty()) write_file_atomic(stored, *body);
    }

    const auto content = chat_completion_content(*body);
    if (!content) {
        return make_failure(target, config, ExtractionStatus::service_failed,
                            "malformed chat-completion response body");
    }

    ExtractionResult result;
    result.page_id = target.page_id;
    result.name = target.name;
    result.extractor_id = config.extractor_id();
    result.raw = RawModelOutput{*content};
    const auto parsed = parse_output(*content);
    if (!parsed) {
        result.status = ExtractionStatus::parse_failed;
        result.message = "no recognizable PRODUCT construct in response";
        return result;
    }
    result.predicted = *parsed;
    result.status =
        result.predicted.empty() ? ExtractionStatus::empty : ExtractionStatus::ok;
    return result;
}

}  // namespace

ExtractionResult extract(const ExtractorConfig& config, const CompanyRecord& target) {
    if (const auto problem = config.validate(); !problem.empty()) {
        return make_failure(target, config, ExtractionStatus::service_failed, problem);
    }

    if (config.kind == ExtractorKind::gazetteer) {
        ProductSet dictionary;
        for (const auto& doc : config.train_examples) {
            for (const auto& item : doc.gold) dictionary.insert(item);
        }
        ExtractionResult result;
        result.page_id = target.page_id;
        result.name = target.name;
        result.extractor_id = config.extractor_id();
        result.predicted = gazetteer_scan(dictionary, target.summary);
        result.status = ExtractionStatus::ok;
        return result;
    }
    return extract_with_responses(config, target);
}

std::vector<ExtractionResult> extract_batch(const ExtractorConfig& config,
                                            std::span<const CompanyRecord> universe,
                                            int parallelism,
                                            const std::filesystem::path& cache_dir) {
    ExtractorConfig effective = config;
    if (!cache_dir.empty()) effective.response_dir = cache_dir;
    if (parallelism < 1) parallelism = 1;

    std::vector<ExtractionResult> results(universe.size());
    std::atomic<std::size_t> next{0};

    std::mutex limiter_mutex;
    auto next_request = std::chrono::steady_clock::now();
    auto rate_limit = [&] {
        if (effective.min_interval.count() == 0) return;
        std::chrono::steady_clock::time_point start;
        {
            std::lock_guard lock(limiter_mutex);
            start = std::max(std::chrono::steady_clock::now(), next_request);
            next_request = start + effective.min_interval;
        }
        std::this_thread::sleep_until(start);
    };

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= universe.size()) return;
            if (effective.kind == ExtractorKind::llm) rate_limit();
            results[i] = extract(effective, universe[i]);
        }
    };

    std::vector<std::thread> threads;
    const auto thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), universe.size());
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
    return results;
}

std::string result_line(const ExtractionResult& result) {
    ordered_json obj;
    obj["page_id"] = result.page_id;
    if (!result.name.empty()) obj["name"] = result.name;
    obj["extractor_id"] = result.extractor_id;
    obj["status"] = std::string(to_string(result.status));
    obj["predicted"] = ordered_json::array();
    for (const auto& item : result.predicted) obj["predicted"].push_back(item);
    if (result.raw) obj["raw"] = result.raw->text;
    if (!result.message.empty()) obj["message"] = result.message;
    return obj.dump();
}

void save_results(const std::filesystem::path& path,
                  std::span<const ExtractionResult> results,
                  std::span<const std::string> header_lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write results file: " + path.string());
    for (const auto& header : header_lines) out << header << '\n';
    for (const auto& result : results) out << result_line(result) << '\n';
}

std::vector<ExtractionResult> load_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path.string());
    std::vector<ExtractionResult> results;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw std::runtime_error("malformed result at " + path.string() + ":" +
                                     std::to_string(line_no));
        }
        ExtractionResult result;
        result.page_id = obj.value("page_id", std::int64_t{0});
        result.name = obj.value("name", "");
        result.extractor_id = obj.value("extractor_id", "");
        const auto status = extraction_status_from_string(obj.value("status", ""));
        if (!status || result.page_id <= 0) {
            throw std::runtime_error("malformed result at " + path.string() + ":" +
                                     std::to_string(line_no));
        }
        result.status = *status;
        if (obj.contains("predicted")) {
            for (const auto& item : obj["predicted"]) {
                result.predicted.insert(item.get<std::string>());
            }
        }
        if (obj.contains("raw")) result.raw = RawModelOutput{obj["raw"].get<std::string>()};
        result.message = obj.value("message", "");
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace peerscout
