#include "peerscout/wiki.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "peerscout/http.hpp"

namespace peerscout {

using nlohmann::json;

std::string today_iso_date() {
    std::time_t now = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return buf;
}

IngestEntry IngestEntry::parse(std::string_view line) {
    IngestEntry entry;
    bool numeric = !line.empty();
    for (char c : line) {
        if (c < '0' || c > '9') {
            numeric = false;
            break;
        }
    }
    if (numeric) {
        entry.page_id = std::stoll(std::string(line));
    } else {
        entry.name = std::string(line);
    }
    return entry;
}

std::vector<IngestEntry> load_ingest_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw WikiError("cannot open ingest list: " + path.string());
    std::vector<IngestEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        entries.push_back(IngestEntry::parse(line));
    }
    return entries;
}

WikiClient::WikiClient(WikiConfig config)
    : config_(std::move(config)), next_request_(std::chrono::steady_clock::now()) {}

std::filesystem::path WikiClient::cache_path(std::int64_t page_id) const {
    return config_.cache_dir / "pages" / (std::to_string(page_id) + ".txt");
}

std::optional<WikiCacheEntry> WikiClient::load_cached(std::int64_t page_id) const {
    if (config_.cache_dir.empty()) return std::nullopt;
    std::ifstream in(cache_path(page_id), std::ios::binary);
    if (!in) return std::nullopt;

    std::string header;
    if (!std::getline(in, header)) return std::nullopt;
    json meta = json::parse(header, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) return std::nullopt;

    WikiCacheEntry entry;
    entry.page_ref.page_id = meta.value("page_id", std::int64_t{0});
    entry.page_ref.title = meta.value("title", "");
    entry.page_ref.retrieved_on = meta.value("retrieved_on", "");
    std::ostringstream body;
    body << in.rdbuf();
    entry.raw_summary = body.str();
    entry.normalized_summary = normalize_text(entry.raw_summary);
    if (entry.page_ref.page_id != page_id) return std::nullopt;
    return entry;
}

void WikiClient::store_cache(const WikiCacheEntry& entry) const {
    if (config_.cache_dir.empty()) return;
    const auto path = cache_path(entry.page_ref.page_id);
    std::filesystem::create_directories(path.parent_path());

    json meta;
    meta["page_id"] = entry.page_ref.page_id;
    meta["title"] = entry.page_ref.title;
    meta["retrieved_on"] = entry.page_ref.retrieved_on;

    // Atomic replacement keeps concurrent writers safe.
    const auto tmp = path.string() + "." + std::to_string(::getpid()) + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw WikiError("cannot write cache file: " + tmp);
        out << meta.dump() << '\n' << entry.raw_summary;
    }
    std::filesystem::rename(tmp, path);
}

void WikiClient::rate_limit() const {
    std::chrono::steady_clock::time_point start;
    {
        std::lock_guard lock(limiter_mutex_);
        const auto now = std::chrono::steady_clock::now();
        start = std::max(now, next_request_);
        next_request_ = start + config_.min_interval;
    }
    std::this_thread::sleep_until(start);
}

std::string WikiClient::api_get(const std::string& query) const {
    const std::string url = config_.api_base + "?" + query;
    const std::map<std::string, std::string> headers = {
        {"User-Agent", config_.user_agent}};

    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        rate_limit();
        const auto response = http_get(url, headers, config_.timeout_seconds);
        if (!response) continue;
        if (response->status == 429 || response->status >= 500) continue;
        if (response->status != 200) {
            throw WikiError("api request failed with HTTP " +
                            std::to_string(response->status));
        }
        return response->body;
    }
    throw WikiError("api request failed after " + std::to_string(config_.retries + 1) +
                    " attempts: " + url);
}

PageRef WikiClient::resolve_page_id(const std::string& company_name) const {
    if (company_name.empty()) throw WikiError("empty company name");

    const std::string body = api_get(
        "action=query&list=search&format=json&srlimit=5&srsearch=" +
        url_encode(company_name));
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("query") ||
        !parsed["query"].contains("search")) {
        throw WikiError("unexpected search response for '" + company_name + "'");
    }
    const auto& results = parsed["query"]["search"];
    if (!results.is_array() || results.empty()) {
        throw WikiError("no match for '" + company_name + "'");
    }

    // The endpoint returns relevance order but no scores. An exact
    // (case-insensitive, normalized) title match outranks position; two
    // exact matches are indistinguishable and reported as ambiguous.
    const std::string wanted = ascii_lower(normalize_text(company_name).str());
    std::vector<const json*> exact;
    for (const auto& result : results) {
        const auto title = result.value("title", "");
        if (ascii_lower(normalize_text(title).str()) == wanted) {
            exact.push_back(&result);
        }
    }
    if (exact.size() > 1) {
        throw WikiError("ambiguous match for '" + company_name + "': " +
                        std::to_string(exact.size()) + " equally ranked results");
    }

    const json& best = exact.size() == 1 ? *exact.front() : results.front();
    PageRef ref;
    ref.page_id = best.value("pageid", std::int64_t{0});
    ref.title = best.value("title", "");
    ref.retrieved_on = today_iso_date();
    if (ref.page_id <= 0) {
        throw WikiError("search result without page id for '" + company_name + "'");
    }
    return ref;
}

WikiCacheEntry WikiClient::fetch_summary(std::int64_t page_id) const {
    if (page_id <= 0) throw WikiError("page id must be positive");
    if (auto cached = load_cached(page_id)) return *cached;

    const std::string body = api_get(
        "action=query&prop=extracts&exintro=1&explaintext=1&format=json&pageids=" +
        std::to_string(page_id));
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("query") ||
        !parsed["query"].contains("pages")) {
        throw WikiError("unexpected extract response for page " + std::to_string(page_id));
    }
    const auto& pages = parsed["query"]["pages"];
    const auto it = pages.find(std::to_string(page_id));
    if (it == pages.end() || it->contains("missing")) {
        throw WikiError("unknown page id " + std::to_string(page_id));
    }
    if (!it->contains("extract") || it->at("extract").get<std::string>().empty()) {
        throw WikiError("page " + std::to_string(page_id) + " has no summary extract");
    }

    WikiCacheEntry entry;
    entry.page_ref.page_id = page_id;
    entry.page_ref.title = it->value("title", "");
    entry.page_ref.retrieved_on = today_iso_date();
    entry.raw_summary = it->at("extract").get<std::string>();
    entry.normalized_summary = normalize_text(entry.raw_summary);
    store_cache(entry);
    return entry;
}

std::pair<std::vector<CompanyRecord>, IngestReport> WikiClient::ingest_universe(
    std::span<const IngestEntry> entries, int parallelism) const {
    if (parallelism < 1) parallelism = 1;

    std::vector<std::optional<CompanyRecord>> slots(entries.size());
    std::vector<std::optional<IngestFailure>> failures(entries.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= entries.size()) return;
            const auto& entry = entries[i];
            const std::string label =
                entry.page_id > 0 ? std::to_string(entry.page_id) : entry.name;
            try {
                std::int64_t page_id = entry.page_id;
                std::string name = entry.name;
                if (page_id <= 0) {
                    const auto ref = resolve_page_id(entry.name);
                    page_id = ref.page_id;
                    name = ref.title;
                }
                const auto cache_entry = fetch_summary(page_id);
                if (!cache_entry.page_ref.title.empty()) name = cache_entry.page_ref.title;
                CompanyRecord record;
                record.name = name;
                record.page_id = page_id;
                record.summary = cache_entry.normalized_summary;
                record.word_count = word_count(record.summary);
                slots[i] = std::move(record);
            } catch (const std::exception& e) {
                failures[i] = IngestFailure{label, e.what()};
            }
        }
    };

    std::vector<std::thread> threads;
    const auto thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), entries.size());
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();

    std::vector<CompanyRecord> records;
    IngestReport report;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (slots[i]) records.push_back(std::move(*slots[i]));
        if (failures[i]) report.failures.push_back(std::move(*failures[i]));
    }
    return {std::move(records), std::move(report)};
}

}  // namespace peerscout
