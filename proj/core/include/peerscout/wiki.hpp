#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peerscout/corpus.hpp"

namespace peerscout {

struct PageRef {
    std::int64_t page_id = 0;
    std::string title;
    std::string retrieved_on;  // ISO-8601 date

    friend bool operator==(const PageRef&, const PageRef&) = default;
};

struct WikiCacheEntry {
    PageRef page_ref;
    std::string raw_summary;
    NormalizedText normalized_summary;

    friend bool operator==(const WikiCacheEntry&, const WikiCacheEntry&) = default;
};

class WikiError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WikiConfig {
    std::string api_base = "https://en.wikipedia.org/w/api.php";
    std::filesystem::path cache_dir;
    std::chrono::milliseconds min_interval{1000};
    int retries = 3;
    int timeout_seconds = 30;
    std::string user_agent = "peerscout/0.1 (company summary research tool)";
};

struct IngestFailure {
    std::string input;
    std::string message;
};

struct IngestReport {
    std::vector<IngestFailure> failures;
};

// Either a page id (numeric line) or a company name to resolve first.
struct IngestEntry {
    std::string name;
    std::int64_t page_id = 0;  // 0 means unresolved

    static IngestEntry parse(std::string_view line);
};

std::vector<IngestEntry> load_ingest_list(const std::filesystem::path& path);

// Summary client over the MediaWiki action API with a one-file-per-page
// on-disk cache. Cache hits never touch the network; normalization is
// applied on read so cached raw text survives table changes.
class WikiClient {
public:
    explicit WikiClient(WikiConfig config);

    // Best search match for a company name. Throws WikiError on no match,
    // on multiple equally-ranked exact-title matches, and on network or
    // service failure.
    PageRef resolve_page_id(const std::string& company_name) const;

    // Cached lead-section extract for a page id; fetches and persists on
    // a cache miss. Throws WikiError on unknown ids, extract-less pages,
    // and network failure.
    WikiCacheEntry fetch_summary(std::int64_t page_id) const;

    // Bounded-concurrency fetch of a whole list; per-entry failures go to
    // the report instead of aborting the batch. Successes keep input order.
    std::pair<std::vector<CompanyRecord>, IngestReport> ingest_universe(
        std::span<const IngestEntry> entries, int parallelism) const;

    std::filesystem::path cache_path(std::int64_t page_id) const;

private:
    std::optional<WikiCacheEntry> load_cached(std::int64_t page_id) const;
    void store_cache(const WikiCacheEntry& entry) const;
    std::string api_get(const std::string& query) const;
    void rate_limit() const;

    WikiConfig config_;
    mutable std::mutex limiter_mutex_;
    mutable std::chrono::steady_clock::time_point next_request_;
};

// Current UTC date as YYYY-MM-DD; honors SOURCE_DATE_EPOCH for
// reproducible runs.
std::string today_iso_date();

}  // namespace peerscout
