#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "peerscout/text.hpp"

namespace peerscout {

// Canonical form of a product/service string: normalized, lowercased,
// trimmed. Empty after canonicalization means "not an item".
std::optional<std::string> canonical_product(std::string_view raw);

// Deduplicated set of canonical product/service strings. Iteration order
// is lexicographic, which is also the serialization order.
class ProductSet {
public:
    ProductSet() = default;

    static ProductSet from_strings(std::span<const std::string> raw);
    static ProductSet from_strings(std::initializer_list<std::string_view> raw);

    // Inserts the canonical form; empty-after-canonicalization is dropped.
    void insert(std::string_view raw);

    bool contains(const std::string& canonical_item) const {
        return items_.count(canonical_item) != 0;
    }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t size() const noexcept { return items_.size(); }

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    const std::set<std::string>& items() const noexcept { return items_; }

    friend bool operator==(const ProductSet&, const ProductSet&) = default;

private:
    std::set<std::string> items_;
};

struct CompanyRecord {
    std::string name;
    std::int64_t page_id = 0;
    NormalizedText summary;
    std::size_t word_count = 0;

    friend bool operator==(const CompanyRecord&, const CompanyRecord&) = default;
};

struct AnnotatedDocument {
    CompanyRecord company;
    ProductSet gold;

    friend bool operator==(const AnnotatedDocument&, const AnnotatedDocument&) = default;
};

struct CorpusSplit {
    std::vector<AnnotatedDocument> train;
    std::vector<AnnotatedDocument> test;
    std::uint64_t seed = 0;
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One record per line; lines starting with '#' are skipped. Summaries are
// normalized on load and word counts recomputed. Throws CorpusError on
// malformed records (with line number) and duplicate page ids.
std::vector<AnnotatedDocument> load_corpus(const std::filesystem::path& path);

// Canonical single-line serialization: fixed key order, products sorted
// lexicographically and omitted when empty.
std::string corpus_line(const AnnotatedDocument& doc);

// Writes records in canonical form; header lines (e.g. a manifest) are
// emitted verbatim before the records.
void save_corpus(const std::filesystem::path& path,
                 std::span<const AnnotatedDocument> docs,
                 std::span<const std::string> header_lines = {});

// One warning per gold item that is not a case-insensitive substring of
// the summary, plus one for an empty gold set. Never fails.
std::vector<std::string> validate_annotation(const AnnotatedDocument& doc);

// Seeded deterministic split: train gets the first n_shot entries of a
// Fisher-Yates permutation of the corpus. Throws std::out_of_range unless
// 0 <= n_shot < corpus size.
CorpusSplit split_train_test(std::span<const AnnotatedDocument> corpus,
                             std::size_t n_shot, std::uint64_t seed);

}  // namespace peerscout
