#include "peerscout/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "peerscout/rand.hpp"

namespace peerscout {

using ordered_json = nlohmann::ordered_json;

std::optional<std::string> canonical_product(std::string_view raw) {
    std::string item = ascii_lower(normalize_text(raw).str());
    if (item.empty()) return std::nullopt;
    return item;
}

ProductSet ProductSet::from_strings(std::span<const std::string> raw) {
    ProductSet set;
    for (const auto& s : raw) set.insert(s);
    return set;
}

ProductSet ProductSet::from_strings(std::initializer_list<std::string_view> raw) {
    ProductSet set;
    for (auto s : raw) set.insert(s);
    return set;
}

void ProductSet::insert(std::string_view raw) {
    if (auto item = canonical_product(raw)) items_.insert(std::move(*item));
}

namespace {

AnnotatedDocument parse_record(const ordered_json& obj) {
    AnnotatedDocument doc;
    doc.company.name = obj.at("name").get<std::string>();
    doc.company.page_id = obj.at("page_id").get<std::int64_t>();
    if (doc.company.page_id <= 0) throw CorpusError("page_id must be positive");
    doc.company.summary = normalize_text(obj.at("summary").get<std::string>());
    doc.company.word_count = word_count(doc.company.summary);
    if (auto it = obj.find("products"); it != obj.end() && !it->is_null()) {
        for (const auto& item : *it) {
            doc.gold.insert(item.get<std::string>());
        }
    }
    return doc;
}

}  // namespace

std::vector<AnnotatedDocument> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file: " + path.string());

    std::vector<AnnotatedDocument> docs;
    std::unordered_set<std::int64_t> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        ordered_json obj = ordered_json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw CorpusError("malformed record at " + path.string() + ":" +
                              std::to_string(line_no));
        }
        try {
            docs.push_back(parse_record(obj));
        } catch (const ordered_json::exception& e) {
            throw CorpusError("malformed record at " + path.string() + ":" +
                              std::to_string(line_no) + ": " + e.what());
        }
        if (!seen_ids.insert(docs.back().company.page_id).second) {
            throw CorpusError("duplicate page_id " +
                              std::to_string(docs.back().company.page_id) + " at " +
                              path.string() + ":" + std::to_string(line_no));
        }
    }
    return docs;
}

std::string corpus_line(const AnnotatedDocument& doc) {
    ordered_json obj;
    obj["name"] = doc.company.name;
    obj["page_id"] = doc.company.page_id;
    obj["summary"] = doc.company.summary.str();
    if (!doc.gold.empty()) {
        obj["products"] = ordered_json::array();
        for (const auto& item : doc.gold) obj["products"].push_back(item);
    }
    return obj.dump();
}

void save_corpus(const std::filesystem::path& path,
                 std::span<const AnnotatedDocument> docs,
                 std::span<const std::string> header_lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write corpus file: " + path.string());
    for (const auto& header : header_lines) out << header << '\n';
    for (const auto& doc : docs) out << corpus_line(doc) << '\n';
}

std::vector<std::string> validate_annotation(const AnnotatedDocument& doc) {
    std::vector<std::string> warnings;
    if (doc.gold.empty()) {
        warnings.push_back("page " + std::to_string(doc.company.page_id) +
                           ": empty gold set");
        return warnings;
    }
    const std::string haystack = ascii_lower(doc.company.summary.str());
    for (const auto& item : doc.gold) {
        if (haystack.find(item) == std::string::npos) {
            warnings.push_back("page " + std::to_string(doc.company.page_id) +
                               ": gold item '" + item + "' not found in summary");
        }
    }
    return warnings;
}

CorpusSplit split_train_test(std::span<const AnnotatedDocument> corpus,
                             std::size_t n_shot, std::uint64_t seed) {
    if (n_shot >= corpus.size()) {
        throw std::out_of_range("n_shot " + std::to_string(n_shot) +
                                " out of range for corpus of size " +
                                std::to_string(corpus.size()));
    }

    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    // Fisher-Yates with explicit rejection sampling; mt19937_64 is fully
    // specified by the standard so splits are identical everywhere.
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i + 1));
        std::swap(order[i], order[j]);
    }

    CorpusSplit split;
    split.seed = seed;
    split.train.reserve(n_shot);
    split.test.reserve(corpus.size() - n_shot);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_shot ? split.train : split.test).push_back(corpus[order[i]]);
    }
    return split;
}

}  // namespace peerscout
