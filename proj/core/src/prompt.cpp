#include "peerscout/prompt.hpp"

#include <cctype>

#include "prompt_template_v1.inc"

namespace peerscout {
namespace {

std::string escape_item(const std::string& item) {
    std::string out;
    out.reserve(item.size());
    for (char c : item) {
        if (c == '\\' || c == '\'') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

bool iequal_at(std::string_view text, std::size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
            std::tolower(static_cast<unsigned char>(word[i]))) {
            return false;
        }
    }
    return true;
}

void skip_ws(std::string_view text, std::size_t& pos) {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos]))) {
        ++pos;
    }
}

// Parses a quoted string starting at the opening quote. Returns nullopt on
// an unterminated string.
std::optional<std::string> parse_quoted(std::string_view text, std::size_t& pos) {
    const char quote = text[pos];
    ++pos;
    std::string value;
    while (pos < text.size()) {
        const char c = text[pos];
        if (c == '\\' && pos + 1 < text.size()) {
            const char next = text[pos + 1];
            if (next == '\\' || next == '\'' || next == '"') {
                value.push_back(next);
            } else {
                value.push_back('\\');
                value.push_back(next);
            }
            pos += 2;
            continue;
        }
        if (c == quote) {
            ++pos;
            return value;
        }
        value.push_back(c);
        ++pos;
    }
    return std::nullopt;
}

bool is_none_token(std::string_view atom) {
    return atom.size() == 4 &&
           (iequal_at(atom, 0, "none") || iequal_at(atom, 0, "null"));
}

// Parses the bracketed item list starting just after '['. Quoted strings
// and bare atoms are both accepted; None/null atoms are skipped.
std::optional<ProductSet> parse_list(std::string_view text, std::size_t& pos) {
    ProductSet items;
    for (;;) {
        skip_ws(text, pos);
        if (pos >= text.size()) return std::nullopt;
        if (text[pos] == ']') {
            ++pos;
            return items;
        }
        if (text[pos] == '\'' || text[pos] == '"') {
            auto value = parse_quoted(text, pos);
            if (!value) return std::nullopt;
            items.insert(*value);
        } else {
            std::size_t start = pos;
            while (pos < text.size() && text[pos] != ',' && text[pos] != ']') ++pos;
            if (pos >= text.size()) return std::nullopt;
            std::string_view atom = text.substr(start, pos - start);
            while (!atom.empty() && std::isspace(static_cast<unsigned char>(atom.back()))) {
                atom.remove_suffix(1);
            }
            if (!atom.empty() && !is_none_token(atom)) items.insert(atom);
        }
        skip_ws(text, pos);
        if (pos >= text.size()) return std::nullopt;
        if (text[pos] == ',') {
            ++pos;
        } else if (text[pos] != ']') {
            return std::nullopt;
        }
    }
}

}  // namespace

std::string format_output_value(const ProductSet& products) {
    std::string out = "{{'PRODUCT': [";
    bool first = true;
    for (const auto& item : products) {
        if (!first) out += ", ";
        first = false;
        out += '\'';
        out += escape_item(item);
        out += '\'';
    }
    out += "]}}";
    return out;
}

std::string render_prompt(std::span<const AnnotatedDocument> train,
                          const NormalizedText& target) {
    std::string prompt(kPromptPreambleV1);
    std::size_t number = 1;
    for (const auto& doc : train) {
        prompt += '\n';
        prompt += std::to_string(number++);
        prompt += kSentencePrefixV1;
        prompt += doc.company.summary.str();
        prompt += '\n';
        prompt += kOutputPrefixV1;
        prompt += format_output_value(doc.gold);
        prompt += '\n';
    }
    prompt += '\n';
    prompt += std::to_string(number);
    prompt += kSentencePrefixV1;
    prompt += target.str();
    prompt += '\n';
    prompt += kOutputPrefixV1;
    prompt += kEmptyOutputV1;
    return prompt;
}

std::optional<ProductSet> parse_output(std::string_view raw) {
    static constexpr std::string_view kKey = "PRODUCT";
    for (std::size_t pos = 0; pos + kKey.size() <= raw.size(); ++pos) {
        if (!iequal_at(raw, pos, kKey)) continue;
        std::size_t cursor = pos + kKey.size();
        if (cursor < raw.size() && (raw[cursor] == '\'' || raw[cursor] == '"')) ++cursor;
        skip_ws(raw, cursor);
        if (cursor >= raw.size() || raw[cursor] != ':') continue;
        ++cursor;
        skip_ws(raw, cursor);
        if (cursor >= raw.size()) continue;
        if (iequal_at(raw, cursor, "none") || iequal_at(raw, cursor, "null")) {
            const std::size_t after = cursor + 4;
            if (after >= raw.size() ||
                !std::isalnum(static_cast<unsigned char>(raw[after]))) {
                return ProductSet{};
            }
        }
        if (raw[cursor] == '[') {
            ++cursor;
            return parse_list(raw, cursor);
        }
        // Key without a recognizable value; keep scanning.
    }
    return std::nullopt;
}

std::optional<ProductSet> parse_output(const RawModelOutput& raw) {
    return parse_output(std::string_view(raw.text));
}

std::size_t estimate_tokens(std::string_view text) {
    return (whitespace_word_count(text) * 4 + 2) / 3;
}

}  // namespace peerscout
