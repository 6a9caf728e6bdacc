#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace peerscout {

// Text restricted to the 95 printable ASCII characters, with whitespace
// runs collapsed to single spaces and no leading/trailing whitespace.
class NormalizedText {
public:
    NormalizedText() = default;

    // Total: accepts any byte sequence (UTF-8 decoded tolerantly).
    static NormalizedText normalize(std::string_view raw);

    // Validates an already-normalized string; nullopt if it is not canonical.
    static std::optional<NormalizedText> from_normalized(std::string value);

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend bool operator==(const NormalizedText&, const NormalizedText&) = default;
    friend auto operator<=>(const NormalizedText&, const NormalizedText&) = default;

private:
    explicit NormalizedText(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

NormalizedText normalize_text(std::string_view raw);

// Count of maximal non-space substrings.
std::size_t word_count(const NormalizedText& text);

// Whitespace-split word count of arbitrary text (newlines included as
// separators). Used for prompt size estimates.
std::size_t whitespace_word_count(std::string_view text);

bool is_printable_ascii(char c) noexcept;
bool is_normalized(std::string_view value) noexcept;

std::string ascii_lower(std::string_view s);

// Fixed transliteration for Latin-1 Supplement and Latin Extended-A
// letters; nullptr for code points outside the table.
const char* transliterate_latin(char32_t cp) noexcept;

}  // namespace peerscout
