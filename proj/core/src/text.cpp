#include "peerscout/text.hpp"

#include <array>
#include <cctype>

namespace peerscout {
namespace {

// Unicode whitespace code points that become a single space. Everything
// else outside the table and outside printable ASCII is dropped.
bool is_space_codepoint(char32_t cp) noexcept {
    switch (cp) {
        case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
        case 0x20:
        case 0x85:    // NEL
        case 0xA0:    // NBSP
        case 0x1680:
        case 0x2028: case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 sequence starting at i; advances i past it. Invalid
// bytes yield 0xFFFD and advance by one so arbitrary input terminates.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1Fu; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0Fu; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07u; }
    else { ++i; return 0xFFFD; }

    if (i + len > s.size()) { ++i; return 0xFFFD; }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) { ++i; return 0xFFFD; }
        cp = (cp << 6) | (b & 0x3Fu);
    }
    // Reject overlong encodings and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
        cp > 0x10FFFF) {
        ++i;
        return 0xFFFD;
    }
    i += len;
    return cp;
}

}  // namespace

bool is_printable_ascii(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x20 && u <= 0x7E;
}

bool is_normalized(std::string_view value) noexcept {
    char prev = '\0';
    for (char c : value) {
        if (!is_printable_ascii(c)) return false;
        if (c == ' ' && prev == ' ') return false;
        prev = c;
    }
    if (!value.empty() && (value.front() == ' ' || value.back() == ' ')) return false;
    return true;
}

const char* transliterate_latin(char32_t cp) noexcept {
    switch (cp) {
        // Latin-1 Supplement, uppercase.
        case 0xC0: case 0xC1: case 0xC2: case 0xC3: case 0xC4: case 0xC5: return "A";
        case 0xC6: return "AE";
        case 0xC7: return "C";
        case 0xC8: case 0xC9: case 0xCA: case 0xCB: return "E";
        case 0xCC: case 0xCD: case 0xCE: case 0xCF: return "I";
        case 0xD0: return "D";
        case 0xD1: return "N";
        case 0xD2: case 0xD3: case 0xD4: case 0xD5: case 0xD6: case 0xD8: return "O";
        case 0xD9: case 0xDA: case 0xDB: case 0xDC: return "U";
        case 0xDD: return "Y";
        case 0xDE: return "TH";
        case 0xDF: return "ss";
        // Latin-1 Supplement, lowercase.
        case 0xE0: case 0xE1: case 0xE2: case 0xE3: case 0xE4: case 0xE5: return "a";
        case 0xE6: return "ae";
        case 0xE7: return "c";
        case 0xE8: case 0xE9: case 0xEA: case 0xEB: return "e";
        case 0xEC: case 0xED: case 0xEE: case 0xEF: return "i";
        case 0xF0: return "d";
        case 0xF1: return "n";
        case 0xF2: case 0xF3: case 0xF4: case 0xF5: case 0xF6: case 0xF8: return "o";
        case 0xF9: case 0xFA: case 0xFB: case 0xFC: return "u";
        case 0xFD: case 0xFF: return "y";
        case 0xFE: return "th";
        default:
            break;
    }
    if (cp < 0x100 || cp > 0x17F) return nullptr;

    // Latin Extended-A.
    static constexpr std::array<const char*, 0x80> kExtendedA = {
        /* 0x100 */ "A", "a", "A", "a", "A", "a", "C", "c",
        /* 0x108 */ "C", "c", "C", "c", "C", "c", "D", "d",
        /* 0x110 */ "D", "d", "E", "e", "E", "e", "E", "e",
        /* 0x118 */ "E", "e", "E", "e", "G", "g", "G", "g",
        /* 0x120 */ "G", "g", "G", "g", "H", "h", "H", "h",
        /* 0x128 */ "I", "i", "I", "i", "I", "i", "I", "i",
        /* 0x130 */ "I", "i", "IJ", "ij", "J", "j", "K", "k",
        /* 0x138 */ "k", "L", "l", "L", "l", "L", "l", "L",
        /* 0x140 */ "l", "L", "l", "N", "n", "N", "n", "N",
        /* 0x148 */ "n", "'n", "NG", "ng", "O", "o", "O", "o",
        /* 0x150 */ "O", "o", "OE", "oe", "R", "r", "R", "r",
        /* 0x158 */ "R", "r", "S", "s", "S", "s", "S", "s",
        /* 0x160 */ "S", "s", "T", "t", "T", "t", "T", "t",
        /* 0x168 */ "U", "u", "U", "u", "U", "u", "U", "u",
        /* 0x170 */ "U", "u", "U", "u", "W", "w", "Y", "y",
        /* 0x178 */ "Y", "Z", "z", "Z", "z", "Z", "z", "s",
    };
    return kExtendedA[cp - 0x100];
}

NormalizedText NormalizedText::normalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;

    auto append = [&](std::string_view piece) {
        if (piece.empty()) return;
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.append(piece);
    };

    std::size_t i = 0;
    while (i < raw.size()) {
        const char32_t cp = decode_utf8(raw, i);
        if (cp == 0x20 || is_space_codepoint(cp)) {
            pending_space = true;
            continue;
        }
        if (cp > 0x20 && cp < 0x7F) {
            const char c = static_cast<char>(cp);
            append(std::string_view(&c, 1));
            continue;
        }
        if (const char* mapped = transliterate_latin(cp)) {
            append(mapped);
        }
        // Untransliterable and non-printable: dropped.
    }
    return NormalizedText(std::move(out));
}

std::optional<NormalizedText> NormalizedText::from_normalized(std::string value) {
    if (!is_normalized(value)) return std::nullopt;
    return NormalizedText(std::move(value));
}

NormalizedText normalize_text(std::string_view raw) {
    return NormalizedText::normalize(raw);
}

std::size_t word_count(const NormalizedText& text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text.str()) {
        if (c == ' ') {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

std::size_t whitespace_word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

}  // namespace peerscout
