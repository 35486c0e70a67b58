#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Minimal UTF-8 machinery: decoding with U+FFFD replacement, a word-character
// classifier for tokenization, and ASCII/Latin-1 lowercasing. Social-media
// dumps are dirty, so decoding never fails; invalid byte sequences become
// replacement characters.

namespace senti::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at `pos`, advancing `pos` past it.
// Invalid sequences consume one byte and yield U+FFFD.
inline char32_t decode(std::string_view s, std::size_t& pos) {
    const auto byte = [&](std::size_t i) -> std::uint8_t {
        return static_cast<std::uint8_t>(s[i]);
    };
    const std::uint8_t b0 = byte(pos);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return kReplacement;
    }
    if (pos + static_cast<std::size_t>(len) > s.size()) {
        ++pos;
        return kReplacement;
    }
    for (int i = 1; i < len; ++i) {
        const std::uint8_t bi = byte(pos + static_cast<std::size_t>(i));
        if ((bi & 0xC0) != 0x80) {
            ++pos;
            return kReplacement;
        }
        cp = (cp << 6) | (bi & 0x3F);
    }
    // Reject overlong encodings, surrogates and out-of-range values.
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kReplacement;
    }
    pos += static_cast<std::size_t>(len);
    return cp;
}

inline void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Re-encodes `s`, replacing every invalid sequence with U+FFFD.
inline std::string sanitize(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (pos < s.size()) encode(decode(s, pos), out);
    return out;
}

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

inline bool is_ascii_letter(char32_t cp) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

// Letter/digit test covering the major scripts seen in social-media text.
// Punctuation, symbols and emoji fall outside every range and therefore act
// as token separators.
inline bool is_letter_or_digit(char32_t cp) {
    if (cp < 0x80) return is_ascii_letter(cp) || is_ascii_digit(cp);
    struct Range {
        char32_t lo, hi;
    };
    static constexpr Range kRanges[] = {
        {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x02AF},  // Latin-1..IPA
        {0x0370, 0x03FF}, {0x0400, 0x04FF}, {0x0500, 0x052F},  // Greek, Cyrillic
        {0x0531, 0x058F},                                      // Armenian
        {0x0590, 0x05FF}, {0x0600, 0x06FF}, {0x0750, 0x077F},  // Hebrew, Arabic
        {0x0900, 0x097F}, {0x0980, 0x09FF},                    // Devanagari, Bengali
        {0x0E00, 0x0E7F},                                      // Thai
        {0x10A0, 0x10FF},                                      // Georgian
        {0x1E00, 0x1EFF},                                      // Latin extended additional
        {0x3040, 0x30FF},                                      // Hiragana, Katakana
        {0x3400, 0x4DBF}, {0x4E00, 0x9FFF},                    // CJK
        {0xAC00, 0xD7AF},                                      // Hangul
        {0xFF10, 0xFF19}, {0xFF21, 0xFF3A}, {0xFF41, 0xFF5A},  // fullwidth forms
    };
    for (const auto& r : kRanges)
        if (cp >= r.lo && cp <= r.hi) return true;
    return false;
}

// Lowercases ASCII and the Latin-1 supplement; other scripts pass through.
inline char32_t to_lower(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    return cp;
}

inline bool is_upper(char32_t cp) { return to_lower(cp) != cp; }

inline std::string to_lower_copy(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (pos < s.size()) encode(to_lower(decode(s, pos)), out);
    return out;
}

}  // namespace senti::unicode
