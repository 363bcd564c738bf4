#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace judgekit::utf8 {

// Invalid byte sequences decode to U+FFFD one byte at a time.
std::vector<char32_t> decode(std::string_view text);
std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

std::size_t length(std::string_view text);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);

/// ASCII-only lower-casing; other code points pass through.
std::string ascii_lower(std::string_view text);

}  // namespace judgekit::utf8
