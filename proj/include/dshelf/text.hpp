#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dshelf {

/// Case-folds ASCII letters, strips leading/trailing whitespace and collapses
/// internal whitespace runs to one space. Non-ASCII bytes pass through
/// untouched, so diacritics are preserved and the result never depends on the
/// process locale. Idempotent.
std::string canonicalize(std::string_view text);

/// Same whitespace treatment as canonicalize() but keeps letter case.
std::string collapse_whitespace(std::string_view text);

/// Number of UTF-8 code points. Invalid lead bytes count as one each.
std::size_t utf8_length(std::string_view text);

/// Splits into code points (each returned as its UTF-8 byte sequence).
std::vector<std::string_view> utf8_code_points(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace dshelf
