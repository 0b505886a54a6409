#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace causeway {

/// True if the text contains an http(s)://, www. or t.co/ link.
bool contains_url(std::string_view text);

/// Removes URL chunks and @mentions (whitespace-delimited) from the text.
std::string strip_urls_mentions(std::string_view text);

/// Lowercased tokens, split on non-alphanumeric bytes. When keep_apostrophe
/// is true an apostrophe inside a word is kept ("i'm" stays one token);
/// leading/trailing apostrophes are trimmed either way.
std::vector<std::string> tokenize(std::string_view text, bool keep_apostrophe = false);

std::string to_lower(std::string_view s);

/// True when `needle_tokens` occurs as a consecutive run inside `tokens`.
bool contains_token_sequence(const std::vector<std::string>& tokens,
                             const std::vector<std::string>& needle_tokens);

}  // namespace causeway
