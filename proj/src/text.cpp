#include "causeway/text.hpp"

#include <cctype>

namespace causeway {
namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

bool chunk_is_url(std::string_view c) {
  auto starts = [&](std::string_view p) {
    if (c.size() < p.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(c[i])) != p[i]) return false;
    return true;
  };
  return starts("http://") || starts("https://") || starts("www.") || starts("t.co/");
}

template <typename Fn>
void for_each_chunk(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) fn(text.substr(i, j - i));
    i = j;
  }
}

}  // namespace

bool contains_url(std::string_view text) {
  bool found = false;
  for_each_chunk(text, [&](std::string_view c) { found = found || chunk_is_url(c); });
  return found;
}

std::string strip_urls_mentions(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for_each_chunk(text, [&](std::string_view c) {
    if (chunk_is_url(c) || c.front() == '@') return;
    if (!out.empty()) out.push_back(' ');
    out.append(c);
  });
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokenize(std::string_view text, bool keep_apostrophe) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    if (!cur.empty()) tokens.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (is_alnum(c) || (keep_apostrophe && ch == '\'' && !cur.empty())) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool contains_token_sequence(const std::vector<std::string>& tokens,
                             const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (tokens[i + j] != needle[j]) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace causeway
