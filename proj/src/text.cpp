#include "targa/text.hpp"

#include <cctype>

namespace targa::text {

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (is_word_char(c)) {
      current.push_back(lowercase ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if ((c == '.' || c == ',') && !current.empty() && is_digit(current.back()) &&
               i + 1 < text.size() && is_digit(text[i + 1])) {
      current.push_back(static_cast<char>(c));
    } else {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

std::string spaced(std::string_view label) { return join(tokenize(label, false), " "); }

std::string normalize_surface(std::string_view surface) {
  return join(tokenize(surface, true), " ");
}

std::vector<std::string> scoring_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& token : tokenize(text, true)) {
    if (!is_word_token(token)) continue;
    std::size_t start = 0;
    while (start <= token.size()) {
      const auto end = token.find('_', start);
      const auto part = token.substr(start, end == std::string::npos ? std::string::npos : end - start);
      if (!part.empty()) out.push_back(part);
      if (end == std::string::npos) break;
      start = end + 1;
    }
  }
  return out;
}

std::string relation_text(std::string_view relation) {
  std::string out;
  out.reserve(relation.size());
  for (char c : relation) {
    const bool sep = c == '.' || c == '_';
    if (sep) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string_view last_segment(std::string_view relation) {
  const auto dot = relation.rfind('.');
  return dot == std::string_view::npos ? relation : relation.substr(dot + 1);
}

std::string_view second_to_last_segment(std::string_view relation) {
  const auto last = relation.rfind('.');
  if (last == std::string_view::npos) return relation;
  const auto head = relation.substr(0, last);
  const auto prev = head.rfind('.');
  return prev == std::string_view::npos ? head : head.substr(prev + 1);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_word_token(std::string_view token) {
  for (char c : token) {
    if (is_word_char(static_cast<unsigned char>(c))) return true;
  }
  return false;
}

}  // namespace targa::text
