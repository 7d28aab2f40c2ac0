#include "targa/literal.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace targa {

std::string_view to_string(LiteralKind kind) {
  switch (kind) {
    case LiteralKind::String: return "string";
    case LiteralKind::Number: return "number";
    case LiteralKind::DateTime: return "datetime";
    case LiteralKind::Boolean: return "boolean";
  }
  return "string";
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  // from_chars would accept "inf"/"nan"; literals here are plain decimals.
  for (char c : text) {
    const bool ok = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == 'e' || c == 'E' || c == '+';
    if (!ok) return std::nullopt;
  }
  double value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

}  // namespace

std::optional<double> parse_iso_datetime(std::string_view text) {
  using namespace std::chrono;
  int y = 0, m = 1, d = 1, hh = 0, mm = 0, ss = 0;
  if (!read_int(text, 0, 4, y)) return std::nullopt;
  std::size_t pos = 4;
  if (pos < text.size()) {
    if (text[pos] != '-' || !read_int(text, pos + 1, 2, m)) return std::nullopt;
    pos += 3;
    if (pos < text.size()) {
      if (text[pos] != '-' || !read_int(text, pos + 1, 2, d)) return std::nullopt;
      pos += 3;
      if (pos < text.size()) {
        if ((text[pos] != 'T' && text[pos] != ' ') || !read_int(text, pos + 1, 2, hh) ||
            pos + 3 >= text.size() || text[pos + 3] != ':' || !read_int(text, pos + 4, 2, mm)) {
          return std::nullopt;
        }
        pos += 6;
        if (pos < text.size() && text[pos] == ':') {
          if (!read_int(text, pos + 1, 2, ss)) return std::nullopt;
          pos += 3;
        }
        if (pos < text.size() && text[pos] == 'Z') ++pos;
        if (pos != text.size()) return std::nullopt;
      }
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  const auto tp = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
  return static_cast<double>(duration_cast<seconds>(tp.time_since_epoch()).count());
}

Literal Literal::parse(std::string_view lexical) {
  Literal lit;
  lit.lexical = std::string(lexical);
  if (auto n = parse_number(lexical)) {
    // A bare four-digit year reads as a number; quoted years become datetimes.
    lit.kind = LiteralKind::Number;
    lit.numeric = n;
  } else if (auto t = parse_iso_datetime(lexical)) {
    lit.kind = LiteralKind::DateTime;
    lit.numeric = t;
  } else if (lexical == "true" || lexical == "false") {
    lit.kind = LiteralKind::Boolean;
  }
  return lit;
}

Literal Literal::quoted(std::string_view lexical) {
  Literal lit;
  lit.lexical = std::string(lexical);
  if (auto t = parse_iso_datetime(lexical)) {
    lit.kind = LiteralKind::DateTime;
    lit.numeric = t;
  }
  return lit;
}

Literal Literal::number(double value) {
  return Literal{LiteralKind::Number, format_number(value), value};
}

std::strong_ordering compare_values(const Literal& a, const Literal& b) {
  // A datetime compared with a bare year or date string compares as datetimes.
  if ((a.kind == LiteralKind::DateTime) != (b.kind == LiteralKind::DateTime)) {
    const Literal& other = a.kind == LiteralKind::DateTime ? b : a;
    if (auto t = parse_iso_datetime(other.lexical)) {
      Literal coerced{LiteralKind::DateTime, other.lexical, t};
      return a.kind == LiteralKind::DateTime ? compare_values(a, coerced) : compare_values(coerced, b);
    }
  }
  if (a.numeric && b.numeric) {
    if (*a.numeric < *b.numeric) return std::strong_ordering::less;
    if (*a.numeric > *b.numeric) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  return a.lexical <=> b.lexical;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace targa
