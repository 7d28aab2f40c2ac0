#pragma once
// Typed literal values stored in the graph and used by filter decorations.

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace targa {

enum class LiteralKind { String, Number, DateTime, Boolean };

std::string_view to_string(LiteralKind kind);

/// A literal value. `numeric` is set exactly for numbers and datetimes
/// (seconds since the Unix epoch, UTC).
struct Literal {
  LiteralKind kind = LiteralKind::String;
  std::string lexical;
  std::optional<double> numeric;

  /// Number, ISO date/datetime, boolean, or string, in that order of preference.
  static Literal parse(std::string_view lexical);
  /// Value written inside quotes: datetime when ISO-shaped, string otherwise.
  static Literal quoted(std::string_view lexical);
  static Literal number(double value);

  bool operator==(const Literal& other) const {
    return kind == other.kind && lexical == other.lexical;
  }
};

std::optional<double> parse_number(std::string_view text);

/// Accepts YYYY, YYYY-MM, YYYY-MM-DD and YYYY-MM-DD[T ]hh:mm[:ss][Z].
std::optional<double> parse_iso_datetime(std::string_view text);

/// Numeric comparison when both sides carry a numeric value, lexical otherwise.
std::strong_ordering compare_values(const Literal& a, const Literal& b);

/// Shortest decimal rendering that round-trips ("260", "12.1").
std::string format_number(double value);

}  // namespace targa
