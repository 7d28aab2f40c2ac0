#pragma once
// Tokenization helpers shared by linking, textification and scoring.

#include <string>
#include <string_view>
#include <vector>

namespace targa::text {

/// Splits text into word tokens and single-character punctuation tokens.
/// Word tokens are runs of letters, digits, '_' and non-ASCII bytes; a '.' or
/// ',' between two digits stays inside the word ("2.21", "1,000").
std::vector<std::string> tokenize(std::string_view text, bool lowercase = false);

/// Label as it appears in pseudo-questions and logic forms:
/// "jpeg (exif 2.21)" -> "jpeg ( exif 2.21 )".
std::string spaced(std::string_view label);

/// Lowercased spaced form; two surfaces match iff their normal forms are equal.
std::string normalize_surface(std::string_view surface);

/// Lowercased word tokens with punctuation dropped and '_' split into parts.
std::vector<std::string> scoring_tokens(std::string_view text);

/// "digicams.digital_camera.viewfinder_type" -> "digicams digital camera viewfinder type".
std::string relation_text(std::string_view relation);

/// Last dotted segment of a relation name.
std::string_view last_segment(std::string_view relation);

/// Second-to-last dotted segment, or the whole name when there is only one.
std::string_view second_to_last_segment(std::string_view relation);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

bool is_word_token(std::string_view token);

}  // namespace targa::text
