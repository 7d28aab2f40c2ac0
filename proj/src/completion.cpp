#include "targa/completion.hpp"

#include <sstream>

#include "targa/error.hpp"
#include "targa/text.hpp"

namespace targa {

std::size_t whitespace_tokens(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  std::string word;
  while (in >> word) ++n;
  return n;
}

std::string strip_fences(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.rfind("```", 0) == 0) continue;
    if (t.empty() && out.empty()) continue;
    out += t;
    out += '\n';
  }
  while (!out.empty() && (out.back() == '\n')) out.pop_back();
  return out;
}

Completion EchoProvider::complete(const std::string& prompt) {
  static constexpr std::string_view kMarker = "###PyQL\n";
  static constexpr std::string_view kInstruction = "Please follow the format of exemplars";
  const auto stop = prompt.find(kInstruction);
  const auto head = std::string_view(prompt).substr(0, stop);
  const auto at = head.rfind(kMarker);
  if (at == std::string_view::npos) throw ProviderError("prompt has no exemplar to echo", "echo-mock");
  auto body = head.substr(at + kMarker.size());
  Completion c;
  c.text = text::trim(body);
  if (c.text.empty()) throw ProviderError("empty completion", "echo-mock");
  c.usage = {whitespace_tokens(prompt), whitespace_tokens(c.text)};
  return c;
}

Completion ChatProvider::complete(const std::string& prompt) {
  nlohmann::json body{
      {"model", endpoint_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  Completion c;
  const auto res = post_json(endpoint_, body, &c.attempts);
  try {
    const auto& content = res.at("choices").at(0).at("message").at("content");
    c.text = content.is_string() ? content.get<std::string>() : std::string();
    if (res.contains("usage")) {
      const auto& u = res["usage"];
      c.usage.input_tokens = u.value("prompt_tokens", std::size_t{0});
      c.usage.output_tokens = u.value("completion_tokens", std::size_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("unexpected chat response: ") + e.what(), endpoint_.url);
  }
  c.text = strip_fences(c.text);
  if (c.text.empty()) throw ProviderError("empty completion", endpoint_.url);
  return c;
}

}  // namespace targa
