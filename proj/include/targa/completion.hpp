#pragma once
// Text completion providers for the question-answering prompt.

#include <cstddef>
#include <string>
#include <string_view>

#include "targa/http.hpp"

namespace targa {

struct Usage {
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
};

struct Completion {
  std::string text;
  Usage usage;
  int attempts = 1;
};

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  /// Throws ProviderError on transport failure or an empty completion.
  virtual Completion complete(const std::string& prompt) = 0;
  virtual std::string name() const = 0;
};

/// Answers with the logic form of the last exemplar in the prompt. Token
/// usage is counted in whitespace-separated tokens.
class EchoProvider final : public CompletionProvider {
 public:
  Completion complete(const std::string& prompt) override;
  std::string name() const override { return "echo-mock"; }
};

/// Chat-completions service: {"model", "messages", "temperature": 0} ->
/// {"choices": [{"message": {"content"}}], "usage": {...}}.
class ChatProvider final : public CompletionProvider {
 public:
  explicit ChatProvider(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  Completion complete(const std::string& prompt) override;
  std::string name() const override { return "remote-chat"; }

 private:
  Endpoint endpoint_;
};

/// Removes Markdown code-fence lines and trims every line.
std::string strip_fences(std::string_view text);

std::size_t whitespace_tokens(std::string_view text);

}  // namespace targa
