#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "dataclaw/core/types.hpp"

namespace dataclaw {

struct PromptMessage {
  Role role = Role::user;
  std::string text;

  bool operator==(const PromptMessage&) const = default;
};

struct CompletionRequest {
  std::string system_block;
  std::vector<PromptMessage> messages;
  std::vector<std::string> stop_sequences;
  std::uint32_t max_output_tokens = 1024;
  // Budget the request is checked against before it leaves the process.
  std::uint32_t context_window_tokens = 8192;
};

std::int64_t estimate_request_tokens(const CompletionRequest& request);

struct CompletionResult {
  std::string text;
  std::int64_t input_token_estimate = 0;
  std::int64_t output_token_estimate = 0;
};

enum class BackendKind { remote_chat_api, scripted };

struct BackendDescriptor {
  BackendKind kind = BackendKind::scripted;
  std::string endpoint;
  std::string model_name;
  std::vector<std::string> script;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;
  // Raw model call. Budget checks happen in the free complete() below.
  virtual std::string generate(const CompletionRequest& request) = 0;
};

/// Replays canned responses in order; throws ScriptExhausted past the end.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> script) : script_(std::move(script)) {}

  BackendKind kind() const override { return BackendKind::scripted; }
  std::string generate(const CompletionRequest& request) override;

  std::size_t calls() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> script_;
  std::size_t cursor_ = 0;
};

/// Chat-completions style HTTP backend:
/// POST {"model", "messages":[{"role","content"}], "stop", "max_tokens"} and
/// read choices[0].message.content.
class RemoteBackend final : public Backend {
 public:
  RemoteBackend(std::string endpoint, std::string model,
                std::chrono::seconds timeout = std::chrono::seconds(120));

  BackendKind kind() const override { return BackendKind::remote_chat_api; }
  std::string generate(const CompletionRequest& request) override;

  // Wire body for a request; exposed for tests of the JSON shape.
  Json wire_body(const CompletionRequest& request) const;

 private:
  std::string base_;
  std::string path_;
  std::string model_;
  std::chrono::seconds timeout_;
};

std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor);

/// Scripts are JSON arrays of strings.
std::vector<std::string> load_script(const std::string& path);
std::vector<std::string> parse_script(std::string_view json_text);

/// Checks the request budget (BudgetExceeded) and calls the backend.
CompletionResult complete(Backend& backend, const CompletionRequest& request);

/// "role: <first 80 chars>" per message, newline-joined, cut to budget_tokens.
std::string deterministic_summary(std::span<const ChatMessage> messages, std::int64_t budget_tokens);

/// Scripted backends use deterministic_summary; remote backends ask the model
/// and the reply is cut to the budget.
std::string summarize(Backend& backend, std::span<const ChatMessage> messages,
                      std::int64_t budget_tokens);

}  // namespace dataclaw
