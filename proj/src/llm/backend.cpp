#include "dataclaw/llm/backend.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/llm/tokens.hpp"

namespace dataclaw {

std::int64_t estimate_request_tokens(const CompletionRequest& request) {
  std::int64_t total = estimate_tokens(request.system_block);
  for (const auto& m : request.messages) total += estimate_tokens(m.text);
  return total;
}

std::string ScriptedBackend::generate(const CompletionRequest&) {
  std::lock_guard lock(mu_);
  if (cursor_ >= script_.size()) {
    throw Error(ErrorCode::ScriptExhausted,
                fmt::format("scripted backend exhausted after {} responses", script_.size()));
  }
  return script_[cursor_++];
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return cursor_;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size() - cursor_;
}

std::unique_ptr<Backend> make_backend(const BackendDescriptor& d) {
  switch (d.kind) {
    case BackendKind::scripted:
      return std::make_unique<ScriptedBackend>(d.script);
    case BackendKind::remote_chat_api:
      if (d.endpoint.empty()) throw Error(ErrorCode::InvalidConfig, "remote backend needs an endpoint");
      return std::make_unique<RemoteBackend>(d.endpoint, d.model_name);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown backend kind");
}

std::vector<std::string> parse_script(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("script is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "script must be a JSON array of strings");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) throw Error(ErrorCode::ParseError, "script entries must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<std::string> load_script(const std::string& path) {
  return parse_script(read_file(path));
}

CompletionResult complete(Backend& backend, const CompletionRequest& request) {
  const auto input = estimate_request_tokens(request);
  if (input > static_cast<std::int64_t>(request.context_window_tokens)) {
    throw Error(ErrorCode::BudgetExceeded,
                fmt::format("request needs {} tokens but the context window is {}", input,
                            request.context_window_tokens));
  }
  CompletionResult result;
  result.text = backend.generate(request);
  result.input_token_estimate = input;
  result.output_token_estimate = estimate_tokens(result.text);
  return result;
}

std::string deterministic_summary(std::span<const ChatMessage> messages, std::int64_t budget_tokens) {
  if (messages.empty()) throw Error(ErrorCode::Precondition, "summarize needs at least one message");
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += '\n';
    std::string head(utf8_first_chars(m.text, 80));
    std::replace(head.begin(), head.end(), '\n', ' ');
    std::replace(head.begin(), head.end(), '\r', ' ');
    out += fmt::format("{}: {}", to_string(m.role), head);
  }
  const auto max_bytes = static_cast<std::size_t>(std::max<std::int64_t>(budget_tokens, 0) * 4);
  return std::string(utf8_prefix(out, max_bytes));
}

std::string summarize(Backend& backend, std::span<const ChatMessage> messages, std::int64_t budget_tokens) {
  if (messages.empty()) throw Error(ErrorCode::Precondition, "summarize needs at least one message");
  if (backend.kind() == BackendKind::scripted) return deterministic_summary(messages, budget_tokens);

  CompletionRequest req;
  req.system_block =
      "Summarize the conversation below into concise notes that preserve dataset names, "
      "schemas, handles, findings and open questions. Plain text only.";
  std::string transcript;
  for (const auto& m : messages) transcript += fmt::format("{}: {}\n", to_string(m.role), m.text);
  req.messages.push_back({Role::user, std::move(transcript)});
  req.max_output_tokens = static_cast<std::uint32_t>(std::max<std::int64_t>(budget_tokens, 1));
  req.context_window_tokens = static_cast<std::uint32_t>(estimate_request_tokens(req));
  const auto text = backend.generate(req);
  const auto max_bytes = static_cast<std::size_t>(std::max<std::int64_t>(budget_tokens, 0) * 4);
  return std::string(utf8_prefix(text, max_bytes));
}

}  // namespace dataclaw
