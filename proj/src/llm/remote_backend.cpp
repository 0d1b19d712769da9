#include <httplib.h>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/llm/backend.hpp"

namespace dataclaw {

namespace {

std::string wire_role(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::agent: return "assistant";
    case Role::user:
    case Role::tool: return "user";
  }
  return "user";
}

}  // namespace

RemoteBackend::RemoteBackend(std::string endpoint, std::string model, std::chrono::seconds timeout)
    : model_(std::move(model)), timeout_(timeout) {
  const auto scheme = endpoint.find("://");
  const auto path_start = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    base_ = endpoint;
    path_ = "/";
  } else {
    base_ = endpoint.substr(0, path_start);
    path_ = endpoint.substr(path_start);
  }
}

Json RemoteBackend::wire_body(const CompletionRequest& request) const {
  Json messages = Json::array();
  if (!request.system_block.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_block}});
  }
  for (const auto& m : request.messages) {
    const auto content = m.role == Role::tool ? "OBSERVATION: " + m.text : m.text;
    messages.push_back({{"role", wire_role(m.role)}, {"content", content}});
  }
  Json body;
  body["model"] = model_;
  body["messages"] = std::move(messages);
  body["stop"] = request.stop_sequences;
  body["max_tokens"] = request.max_output_tokens;
  return body;
}

std::string RemoteBackend::generate(const CompletionRequest& request) {
  httplib::Client client(base_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout_);
  auto res = client.Post(path_, wire_body(request).dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnreachable,
                fmt::format("POST {}{} failed: {}", base_, path_, httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::BackendUnreachable,
                fmt::format("backend returned HTTP {}: {}", res->status, res->body.substr(0, 200)));
  }
  try {
    auto j = Json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BackendUnreachable, std::string("malformed backend response: ") + e.what());
  }
}

}  // namespace dataclaw
