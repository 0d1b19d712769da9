#include "dataclaw/gateway/channel.hpp"

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/ids.hpp"

namespace dataclaw::gateway {

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::InvalidConfig, message); }

[[noreturn]] void malformed(const std::string& message) { throw Error(ErrorCode::ParseError, message); }

// Telegram ids are integers; strings are accepted for other adapters.
std::string id_text(const Json& v, const char* what) {
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_string() && !v.get<std::string>().empty()) return v.get<std::string>();
  malformed(fmt::format("{} must be an integer or a non-empty string", what));
}

}  // namespace

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::webhook_im: return "webhook_im";
    case ChannelKind::loopback: return "loopback";
    case ChannelKind::console: return "console";
  }
  return "loopback";
}

ChannelKind channel_kind_from_string(std::string_view s) {
  if (s == "webhook_im") return ChannelKind::webhook_im;
  if (s == "loopback") return ChannelKind::loopback;
  if (s == "console") return ChannelKind::console;
  invalid(fmt::format("unknown channel kind '{}' (expected webhook_im, loopback or console)", s));
}

Json to_json(const ChannelConfig& c) {
  Json j;
  j["channel_id"] = c.channel_id;
  j["kind"] = to_string(c.kind);
  j["inbound_secret"] = c.inbound_secret ? Json(*c.inbound_secret) : Json();
  j["outbound_url"] = c.outbound_url;
  j["enabled"] = c.enabled;
  return j;
}

ChannelConfig channel_from_json(const Json& j) {
  if (!j.is_object()) invalid("channel must be a JSON object");
  ChannelConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "channel_id") {
      if (!v.is_string()) invalid("channel_id must be a string");
      c.channel_id = v.get<std::string>();
    } else if (key == "kind") {
      if (!v.is_string()) invalid("kind must be a string");
      c.kind = channel_kind_from_string(v.get<std::string>());
    } else if (key == "inbound_secret") {
      if (v.is_null()) {
        c.inbound_secret.reset();
      } else if (v.is_string()) {
        c.inbound_secret = v.get<std::string>();
      } else {
        invalid("inbound_secret must be a string or null");
      }
    } else if (key == "outbound_url") {
      if (!v.is_string()) invalid("outbound_url must be a string");
      c.outbound_url = v.get<std::string>();
    } else if (key == "enabled") {
      if (!v.is_boolean()) invalid("enabled must be true or false");
      c.enabled = v.get<bool>();
    } else {
      invalid(fmt::format("unknown channel field '{}'", key));
    }
  }
  if (c.channel_id.empty()) invalid("channel_id is required");
  for (char ch : c.channel_id) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') {
      invalid(fmt::format("channel_id '{}' may only contain letters, digits, '-' and '_'", c.channel_id));
    }
  }
  if (c.kind == ChannelKind::webhook_im) {
    if (c.outbound_url.rfind("http://", 0) != 0 && c.outbound_url.rfind("https://", 0) != 0) {
      invalid("webhook_im channels need an http(s) outbound_url");
    }
  }
  return c;
}

InboundUpdate parse_webhook_update(std::string_view body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    malformed(fmt::format("update is not JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("message") || !j["message"].is_object()) malformed("update has no message object");
  const auto& m = j["message"];
  if (!m.contains("chat") || !m["chat"].is_object() || !m["chat"].contains("id")) malformed("message.chat.id is missing");
  InboundUpdate u;
  u.chat_id = id_text(m["chat"]["id"], "message.chat.id");
  if (m.contains("from")) {
    if (!m["from"].is_object() || !m["from"].contains("id")) malformed("message.from.id is missing");
    u.user_id = id_text(m["from"]["id"], "message.from.id");
  }
  if (!m.contains("text") || !m["text"].is_string()) malformed("message.text must be a string");
  u.text = m["text"].get<std::string>();
  if (u.text.empty()) malformed("message.text is empty");
  if (m.contains("document")) {
    const auto& d = m["document"];
    if (!d.is_object() || !d.contains("file_name") || !d["file_name"].is_string()) {
      malformed("message.document.file_name must be a string");
    }
    u.attachments.push_back(d["file_name"].get<std::string>());
  }
  u.raw = std::move(j);
  return u;
}

std::string chat_session_id(std::string_view channel_id, std::string_view chat_id) {
  return derived_id(fmt::format("{}:{}", channel_id, chat_id));
}

}  // namespace dataclaw::gateway
