#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dataclaw/core/types.hpp"

namespace dataclaw::gateway {

enum class ChannelKind { webhook_im, loopback, console };

std::string_view to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(std::string_view s);

struct ChannelConfig {
  std::string channel_id;
  ChannelKind kind = ChannelKind::loopback;
  std::optional<std::string> inbound_secret;
  std::string outbound_url;  // webhook_im only
  bool enabled = true;

  bool operator==(const ChannelConfig&) const = default;
};

Json to_json(const ChannelConfig& channel);
/// InvalidConfig for unknown keys, bad kinds, or a webhook_im channel
/// without outbound_url.
ChannelConfig channel_from_json(const Json& j);

/// Normalized inbound chat message.
struct InboundUpdate {
  std::string chat_id;
  std::string user_id;
  std::string text;
  std::vector<std::string> attachments;
  Json raw;
};

/// Telegram-compatible subset:
///   {"message": {"chat": {"id": N}, "from": {"id": N}, "text": "..."}}
/// ParseError when the shape does not match.
InboundUpdate parse_webhook_update(std::string_view body);

// Same (channel, chat) pair, same session id.
std::string chat_session_id(std::string_view channel_id, std::string_view chat_id);

inline constexpr std::size_t kMaxAttachments = 10;

struct OutboundMessage {
  std::string channel_id;
  std::string chat_id;
  std::string text;
  std::vector<Artifact> attachments;
};

}  // namespace dataclaw::gateway
