#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "dataclaw/core/clock.hpp"
#include "dataclaw/gateway/channel.hpp"
#include "dataclaw/persist/artifact_store.hpp"

namespace dataclaw::gateway {

struct DeliveryRecord {
  std::string channel_id;
  std::string chat_id;
  std::string text;
  std::vector<std::string> attachments;  // workspace-relative paths
  bool ok = false;
  int attempts = 0;
  int retries = 0;
  std::string error;
  std::string delivered_at;
};

Json to_json(const DeliveryRecord& record);

// Transient failures (no connection, 5xx, 429) are retried with delays
// base, 2*base, 4*base, ...
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{1000};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Sends turn results back out through a channel. Never throws for delivery
/// problems: they end up in the returned record and in failures().
class Deliverer {
 public:
  Deliverer(const ArtifactStore& artifacts, Clock& clock, RetryPolicy policy = {}, Sleeper sleeper = {});

  DeliveryRecord deliver(const ChannelConfig& channel, const OutboundMessage& message);

  // Every delivery made through the channel, oldest first.
  std::vector<DeliveryRecord> outbox(const std::string& channel_id) const;
  std::vector<DeliveryRecord> failures() const;

 private:
  void send_webhook(const ChannelConfig& channel, const OutboundMessage& message, DeliveryRecord& record);

  const ArtifactStore& artifacts_;
  Clock& clock_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<DeliveryRecord>> outbox_;
  std::vector<DeliveryRecord> failures_;
};

}  // namespace dataclaw::gateway
