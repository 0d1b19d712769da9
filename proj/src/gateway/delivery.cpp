#include "dataclaw/gateway/delivery.hpp"

#include <thread>

#include <httplib.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dataclaw/core/error.hpp"

namespace dataclaw::gateway {

namespace {

struct Target {
  std::string base;    // scheme://host[:port]
  std::string prefix;  // path without trailing '/'
};

Target split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  Target t;
  if (path_start == std::string::npos) {
    t.base = url;
  } else {
    t.base = url.substr(0, path_start);
    t.prefix = url.substr(path_start);
    while (!t.prefix.empty() && t.prefix.back() == '/') t.prefix.pop_back();
  }
  return t;
}

struct Attempt {
  bool ok = false;
  bool transient = false;
  std::string error;
};

Attempt classify(const httplib::Result& res) {
  if (!res) return {false, true, fmt::format("request failed: {}", httplib::to_string(res.error()))};
  if (res->status >= 200 && res->status < 300) return {true, false, {}};
  const bool transient = res->status >= 500 || res->status == 429;
  return {false, transient, fmt::format("HTTP {}", res->status)};
}

}  // namespace

Json to_json(const DeliveryRecord& r) {
  return {{"channel_id", r.channel_id}, {"chat_id", r.chat_id}, {"text", r.text},
          {"attachments", r.attachments}, {"ok", r.ok}, {"attempts", r.attempts},
          {"retries", r.retries}, {"error", r.error}, {"delivered_at", r.delivered_at}};
}

Deliverer::Deliverer(const ArtifactStore& artifacts, Clock& clock, RetryPolicy policy, Sleeper sleeper)
    : artifacts_(artifacts), clock_(clock), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void Deliverer::send_webhook(const ChannelConfig& channel, const OutboundMessage& message, DeliveryRecord& record) {
  const auto target = split_url(channel.outbound_url);
  httplib::Client client(target.base);
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(std::chrono::seconds(30));

  auto with_retries = [&](const std::function<httplib::Result()>& send) {
    for (int retry = 0;; ++retry) {
      ++record.attempts;
      const auto a = classify(send());
      if (a.ok) return true;
      record.error = a.error;
      if (!a.transient || retry >= policy_.max_retries) return false;
      ++record.retries;
      sleeper_(policy_.base_delay * (1 << retry));
    }
  };

  const Json body{{"chat_id", message.chat_id}, {"text", message.text}};
  if (!with_retries([&] { return client.Post(target.prefix + "/sendMessage", body.dump(), "application/json"); })) {
    return;
  }
  for (const auto& a : message.attachments) {
    std::string bytes;
    try {
      bytes = artifacts_.read(a);
    } catch (const Error& e) {
      record.error = e.what();
      return;
    }
    const auto name = std::filesystem::path(a.relative_path).filename().string();
    httplib::MultipartFormDataItems items{{"chat_id", message.chat_id, "", ""},
                                          {"document", bytes, name, a.media_type}};
    if (!with_retries([&] { return client.Post(target.prefix + "/sendDocument", items); })) return;
  }
  record.ok = true;
  record.error.clear();
}

DeliveryRecord Deliverer::deliver(const ChannelConfig& channel, const OutboundMessage& message) {
  if (message.attachments.size() > kMaxAttachments) {
    throw Error(ErrorCode::Precondition,
                fmt::format("{} attachments exceed the limit of {}", message.attachments.size(), kMaxAttachments));
  }
  DeliveryRecord record;
  record.channel_id = channel.channel_id;
  record.chat_id = message.chat_id;
  record.text = message.text;
  for (const auto& a : message.attachments) record.attachments.push_back(a.relative_path);

  if (!channel.enabled) {
    record.error = "channel is disabled";
  } else if (channel.kind == ChannelKind::webhook_im) {
    send_webhook(channel, message, record);
  } else {
    record.attempts = 1;
    record.ok = true;
  }
  record.delivered_at = clock_.now_iso();
  if (!record.ok) {
    record.error = fmt::format("{}: {}", to_string(ErrorCode::DeliveryFailed), record.error);
    spdlog::warn("delivery to {} chat {} failed after {} attempts: {}", channel.channel_id, message.chat_id,
                 record.attempts, record.error);
  }
  std::lock_guard lock(mu_);
  outbox_[channel.channel_id].push_back(record);
  if (!record.ok) failures_.push_back(record);
  return record;
}

std::vector<DeliveryRecord> Deliverer::outbox(const std::string& channel_id) const {
  std::lock_guard lock(mu_);
  auto it = outbox_.find(channel_id);
  return it == outbox_.end() ? std::vector<DeliveryRecord>{} : it->second;
}

std::vector<DeliveryRecord> Deliverer::failures() const {
  std::lock_guard lock(mu_);
  return failures_;
}

}  // namespace dataclaw::gateway
