#include "dataclaw/stream/event_bus.hpp"

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/stream/sse.hpp"

namespace dataclaw {

std::optional<AgentEvent> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return cancelled_ || !replay_.empty() || !live_.empty() || gap_to_ > last_delivered_; });
  if (!replay_.empty()) {
    auto e = std::move(replay_.front());
    replay_.pop_front();
    last_delivered_ = e.seq;
    return e;
  }
  if (gap_to_ > last_delivered_) {
    AgentEvent gap;
    gap.seq = gap_to_;
    gap.session_id = session_id_;
    gap.kind = EventKind::error;
    gap.payload = {{"code", "gap"},
                   {"message", fmt::format("subscriber fell behind; events {}..{} were dropped", gap_from_, gap_to_)},
                   {"dropped_from", gap_from_},
                   {"dropped_to", gap_to_},
                   {"synthetic", true}};
    if (!live_.empty()) gap.timestamp = live_.front().timestamp;
    last_delivered_ = gap_to_;
    return gap;
  }
  if (!live_.empty()) {
    auto e = std::move(live_.front());
    live_.pop_front();
    last_delivered_ = e.seq;
    return e;
  }
  return std::nullopt;
}

void Subscription::cancel() {
  {
    std::lock_guard lock(mu_);
    cancelled_ = true;
  }
  cv_.notify_all();
}

bool Subscription::cancelled() const {
  std::lock_guard lock(mu_);
  return cancelled_;
}

std::int64_t Subscription::last_delivered_seq() const {
  std::lock_guard lock(mu_);
  return last_delivered_;
}

std::size_t Subscription::dropped_count() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Subscription::offer(const AgentEvent& event) {
  if (!verbosity_allows(verbosity_, event.kind)) return;
  {
    std::lock_guard lock(mu_);
    if (cancelled_) return;
    if (live_.size() >= kBufferCapacity) {
      const auto& oldest = live_.front();
      if (gap_to_ <= last_delivered_) gap_from_ = oldest.seq;
      gap_to_ = oldest.seq;
      ++dropped_;
      live_.pop_front();
    }
    live_.push_back(event);
  }
  cv_.notify_all();
}

void EventBus::open_session(const std::string& session_id) {
  std::lock_guard lock(mu_);
  sessions_[session_id];
}

bool EventBus::has_session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return sessions_.count(session_id) > 0;
}

void EventBus::emit(const AgentEvent& event) {
  std::vector<std::shared_ptr<Subscription>> targets;
  {
    std::lock_guard lock(mu_);
    auto& log = sessions_[event.session_id];
    const std::int64_t expected = log.events.empty() ? 1 : log.events.back().seq + 1;
    if (event.seq != expected) {
      throw Error(ErrorCode::SeqViolation, fmt::format("session {}: expected seq {}, got {}", event.session_id,
                                                       expected, event.seq));
    }
    log.events.push_back(event);
    auto& subs = log.subscribers;
    for (auto it = subs.begin(); it != subs.end();) {
      auto sub = it->lock();
      if (!sub || sub->cancelled()) {
        it = subs.erase(it);
        continue;
      }
      // Offered while still holding the bus lock so a concurrent subscribe
      // cannot slip between the log append and the fan-out.
      sub->offer(event);
      ++it;
    }
  }
}

std::shared_ptr<Subscription> EventBus::subscribe(const std::string& session_id, Verbosity verbosity,
                                                  std::int64_t from_seq) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session " + session_id);
  auto sub = std::make_shared<Subscription>(session_id, verbosity, from_seq);
  for (const auto& e : it->second.events) {
    if (e.seq > from_seq && verbosity_allows(verbosity, e.kind)) sub->replay_.push_back(e);
  }
  it->second.subscribers.push_back(sub);
  return sub;
}

std::vector<AgentEvent> EventBus::history(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session " + session_id);
  return it->second.events;
}

std::int64_t EventBus::last_seq(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end() || it->second.events.empty()) return 0;
  return it->second.events.back().seq;
}

void EventBus::restore(const std::string& session_id, std::vector<AgentEvent> events) {
  std::lock_guard lock(mu_);
  auto& log = sessions_[session_id];
  if (log.events.empty()) log.events = std::move(events);
}

}  // namespace dataclaw
