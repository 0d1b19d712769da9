#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dataclaw/core/types.hpp"

namespace dataclaw {

class EventBus;

/// One consumer of a session's events: replayed history first, then live
/// events, both passed through the verbosity filter. Live events wait in a
/// bounded buffer; on overflow the oldest are dropped and the consumer sees
/// one synthetic `error` event (payload.code "gap") in their place.
class Subscription {
 public:
  static constexpr std::size_t kBufferCapacity = 1024;

  Subscription(std::string session_id, Verbosity verbosity, std::int64_t from_seq)
      : session_id_(std::move(session_id)), verbosity_(verbosity), last_delivered_(from_seq) {}

  // Next event, or nullopt after the timeout or once cancelled and drained.
  std::optional<AgentEvent> next(std::chrono::milliseconds timeout);
  // Non-blocking variant.
  std::optional<AgentEvent> poll() { return next(std::chrono::milliseconds(0)); }

  void cancel();
  bool cancelled() const;

  const std::string& session_id() const { return session_id_; }
  Verbosity verbosity() const { return verbosity_; }
  std::int64_t last_delivered_seq() const;
  std::size_t dropped_count() const;

 private:
  friend class EventBus;

  void offer(const AgentEvent& event);

  const std::string session_id_;
  const Verbosity verbosity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<AgentEvent> replay_;
  std::deque<AgentEvent> live_;
  std::int64_t last_delivered_;
  std::int64_t gap_from_ = 0;
  std::int64_t gap_to_ = 0;
  std::size_t dropped_ = 0;
  bool cancelled_ = false;
};

/// Per-session replayable event log with fan-out. emit never blocks on
/// consumers.
class EventBus {
 public:
  // Creates the session's (empty) log if it does not exist yet.
  void open_session(const std::string& session_id);
  bool has_session(const std::string& session_id) const;

  /// SeqViolation unless event.seq is the session's last seq + 1. Opens the
  /// session log implicitly for seq 1.
  void emit(const AgentEvent& event);

  /// UnknownSession when the session has no log.
  std::shared_ptr<Subscription> subscribe(const std::string& session_id, Verbosity verbosity,
                                          std::int64_t from_seq = 0);

  std::vector<AgentEvent> history(const std::string& session_id) const;
  std::int64_t last_seq(const std::string& session_id) const;

  // Seeds a log from persisted events (e.g. after a restart).
  void restore(const std::string& session_id, std::vector<AgentEvent> events);

 private:
  struct SessionLog {
    std::vector<AgentEvent> events;
    std::vector<std::weak_ptr<Subscription>> subscribers;
  };

  mutable std::mutex mu_;
  std::map<std::string, SessionLog> sessions_;
};

}  // namespace dataclaw
