#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dataclaw/core/clock.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/types.hpp"

namespace dataclaw {

/// Shared registry of sessions. Capacity counts sessions that are not closed.
class SessionTable {
 public:
  SessionTable(std::size_t capacity, Clock& clock, IdSource& ids)
      : capacity_(capacity), clock_(clock), ids_(ids) {}

  Session new_session(const std::string& channel_id);
  // Creates the session under a caller-chosen id, or returns the existing one.
  Session open_session(const std::string& id, const std::string& channel_id);

  std::optional<Session> find(const std::string& id) const;
  std::vector<Session> list() const;

  // Moves idle -> running. Throws TurnInFlight if already running,
  // SessionClosed if closed, UnknownSession if absent.
  Session begin_turn(const std::string& id);
  void end_turn(const std::string& id);
  void close(const std::string& id);

  std::size_t active_count() const;
  std::size_t running_count() const;
  std::size_t capacity() const;
  void set_capacity(std::size_t capacity);

 private:
  Session create_locked(const std::string& id, const std::string& channel_id);

  mutable std::mutex mu_;
  std::size_t capacity_;
  Clock& clock_;
  IdSource& ids_;
  std::map<std::string, Session> sessions_;
  std::vector<std::string> order_;
};

}  // namespace dataclaw
