#include "dataclaw/core/session_table.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"

namespace dataclaw {

Session SessionTable::create_locked(const std::string& id, const std::string& channel_id) {
  const auto active = static_cast<std::size_t>(
      std::count_if(sessions_.begin(), sessions_.end(),
                    [](const auto& kv) { return kv.second.status != SessionStatus::closed; }));
  if (active >= capacity_) {
    throw Error(ErrorCode::CapacityExceeded,
                fmt::format("session capacity of {} reached", capacity_));
  }
  Session s;
  s.id = id;
  s.channel_id = channel_id;
  s.status = SessionStatus::idle;
  s.created_at = clock_.now_iso();
  sessions_.emplace(id, s);
  order_.push_back(id);
  return s;
}

Session SessionTable::new_session(const std::string& channel_id) {
  std::lock_guard lock(mu_);
  std::string id = ids_.next();
  while (sessions_.count(id)) id = ids_.next();
  return create_locked(id, channel_id);
}

Session SessionTable::open_session(const std::string& id, const std::string& channel_id) {
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  return create_locked(id, channel_id);
}

std::optional<Session> SessionTable::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  return std::nullopt;
}

std::vector<Session> SessionTable::list() const {
  std::lock_guard lock(mu_);
  std::vector<Session> out;
  out.reserve(order_.size());
  for (const auto& id : order_) out.push_back(sessions_.at(id));
  return out;
}

Session SessionTable::begin_turn(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session " + id);
  auto& s = it->second;
  if (s.status == SessionStatus::closed) throw Error(ErrorCode::SessionClosed, "session " + id + " is closed");
  if (s.status == SessionStatus::running) {
    throw Error(ErrorCode::TurnInFlight, "session " + id + " already has a turn in flight");
  }
  s.status = SessionStatus::running;
  ++s.turn_count;
  return s;
}

void SessionTable::end_turn(const std::string& id) {
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end() && it->second.status == SessionStatus::running) {
    it->second.status = SessionStatus::idle;
  }
}

void SessionTable::close(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session " + id);
  if (it->second.status == SessionStatus::running) {
    throw Error(ErrorCode::TurnInFlight, "session " + id + " has a turn in flight");
  }
  it->second.status = SessionStatus::closed;
}

std::size_t SessionTable::active_count() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(sessions_.begin(), sessions_.end(),
                    [](const auto& kv) { return kv.second.status != SessionStatus::closed; }));
}

std::size_t SessionTable::running_count() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(sessions_.begin(), sessions_.end(),
                    [](const auto& kv) { return kv.second.status == SessionStatus::running; }));
}

std::size_t SessionTable::capacity() const {
  std::lock_guard lock(mu_);
  return capacity_;
}

void SessionTable::set_capacity(std::size_t capacity) {
  std::lock_guard lock(mu_);
  capacity_ = capacity;
}

}  // namespace dataclaw
