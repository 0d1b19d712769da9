#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataclaw/core/clock.hpp"
#include "dataclaw/core/config.hpp"
#include "dataclaw/core/types.hpp"

namespace dataclaw {

/// Rolling per-session context. The cached token estimate always equals the
/// sum of estimate_tokens over entry texts.
class DataMemory {
 public:
  explicit DataMemory(std::string session_id) : session_id_(std::move(session_id)) {}

  void append(ChatMessage message);

  const std::string& session_id() const { return session_id_; }
  const std::vector<ChatMessage>& entries() const { return entries_; }
  std::int64_t token_estimate() const { return token_estimate_; }
  std::uint64_t compaction_count() const { return compaction_count_; }

  std::int64_t recount() const;

 private:
  friend struct CompactionAccess;

  std::string session_id_;
  std::vector<ChatMessage> entries_;
  std::int64_t token_estimate_ = 0;
  std::uint64_t compaction_count_ = 0;
};

struct CompactionRecord {
  std::string fired_at;
  std::int64_t messages_compacted = 0;
  std::int64_t tokens_before = 0;
  std::int64_t tokens_after = 0;
  std::string summary_text;
};

inline constexpr std::string_view kCompactedPrefix = "[compacted memory] ";

using Summarizer = std::function<std::string(std::span<const ChatMessage>, std::int64_t budget_tokens)>;

/// Fires when the estimate strictly exceeds threshold * window. Keeps the
/// last keep_recent_messages entries verbatim and folds everything older
/// (including an earlier summary) into one system entry. Throws
/// CompactionInsufficient, leaving memory untouched, when the result would
/// still be over the limit.
std::optional<CompactionRecord> maybe_compact(DataMemory& memory, const AgentConfig& config,
                                              const Summarizer& summarizer, Clock& clock = system_clock());

}  // namespace dataclaw
