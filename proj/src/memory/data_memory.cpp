#include "dataclaw/memory/data_memory.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/preamble.hpp"
#include "dataclaw/llm/tokens.hpp"

namespace dataclaw {

void DataMemory::append(ChatMessage message) {
  token_estimate_ += estimate_tokens(message.text);
  entries_.push_back(std::move(message));
}

std::int64_t DataMemory::recount() const {
  std::int64_t total = 0;
  for (const auto& e : entries_) total += estimate_tokens(e.text);
  return total;
}

struct CompactionAccess {
  static void replace(DataMemory& m, std::vector<ChatMessage> entries, std::int64_t tokens) {
    m.entries_ = std::move(entries);
    m.token_estimate_ = tokens;
    ++m.compaction_count_;
  }
};

std::optional<CompactionRecord> maybe_compact(DataMemory& memory, const AgentConfig& config,
                                              const Summarizer& summarizer, Clock& clock) {
  const double limit = config.compaction_limit();
  const auto before = memory.token_estimate();
  if (static_cast<double>(before) <= limit) return std::nullopt;

  const auto& entries = memory.entries();
  const std::size_t keep = std::min<std::size_t>(config.keep_recent_messages, entries.size());
  const std::size_t older_count = entries.size() - keep;
  std::int64_t recent_tokens = 0;
  for (std::size_t i = older_count; i < entries.size(); ++i) recent_tokens += estimate_tokens(entries[i].text);

  if (older_count == 0) {
    throw Error(ErrorCode::CompactionInsufficient,
                fmt::format("the {} most recent messages alone need {} tokens, over the limit of {}",
                            keep, recent_tokens, std::floor(limit)));
  }

  const auto limit_tokens = static_cast<std::int64_t>(std::floor(limit));
  const auto budget = std::max<std::int64_t>(limit_tokens - recent_tokens - kCompactionReserveTokens, 0);
  const std::span<const ChatMessage> older(entries.data(), older_count);
  const auto summary = budget > 0 ? summarizer(older, budget) : std::string();

  ChatMessage compacted;
  compacted.id = derived_id(fmt::format("{}:compaction:{}", memory.session_id(), memory.compaction_count() + 1));
  compacted.session_id = memory.session_id();
  compacted.channel_id = entries.front().channel_id;
  compacted.role = Role::system;
  compacted.text = std::string(kCompactedPrefix) + summary;
  compacted.timestamp = clock.now_iso();
  compacted.compacted = true;

  const auto after = estimate_tokens(compacted.text) + recent_tokens;
  if (static_cast<double>(after) > limit) {
    throw Error(ErrorCode::CompactionInsufficient,
                fmt::format("compacted memory still needs {} tokens, over the limit of {}", after,
                            limit_tokens));
  }

  CompactionRecord record;
  record.fired_at = compacted.timestamp;
  record.messages_compacted = static_cast<std::int64_t>(older_count);
  record.tokens_before = before;
  record.tokens_after = after;
  record.summary_text = summary;

  std::vector<ChatMessage> next;
  next.reserve(keep + 1);
  next.push_back(std::move(compacted));
  next.insert(next.end(), entries.begin() + static_cast<std::ptrdiff_t>(older_count), entries.end());
  CompactionAccess::replace(memory, std::move(next), after);
  return record;
}

}  // namespace dataclaw
