#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dataclaw/core/clock.hpp"
#include "dataclaw/core/config.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/session_table.hpp"
#include "dataclaw/engine/turn.hpp"
#include "dataclaw/gateway/channel.hpp"
#include "dataclaw/gateway/delivery.hpp"
#include "dataclaw/llm/backend.hpp"
#include "dataclaw/memory/data_memory.hpp"
#include "dataclaw/memory/global_memory.hpp"
#include "dataclaw/persist/artifact_store.hpp"
#include "dataclaw/persist/workspace.hpp"
#include "dataclaw/skills/catalog.hpp"
#include "dataclaw/stream/event_bus.hpp"
#include "dataclaw/tools/dataset.hpp"
#include "dataclaw/tools/registry.hpp"

namespace dataclaw::gateway {

// Called once per session; the backend then serves all of its turns.
using BackendFactory = std::function<std::shared_ptr<Backend>(const std::string& session_id)>;

/// Builds backends from the workspace settings: every session of a scripted
/// workspace replays the script from its start; remote sessions share one
/// client. A relative script path is taken relative to the workspace root.
BackendFactory backend_factory_from(const BackendSettings& settings, const WorkspaceLayout& workspace);

struct ServiceOptions {
  Clock* clock = nullptr;    // system clock when null
  IdSource* ids = nullptr;   // random ids when null
  BackendFactory backend_factory;  // from the config when empty
  RetryPolicy retry;
  Sleeper sleeper;
};

struct SessionView {
  Session session;
  std::string chat_id;
  std::uint64_t compaction_count = 0;
  std::int64_t token_estimate = 0;
  std::int64_t last_seq = 0;
  std::vector<std::string> active_skills;  // matched on the latest turn
  std::optional<Json> last_outcome;
};

Json to_json(const SessionView& view);

struct TurnHandle {
  std::string session_id;
  std::string message_id;
};

struct IngestOutcome {
  enum class Status { accepted, unknown_channel, disabled, unauthorized, malformed, busy, over_capacity };
  Status status = Status::accepted;
  std::string session_id;
  std::string message_id;
  std::string message;
};

/// The running agent: sessions, turn executors, channels, skills, memory
/// and the event bus, shared by the HTTP layer and the CLI.
class AgentService {
 public:
  AgentService(WorkspaceLayout workspace, WorkspaceConfig config, ServiceOptions options = {});
  ~AgentService();

  AgentService(const AgentService&) = delete;
  AgentService& operator=(const AgentService&) = delete;

  // Sessions. CapacityExceeded past max_concurrent_sessions; NotFound for
  // an unknown channel.
  Session create_session(const std::string& channel_id);
  Session chat_session(const std::string& channel_id, const std::string& chat_id);
  std::vector<SessionView> sessions() const;
  std::optional<SessionView> session(const std::string& id) const;
  void close_session(const std::string& id);

  // Starts a turn on its own executor. TurnInFlight, SessionClosed or
  // UnknownSession when the session cannot take it.
  TurnHandle submit(const std::string& session_id, const std::string& text,
                    std::vector<std::string> attachments = {});
  // Runs a turn on the calling thread.
  TurnTrace run(const std::string& session_id, const std::string& text);
  bool wait_idle(const std::string& session_id, std::chrono::milliseconds timeout);
  void wait_all();
  // False when the session has no turn in flight.
  bool cancel(const std::string& session_id);
  std::optional<TurnTrace> last_trace(const std::string& session_id) const;

  IngestOutcome ingest_webhook(const std::string& channel_id, std::string_view body,
                               const std::optional<std::string>& secret);

  // Channels. put_channel inserts or replaces; changes persist to
  // channels.json in the workspace.
  std::vector<ChannelConfig> channels() const;
  std::optional<ChannelConfig> channel(const std::string& id) const;
  void put_channel(const ChannelConfig& channel);
  bool remove_channel(const std::string& id);
  std::vector<DeliveryRecord> outbox(const std::string& channel_id) const;

  WorkspaceConfig config() const;
  // Merges, validates, persists; applies from the next turn.
  AgentConfig update_config(const Json& patch);

  ScanReport rescan_skills();
  std::shared_ptr<const SkillSet> skills() const;
  std::vector<tools::ToolSpec> tool_specs() const;

  Json status() const;
  std::vector<std::string> log_tail(std::size_t n = 50) const;

  EventBus& bus() { return bus_; }
  GlobalMemory& global_memory() { return global_; }
  ArtifactStore& artifacts() { return artifacts_; }
  const WorkspaceLayout& workspace() const { return workspace_; }

 private:
  struct SessionState {
    std::string id;
    std::string channel_id;
    std::string chat_id;
    DataMemory memory;
    tools::DatasetStore datasets;
    tools::ToolContext ctx;
    std::shared_ptr<Backend> backend;
    std::atomic<bool> cancel{false};
    std::atomic<std::uint64_t> compaction_count{0};
    std::atomic<std::int64_t> token_estimate{0};
    mutable std::mutex mu;
    std::condition_variable idle_cv;
    bool running = false;
    std::vector<std::string> active_skills;
    std::optional<TurnTrace> last_trace;

    explicit SessionState(std::string session_id) : id(session_id), memory(std::move(session_id)) {}
  };

  std::shared_ptr<SessionState> state_for(const Session& session, const std::string& chat_id);
  std::shared_ptr<SessionState> find_state(const std::string& id) const;
  ChatMessage begin(SessionState& st, const std::string& text, std::vector<std::string> attachments);
  TurnTrace execute(SessionState& st, const ChatMessage& message);
  void refresh_skills();
  void persist_channels() const;
  void note(const std::string& line);
  void reap_workers();

  WorkspaceLayout workspace_;
  Clock& clock_;
  IdSource& ids_;
  BackendFactory backend_factory_;

  mutable std::mutex config_mu_;
  WorkspaceConfig config_;

  SessionTable table_;
  EventBus bus_;
  ArtifactStore artifacts_;
  GlobalMemory global_;
  SkillCatalog catalog_;
  tools::ToolRegistry registry_;
  Deliverer deliverer_;

  std::mutex skills_mu_;
  std::uint64_t skill_version_applied_ = 0;
  bool skills_loaded_ = false;

  mutable std::mutex channels_mu_;
  std::map<std::string, ChannelConfig> channels_;

  mutable std::mutex states_mu_;
  std::map<std::string, std::shared_ptr<SessionState>> states_;

  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> finished;
  };
  std::mutex workers_mu_;
  std::vector<Worker> workers_;

  mutable std::mutex log_mu_;
  std::deque<std::string> log_;
};

std::string_view to_string(IngestOutcome::Status status);

}  // namespace dataclaw::gateway
