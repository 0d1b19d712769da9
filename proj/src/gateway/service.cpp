#include "dataclaw/gateway/service.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/engine/prompt.hpp"
#include "dataclaw/persist/transcript.hpp"
#include "dataclaw/skills/skill_tool.hpp"
#include "dataclaw/tools/builtins.hpp"

namespace dataclaw::gateway {

namespace {

constexpr std::size_t kLogLines = 200;

std::filesystem::path channels_file(const WorkspaceLayout& ws) { return ws.root / "channels.json"; }

std::map<std::string, ChannelConfig> default_channels() {
  std::map<std::string, ChannelConfig> out;
  out["console"] = ChannelConfig{"console", ChannelKind::console, std::nullopt, "", true};
  out["loopback"] = ChannelConfig{"loopback", ChannelKind::loopback, std::nullopt, "", true};
  return out;
}

std::map<std::string, ChannelConfig> load_channels(const WorkspaceLayout& ws) {
  const auto path = channels_file(ws);
  if (!std::filesystem::exists(path)) return default_channels();
  Json j;
  try {
    j = Json::parse(read_file(path.string()));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, fmt::format("{}: expected a list of channels", path.string()));
  std::map<std::string, ChannelConfig> out;
  for (const auto& item : j) {
    auto c = channel_from_json(item);
    out[c.channel_id] = c;
  }
  return out;
}

}  // namespace

std::string_view to_string(IngestOutcome::Status status) {
  switch (status) {
    case IngestOutcome::Status::accepted: return "accepted";
    case IngestOutcome::Status::unknown_channel: return "unknown_channel";
    case IngestOutcome::Status::disabled: return "disabled";
    case IngestOutcome::Status::unauthorized: return "unauthorized";
    case IngestOutcome::Status::malformed: return "malformed";
    case IngestOutcome::Status::busy: return "busy";
    case IngestOutcome::Status::over_capacity: return "over_capacity";
  }
  return "accepted";
}

BackendFactory backend_factory_from(const BackendSettings& settings, const WorkspaceLayout& workspace) {
  if (settings.kind == "remote") {
    BackendDescriptor d;
    d.kind = BackendKind::remote_chat_api;
    d.endpoint = settings.endpoint;
    d.model_name = settings.model;
    std::shared_ptr<Backend> shared = make_backend(d);
    return [shared](const std::string&) { return shared; };
  }
  std::vector<std::string> script;
  if (!settings.script.empty()) {
    std::filesystem::path p(settings.script);
    if (p.is_relative()) p = workspace.root / p;
    script = load_script(p.string());
  }
  return [script](const std::string&) { return std::make_shared<ScriptedBackend>(script); };
}

Json to_json(const SessionView& v) {
  Json j;
  j["id"] = v.session.id;
  j["channel_id"] = v.session.channel_id;
  j["chat_id"] = v.chat_id;
  j["status"] = to_string(v.session.status);
  j["created_at"] = v.session.created_at;
  j["turn_count"] = v.session.turn_count;
  j["compaction_count"] = v.compaction_count;
  j["token_estimate"] = v.token_estimate;
  j["last_seq"] = v.last_seq;
  j["active_skills"] = v.active_skills;
  j["last_outcome"] = v.last_outcome ? *v.last_outcome : Json();
  return j;
}

AgentService::AgentService(WorkspaceLayout workspace, WorkspaceConfig config, ServiceOptions options)
    : workspace_(std::move(workspace)),
      clock_(options.clock ? *options.clock : system_clock()),
      ids_(options.ids ? *options.ids : random_ids()),
      backend_factory_(options.backend_factory),
      config_(std::move(config)),
      table_(config_.agent.max_concurrent_sessions, clock_, ids_),
      artifacts_(workspace_, clock_, ids_),
      global_(workspace_),
      catalog_(workspace_.skills_dir()),
      deliverer_(artifacts_, clock_, options.retry, options.sleeper) {
  config_.agent.validate();
  if (!backend_factory_) backend_factory_ = backend_factory_from(config_.backend, workspace_);
  tools::register_builtin_tools(registry_);
  channels_ = load_channels(workspace_);
  refresh_skills();
}

AgentService::~AgentService() {
  {
    std::lock_guard lock(states_mu_);
    for (auto& [_, st] : states_) st->cancel = true;
  }
  std::lock_guard lock(workers_mu_);
  for (auto& w : workers_) {
    if (w.thread.joinable()) w.thread.join();
  }
}

void AgentService::note(const std::string& line) {
  spdlog::info("{}", line);
  std::lock_guard lock(log_mu_);
  log_.push_back(fmt::format("{} {}", clock_.now_iso(), line));
  while (log_.size() > kLogLines) log_.pop_front();
}

std::vector<std::string> AgentService::log_tail(std::size_t n) const {
  std::lock_guard lock(log_mu_);
  const auto start = log_.size() > n ? log_.size() - n : 0;
  return {log_.begin() + static_cast<std::ptrdiff_t>(start), log_.end()};
}

void AgentService::refresh_skills() {
  std::lock_guard lock(skills_mu_);
  const auto report = catalog_.scan();
  for (const auto& e : report.errors) note(fmt::format("skill {} skipped: {}", e.dir, e.message));
  if (skills_loaded_ && report.version == skill_version_applied_) return;
  const auto snap = catalog_.snapshot();
  registry_.replace_skill_tools(skill_tools(*snap, workspace_.root));
  skill_version_applied_ = report.version;
  if (skills_loaded_ || !snap->skills.empty()) {
    note(fmt::format("skill set v{}: {} skills (registered [{}], removed [{}])", report.version, snap->skills.size(),
                     fmt::join(report.registered, ", "), fmt::join(report.removed, ", ")));
  }
  skills_loaded_ = true;
}

ScanReport AgentService::rescan_skills() {
  std::lock_guard lock(skills_mu_);
  const auto report = catalog_.scan();
  for (const auto& e : report.errors) note(fmt::format("skill {} skipped: {}", e.dir, e.message));
  if (report.version != skill_version_applied_) {
    registry_.replace_skill_tools(skill_tools(*catalog_.snapshot(), workspace_.root));
    skill_version_applied_ = report.version;
    note(fmt::format("skill set v{} after rescan (registered [{}], removed [{}])", report.version,
                     fmt::join(report.registered, ", "), fmt::join(report.removed, ", ")));
  }
  return report;
}

std::shared_ptr<const SkillSet> AgentService::skills() const { return catalog_.snapshot(); }

std::vector<tools::ToolSpec> AgentService::tool_specs() const { return registry_.list(); }

std::shared_ptr<AgentService::SessionState> AgentService::state_for(const Session& session, const std::string& chat_id) {
  std::lock_guard lock(states_mu_);
  if (auto it = states_.find(session.id); it != states_.end()) return it->second;
  auto st = std::make_shared<SessionState>(session.id);
  st->channel_id = session.channel_id;
  st->chat_id = chat_id.empty() ? session.id : chat_id;
  st->ctx.session_id = session.id;
  st->ctx.workspace = &workspace_;
  st->ctx.datasets = &st->datasets;
  st->ctx.artifacts = &artifacts_;
  st->ctx.memory = &global_;
  st->backend = backend_factory_(session.id);
  states_.emplace(session.id, st);
  return st;
}

std::shared_ptr<AgentService::SessionState> AgentService::find_state(const std::string& id) const {
  std::lock_guard lock(states_mu_);
  auto it = states_.find(id);
  return it == states_.end() ? nullptr : it->second;
}

Session AgentService::create_session(const std::string& channel_id) {
  if (!channel(channel_id)) throw Error(ErrorCode::NotFound, fmt::format("unknown channel '{}'", channel_id));
  auto s = table_.new_session(channel_id);
  try {
    state_for(s, "");
  } catch (...) {
    table_.close(s.id);
    throw;
  }
  bus_.open_session(s.id);
  note(fmt::format("session {} opened on channel {}", s.id, channel_id));
  return s;
}

Session AgentService::chat_session(const std::string& channel_id, const std::string& chat_id) {
  if (!channel(channel_id)) throw Error(ErrorCode::NotFound, fmt::format("unknown channel '{}'", channel_id));
  const auto id = chat_session_id(channel_id, chat_id);
  const bool known = table_.find(id).has_value();
  auto s = table_.open_session(id, channel_id);
  if (!known) {
    // Continue the seq numbering of an earlier run's transcript.
    const auto transcript = workspace_.transcript_path(id);
    if (!bus_.has_session(id) && std::filesystem::exists(transcript)) {
      bus_.restore(id, read_transcript(transcript));
    }
    bus_.open_session(id);
    note(fmt::format("session {} opened for chat {} on channel {}", id, chat_id, channel_id));
  }
  state_for(s, chat_id);
  return s;
}

std::vector<SessionView> AgentService::sessions() const {
  std::vector<SessionView> out;
  for (const auto& s : table_.list()) {
    if (auto v = session(s.id)) out.push_back(*v);
  }
  return out;
}

std::optional<SessionView> AgentService::session(const std::string& id) const {
  auto s = table_.find(id);
  if (!s) return std::nullopt;
  SessionView v;
  v.session = *s;
  v.last_seq = bus_.has_session(id) ? bus_.last_seq(id) : 0;
  if (auto st = find_state(id)) {
    v.chat_id = st->chat_id;
    v.compaction_count = st->compaction_count;
    v.token_estimate = st->token_estimate;
    std::lock_guard lock(st->mu);
    v.active_skills = st->active_skills;
    if (st->last_trace) {
      v.last_outcome = st->last_trace->final ? Json{{"final", st->last_trace->final_text}}
                                             : Json{{"aborted", st->last_trace->abort_reason}};
    }
  }
  return v;
}

void AgentService::close_session(const std::string& id) {
  table_.close(id);
  note(fmt::format("session {} closed", id));
}

ChatMessage AgentService::begin(SessionState& st, const std::string& text, std::vector<std::string> attachments) {
  if (text.empty()) throw Error(ErrorCode::Precondition, "message text is empty");
  table_.begin_turn(st.id);
  {
    std::lock_guard lock(st.mu);
    st.running = true;
  }
  st.cancel = false;
  ChatMessage m;
  m.id = ids_.next();
  m.session_id = st.id;
  m.channel_id = st.channel_id;
  m.role = Role::user;
  m.text = text;
  m.attachments = std::move(attachments);
  m.timestamp = clock_.now_iso();
  return m;
}

TurnTrace AgentService::execute(SessionState& st, const ChatMessage& message) {
  TurnTrace trace;
  try {
    refresh_skills();
    const auto cfg = config();
    const auto snap = catalog_.snapshot();
    PromptInputs prompt;
    prompt.preamble = agent_preamble(registry_.list());
    std::tie(prompt.instructions, prompt.persona) = global_.load_global_blocks();
    prompt.skills = match_active_skills(message.text, *snap);
    {
      std::lock_guard lock(st.mu);
      st.active_skills.clear();
      for (const auto& s : prompt.skills) st.active_skills.push_back(s->name);
    }
    note(fmt::format("session {} turn started (skills v{}: [{}])", st.id, snap->version,
                     fmt::join(st.active_skills, ", ")));

    EventEmitter emitter(st.id, bus_.last_seq(st.id) + 1, clock_, [this](const AgentEvent& e) {
      try {
        log_event(workspace_, e);
      } catch (const Error& err) {
        note(fmt::format("session {}: transcript write failed: {}", e.session_id, err.what()));
      }
      bus_.emit(e);
    });
    TurnDeps deps{*st.backend, registry_, st.ctx, st.memory, cfg.agent, prompt, emitter, clock_, ids_, {}};
    deps.global_memory = &global_;
    deps.cancel = &st.cancel;
    trace = run_turn(message, deps);
    st.compaction_count = st.memory.compaction_count();
    st.token_estimate = st.memory.token_estimate();
    note(fmt::format("session {} turn {} after {} iterations", st.id,
                     trace.final ? "finished" : "aborted (" + trace.abort_reason + ")", trace.iterations));

    if (auto ch = channel(st.channel_id)) {
      OutboundMessage out;
      out.channel_id = st.channel_id;
      out.chat_id = st.chat_id;
      out.text = trace.final ? trace.final_text : fmt::format("Sorry, the turn was aborted ({}).", trace.abort_reason);
      for (std::size_t i = 0; i < trace.artifacts.size() && i < kMaxAttachments; ++i) {
        out.attachments.push_back(trace.artifacts[i]);
      }
      const auto record = deliverer_.deliver(*ch, out);
      if (!record.ok) note(fmt::format("session {}: {}", st.id, record.error));
    }
  } catch (const std::exception& e) {
    note(fmt::format("session {} turn failed: {}", st.id, e.what()));
    trace.session_id = st.id;
    trace.abort_reason = "backend_failure";
  }
  {
    std::lock_guard lock(st.mu);
    st.last_trace = trace;
  }
  table_.end_turn(st.id);
  {
    std::lock_guard lock(st.mu);
    st.running = false;
  }
  st.idle_cv.notify_all();
  return trace;
}

void AgentService::reap_workers() {
  std::lock_guard lock(workers_mu_);
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (*it->finished) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

TurnHandle AgentService::submit(const std::string& session_id, const std::string& text,
                                std::vector<std::string> attachments) {
  auto st = find_state(session_id);
  if (!st) throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", session_id));
  auto message = begin(*st, text, std::move(attachments));
  reap_workers();
  auto finished = std::make_shared<std::atomic<bool>>(false);
  std::lock_guard lock(workers_mu_);
  workers_.push_back({std::thread([this, st, message, finished] {
                        execute(*st, message);
                        *finished = true;
                      }),
                      finished});
  return {session_id, message.id};
}

TurnTrace AgentService::run(const std::string& session_id, const std::string& text) {
  auto st = find_state(session_id);
  if (!st) throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", session_id));
  auto message = begin(*st, text, {});
  return execute(*st, message);
}

bool AgentService::wait_idle(const std::string& session_id, std::chrono::milliseconds timeout) {
  auto st = find_state(session_id);
  if (!st) return true;
  std::unique_lock lock(st->mu);
  return st->idle_cv.wait_for(lock, timeout, [&] { return !st->running; });
}

void AgentService::wait_all() {
  std::vector<std::shared_ptr<SessionState>> all;
  {
    std::lock_guard lock(states_mu_);
    for (const auto& [_, st] : states_) all.push_back(st);
  }
  for (const auto& st : all) {
    std::unique_lock lock(st->mu);
    st->idle_cv.wait(lock, [&] { return !st->running; });
  }
  reap_workers();
}

bool AgentService::cancel(const std::string& session_id) {
  auto st = find_state(session_id);
  if (!st) throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", session_id));
  std::lock_guard lock(st->mu);
  if (!st->running) return false;
  st->cancel = true;
  note(fmt::format("session {} cancel requested", session_id));
  return true;
}

std::optional<TurnTrace> AgentService::last_trace(const std::string& session_id) const {
  auto st = find_state(session_id);
  if (!st) return std::nullopt;
  std::lock_guard lock(st->mu);
  return st->last_trace;
}

IngestOutcome AgentService::ingest_webhook(const std::string& channel_id, std::string_view body,
                                           const std::optional<std::string>& secret) {
  using Status = IngestOutcome::Status;
  IngestOutcome out;
  const auto ch = channel(channel_id);
  if (!ch) return {Status::unknown_channel, "", "", fmt::format("unknown channel '{}'", channel_id)};
  if (!ch->enabled) return {Status::disabled, "", "", fmt::format("channel '{}' is disabled", channel_id)};
  if (ch->inbound_secret && secret != ch->inbound_secret) {
    return {Status::unauthorized, "", "", "secret token does not match"};
  }
  InboundUpdate update;
  try {
    update = parse_webhook_update(body);
  } catch (const Error& e) {
    return {Status::malformed, "", "", e.what()};
  }
  Session s;
  try {
    s = chat_session(channel_id, update.chat_id);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CapacityExceeded) return {Status::over_capacity, "", "", e.what()};
    throw;
  }
  try {
    auto handle = submit(s.id, update.text, update.attachments);
    return {Status::accepted, s.id, handle.message_id, ""};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TurnInFlight || e.code() == ErrorCode::SessionClosed) {
      return {Status::busy, s.id, "", e.what()};
    }
    throw;
  }
}

std::vector<ChannelConfig> AgentService::channels() const {
  std::lock_guard lock(channels_mu_);
  std::vector<ChannelConfig> out;
  for (const auto& [_, c] : channels_) out.push_back(c);
  return out;
}

std::optional<ChannelConfig> AgentService::channel(const std::string& id) const {
  std::lock_guard lock(channels_mu_);
  auto it = channels_.find(id);
  if (it == channels_.end()) return std::nullopt;
  return it->second;
}

void AgentService::persist_channels() const {
  Json j = Json::array();
  for (const auto& [_, c] : channels_) j.push_back(to_json(c));
  write_file_atomic(channels_file(workspace_), j.dump(2) + "\n");
}

void AgentService::put_channel(const ChannelConfig& c) {
  const auto validated = channel_from_json(to_json(c));
  std::lock_guard lock(channels_mu_);
  channels_[validated.channel_id] = validated;
  persist_channels();
  note(fmt::format("channel {} saved ({}, {})", c.channel_id, to_string(c.kind), c.enabled ? "enabled" : "disabled"));
}

bool AgentService::remove_channel(const std::string& id) {
  std::lock_guard lock(channels_mu_);
  if (channels_.erase(id) == 0) return false;
  persist_channels();
  note(fmt::format("channel {} removed", id));
  return true;
}

std::vector<DeliveryRecord> AgentService::outbox(const std::string& channel_id) const {
  return deliverer_.outbox(channel_id);
}

WorkspaceConfig AgentService::config() const {
  std::lock_guard lock(config_mu_);
  return config_;
}

AgentConfig AgentService::update_config(const Json& patch) {
  std::lock_guard lock(config_mu_);
  auto next = config_;
  next.agent = merge_config(config_.agent, patch);
  write_file_atomic(workspace_.config_file(), serialize_config(next));
  config_ = next;
  table_.set_capacity(next.agent.max_concurrent_sessions);
  note(fmt::format("config updated: {}", patch.dump()));
  return next.agent;
}

Json AgentService::status() const {
  Json j;
  j["active_sessions"] = table_.active_count();
  j["running"] = table_.running_count();
  j["capacity"] = table_.capacity();
  Json sessions = Json::array();
  for (const auto& v : this->sessions()) sessions.push_back(to_json(v));
  j["sessions"] = std::move(sessions);
  const auto snap = catalog_.snapshot();
  j["skills"] = {{"version", snap->version}, {"count", snap->skills.size()}};
  Json failures = Json::array();
  for (const auto& f : deliverer_.failures()) failures.push_back(to_json(f));
  j["delivery_failures"] = std::move(failures);
  j["log_tail"] = log_tail();
  return j;
}

}  // namespace dataclaw::gateway
