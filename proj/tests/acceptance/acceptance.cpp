// Runs the eight primary acceptance criteria and prints one PASS/FAIL line
// per criterion. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <functional>
#include <iostream>
#include <regex>
#include <set>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "scenario.hpp"
#include "test_support.hpp"

#include "dataclaw/core/error.hpp"
#include "dataclaw/gateway/http_server.hpp"
#include "dataclaw/gateway/service.hpp"
#include "dataclaw/llm/backend.hpp"
#include "dataclaw/memory/data_memory.hpp"
#include "dataclaw/memory/global_memory.hpp"
#include "dataclaw/persist/transcript.hpp"
#include "dataclaw/stream/sse.hpp"
#include "dataclaw/tools/query.hpp"
#include "dataclaw/tools/stats.hpp"

using namespace dataclaw;
using namespace std::chrono_literals;
using dataclaw::testing::read_text;
using dataclaw::testing::TempDir;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr auto kScenarioBudget = 1000ms;
constexpr auto kConcurrencyBudget = 10000ms;
constexpr double kAggregateRelTol = 1e-9;
constexpr double kTipPctAbsTol = 1e-9;
constexpr int kQueryPairs = 500;
constexpr int kIqrColumns = 100;
constexpr std::uint32_t kIterationCap = 50;

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

char letter(EventKind k) {
  switch (k) {
    case EventKind::session_start: return 'S';
    case EventKind::thinking: return 'T';
    case EventKind::tool_call: return 'C';
    case EventKind::tool_result: return 'R';
    case EventKind::message: return 'M';
    case EventKind::artifact: return 'A';
    case EventKind::error: return 'E';
    case EventKind::done: return 'D';
  }
  return '?';
}

std::string kinds(const std::vector<AgentEvent>& events) {
  std::string s;
  for (const auto& e : events) s += letter(e.kind);
  return s;
}

std::string str(const AgentEvent& e, const char* key) {
  auto it = e.payload.find(key);
  return it != e.payload.end() && it->is_string() ? it->get<std::string>() : "";
}

gateway::ServiceOptions options_with(gateway::BackendFactory factory) {
  gateway::ServiceOptions o;
  o.backend_factory = std::move(factory);
  o.sleeper = [](std::chrono::milliseconds) {};
  return o;
}

gateway::BackendFactory scripted(std::vector<std::string> script) {
  return [script](const std::string&) { return std::make_shared<ScriptedBackend>(script); };
}

// Planted row check: the largest tip/fare ratio above 2500%, computed by
// splitting the fixture lines directly.
double fixture_max_tip_pct() {
  const auto text = read_text(dataclaw::testing::data_path("taxi_trips.csv"));
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  const auto fare_i = std::find(header.begin(), header.end(), "fare_amount") - header.begin();
  const auto tip_i = std::find(header.begin(), header.end(), "tip_amount") - header.begin();
  double best = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<std::ptrdiff_t>(cells.size()) <= std::max(fare_i, tip_i)) continue;
    if (cells[fare_i].empty() || cells[tip_i].empty()) continue;
    const double pct = std::stod(cells[tip_i]) / std::stod(cells[fare_i]) * 100;
    best = std::max(best, pct);
  }
  return best;
}

std::string criterion1() {
  TempDir dir;
  const auto ws = dataclaw::testing::taxi_workspace(dir.path());
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = dataclaw::testing::run_scenario1(ws);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

  require(run.trace.final, "turn did not reach FINAL: " + run.trace.abort_reason);
  require(run.trace.iterations <= 50, "more than 50 iterations");
  const auto k = kinds(run.events);
  require(std::regex_match(k, std::regex("S(TCR)*T?(MD|E)")), "grammar violated: " + k);
  require(k == "STCRTCRTCRTCRTCRTMD", "unexpected event sequence " + k);

  std::vector<std::string> tools;
  for (const auto& e : run.events) {
    if (e.kind == EventKind::tool_call) tools.push_back(str(e, "tool"));
  }
  require(tools == std::vector<std::string>{"data_load", "data_describe", "data_query", "chart_render",
                                            "report_generate"},
          "tool order differs");

  const auto& query_result = run.events[9].payload;
  const auto result = Json::parse(query_result["observation"].get<std::string>());
  require(result["row_count"] == 1, "tip_pct filter did not isolate one row");
  const double got = result["rows"][0][3].get<double>();
  const double want = fixture_max_tip_pct();
  require(std::abs(got - want) <= kTipPctAbsTol, fmt::format("tip_pct {} != oracle {}", got, want));

  const auto svg = ws.session_artifacts_dir(run.session_id) / "chart.svg";
  const auto html = ws.session_artifacts_dir(run.session_id) / "report.html";
  require(fs::exists(svg) && fs::exists(html), "artifacts missing on disk");
  const auto svg_text = read_text(svg);
  require(svg_text.rfind("<svg", 0) == 0, "chart is not an SVG document");
  require(read_text(html).find(svg_text) != std::string::npos, "report does not embed the chart");
  require(elapsed < kScenarioBudget, fmt::format("took {} ms", elapsed.count()));
  return fmt::format("{} events, tip_pct {}, {} ms", run.events.size(), got, elapsed.count());
}

std::string criterion2() {
  AgentConfig config;
  config.context_window_tokens = 1000;
  config.compaction_threshold = 0.8;
  require(config.keep_recent_messages == 6, "default keep_recent_messages is not 6");
  const Summarizer summarizer = [](std::span<const ChatMessage> m, std::int64_t budget) {
    return deterministic_summary(m, budget);
  };

  DataMemory memory("c2");
  std::mt19937 rng(2);
  std::int64_t expected = 0;  // ceil(chars / 4) per message
  int fired_at = -1;
  for (int i = 0; i < 200 && fired_at < 0; ++i) {
    ChatMessage m;
    m.role = i % 2 ? Role::agent : Role::user;
    m.text = fmt::format("msg{:03d} ", i) + std::string(20 + rng() % 180, static_cast<char>('a' + i % 26));
    expected += static_cast<std::int64_t>((m.text.size() + 3) / 4);
    memory.append(m);
    require(memory.token_estimate() == expected, "estimator disagrees with ceil(chars/4)");
    const auto tail = std::vector<ChatMessage>(memory.entries().end() - std::min<std::ptrdiff_t>(6, memory.entries().size()),
                                               memory.entries().end());
    const auto rec = maybe_compact(memory, config, summarizer);
    if (expected <= 800) {
      require(!rec, fmt::format("fired early at {} tokens", expected));
      continue;
    }
    require(rec.has_value(), fmt::format("did not fire at {} tokens", expected));
    fired_at = i;
    require(memory.compaction_count() == 1, "compaction count is not 1");
    require(rec->tokens_before == expected, "tokens_before differs");
    require(memory.token_estimate() <= 800, fmt::format("post-compaction estimate {}", memory.token_estimate()));
    require(memory.token_estimate() == memory.recount(), "estimate cache out of sync");
    require(memory.entries().size() == 7, "expected summary + 6 kept messages");
    require(std::equal(tail.begin(), tail.end(), memory.entries().begin() + 1), "last 6 messages changed");
    require(!maybe_compact(memory, config, summarizer), "fired twice");
    return fmt::format("fired once at message {} ({} -> {} tokens)", i + 1, rec->tokens_before, rec->tokens_after);
  }
  throw Failure{"never crossed 800 tokens"};
}

std::string criterion3() {
  TempDir dir;
  const auto ws = dataclaw::testing::taxi_workspace(dir.path());
  dataclaw::testing::run_scenario1(ws);
  const auto memory_md = read_text(ws.memory_md());
  require(memory_md.find("tip_pct 3000%") != std::string::npos, "session A did not record the finding");

  const std::vector<std::string> script_b = {
      R"(ACTION: {"tool":"memory_search","args":{"query":"tip percentage vendor"}})",
      "FINAL: From earlier analysis: tip_pct 3000% on one vendor 2 trip."};
  gateway::AgentService service(ws, WorkspaceConfig{}, options_with(scripted(script_b)));
  const auto b = service.create_session("console").id;
  const auto hits = service.global_memory().search("tip percentage vendor", 5);
  require(!hits.empty(), "no hits");
  require(hits[0].snippet.find("tip_pct 3000%") != std::string::npos, "finding not ranked first: " + hits[0].snippet);

  const auto trace = service.run(b, "What did we learn about tip percentages by vendor?");
  require(trace.final, "session B turn aborted");
  require(trace.steps.size() == 2, "unexpected step count");
  const auto obs = Json::parse(trace.steps[0].observation.value_or("{}"));
  require(obs["hits"][0]["snippet"].get<std::string>().find("tip_pct 3000%") != std::string::npos,
          "memory_search tool did not rank the finding first");
  require(trace.final_text.find("tip_pct 3000%") != std::string::npos, "answer does not use the finding");
  return "ranked first with score " + std::to_string(hits[0].score);
}

std::string criterion4() {
  TempDir dir;
  const auto ws = dataclaw::testing::taxi_workspace(dir.path());
  const std::vector<std::string> script = {
      "FINAL: nothing to track with",
      R"(ACTION: {"tool":"track_experiment","args":{"name":"baseline"}})",
      "FINAL: tracked"};
  gateway::AgentService service(ws, WorkspaceConfig{}, options_with(scripted(script)));
  gateway::HttpServer server(service);
  require(server.bind("127.0.0.1", 0), "cannot bind");
  server.start();
  httplib::Client client("127.0.0.1", server.port());

  const auto sid = service.create_session("console").id;
  const auto first = service.run(sid, "track experiment baseline");
  require(first.final, "first turn aborted");
  require(service.session(sid)->active_skills.empty(), "skill active before it exists");
  require(Json::parse(client.Get("/api/skills")->body)["skills"].empty(), "skills listed before drop");

  fs::copy(dataclaw::testing::data_path("skills/experiment-tracker"), ws.skills_dir() / "experiment-tracker",
           fs::copy_options::recursive);

  const auto second = service.run(sid, "track experiment baseline");
  require(second.final, "second turn aborted: " + second.abort_reason);
  const auto active = service.session(sid)->active_skills;
  require(std::find(active.begin(), active.end(), "experiment-tracker") != active.end(), "skill not matched");
  require(second.steps[0].observation.value_or("").find("logged") != std::string::npos,
          "skill tool did not run: " + second.steps[0].observation.value_or(""));
  const auto response = client.Get("/api/skills");
  server.stop();
  require(response && response->status == 200, "/api/skills unavailable");
  const auto listed = Json::parse(response->body);
  bool found = false;
  for (const auto& s : listed["skills"]) found = found || s["name"] == "experiment-tracker";
  require(found, "/api/skills does not list the bundle");
  return "matched and listed without restart";
}

// Every session's first reply waits until all peers are in flight, so the
// turns genuinely overlap.
class Rendezvous {
 public:
  explicit Rendezvous(int n) : n_(n) {}
  bool arrive_and_wait(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    if (++arrived_ >= n_) cv_.notify_all();
    return cv_.wait_for(lock, timeout, [&] { return arrived_ >= n_ || released_; });
  }
  void wait_all_arrived() {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, 5s, [&] { return arrived_ >= n_; });
  }
  int arrived() {
    std::lock_guard lock(mu_);
    return arrived_;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int n_;
  int arrived_ = 0;
  bool released_ = false;
};

class MarkerBackend final : public Backend {
 public:
  MarkerBackend(std::string marker, Rendezvous& rv, std::atomic<int>& overlap_ok)
      : marker_(std::move(marker)), rv_(rv), overlap_ok_(overlap_ok) {}
  BackendKind kind() const override { return BackendKind::scripted; }
  std::string generate(const CompletionRequest& request) override {
    // Each request must carry only this session's marker.
    std::string prompt;
    for (const auto& m : request.messages) prompt += m.text + "\n";
    if (prompt.find(marker_) == std::string::npos) leak_ = true;
    if (calls_++ == 0) {
      if (rv_.arrive_and_wait(5s)) ++overlap_ok_;
      return fmt::format("THOUGHT: working on {}\nACTION: {{\"tool\":\"data_load\",\"args\":{{\"path\":\"data/taxi.csv\"}}}}",
                         marker_);
    }
    return "FINAL: " + marker_;
  }
  bool leak_ = false;

 private:
  std::string marker_;
  Rendezvous& rv_;
  std::atomic<int>& overlap_ok_;
  int calls_ = 0;
};

std::string criterion5() {
  constexpr int kSessions = 50;
  TempDir dir;
  const auto ws = dataclaw::testing::taxi_workspace(dir.path());
  Rendezvous rv(kSessions);
  std::atomic<int> overlap_ok{0};
  std::mutex markers_mu;
  std::map<std::string, std::string> marker_of;
  std::vector<std::shared_ptr<MarkerBackend>> backends;
  auto factory = [&](const std::string& sid) -> std::shared_ptr<Backend> {
    std::lock_guard lock(markers_mu);
    const auto marker = fmt::format("MARKER-{:02d}-{}", marker_of.size(), sid.substr(0, 6));
    marker_of[sid] = marker;
    auto b = std::make_shared<MarkerBackend>(marker, rv, overlap_ok);
    backends.push_back(b);
    return b;
  };
  gateway::AgentService service(ws, WorkspaceConfig{}, options_with(factory));

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> ids;
  for (int i = 0; i < kSessions; ++i) {
    ids.push_back(service.create_session("console").id);
  }
  for (const auto& sid : ids) service.submit(sid, "please handle " + marker_of[sid]);
  rv.wait_all_arrived();
  bool rejected = false;
  try {
    service.create_session("console");
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::CapacityExceeded;
  }
  const int running_peak = static_cast<int>(service.status()["running"].get<int>());
  service.wait_all();
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

  require(rejected, "51st session was not rejected with CapacityExceeded");
  require(overlap_ok == kSessions, fmt::format("only {} of {} turns overlapped", overlap_ok.load(), kSessions));
  for (const auto& b : backends) require(!b->leak_, "a prompt was missing its own marker");
  for (const auto& sid : ids) {
    const auto events = read_transcript(ws.transcript_path(sid));
    require(!events.empty() && events.back().kind == EventKind::done, "session " + sid + " did not finish with done");
    const auto text = read_text(ws.transcript_path(sid));
    for (const auto& [other, marker] : marker_of) {
      const bool present = text.find(marker) != std::string::npos;
      require(present == (other == sid), fmt::format("cross-talk: {} in transcript of {}", marker, sid));
    }
  }
  require(elapsed < kConcurrencyBudget, fmt::format("took {} ms", elapsed.count()));
  return fmt::format("{} sessions overlapped ({} running at once), {} ms", kSessions, running_peak, elapsed.count());
}

std::string criterion6() {
  std::mt19937 rng(6);
  for (int i = 0; i < kQueryPairs; ++i) {
    const auto qc = dataclaw::testing::random_query_case(rng);
    const auto ds = tools::parse_delimited(qc.csv, ',');
    const auto got = tools::run_query(ds, tools::parse_query(qc.spec));
    const auto diff = dataclaw::testing::compare_rows(
        got, dataclaw::testing::reference_query(qc.table, qc.ncols, qc.query), kAggregateRelTol);
    require(diff.empty(), fmt::format("pair {} ({}): {}", i, qc.spec.dump(), diff));
  }
  std::int64_t outliers = 0;
  for (int i = 0; i < kIqrColumns; ++i) {
    const auto col = dataclaw::testing::random_numeric_column(rng);
    const auto p = tools::profile(tools::parse_delimited(col.csv, ','));
    const auto want = dataclaw::testing::reference_iqr_outliers(col.values);
    require(p.columns.at(0).numeric && p.columns[0].numeric->outlier_count == want,
            fmt::format("column {}: outlier count differs from oracle {}", i, want));
    outliers += want;
  }
  return fmt::format("{} query pairs, {} columns ({} outliers)", kQueryPairs, kIqrColumns, outliers);
}

std::string criterion7() {
  TempDir dir;
  const auto ws = dataclaw::testing::taxi_workspace(dir.path());
  std::string full, brief;
  const auto run = dataclaw::testing::run_scenario1(ws, [&](gateway::AgentService& service, const auto& r) {
    gateway::HttpServer server(service, gateway::ServerOptions{5000ms, 8});
    if (!server.bind("127.0.0.1", 0)) return;
    server.start();
    auto fetch = [&](const std::string& verbosity) {
      httplib::Client client("127.0.0.1", server.port());
      client.set_read_timeout(5s);
      std::string got;
      client.Get("/api/sessions/" + r.session_id + "/events?verbosity=" + verbosity,
                 [&](const char* data, std::size_t n) {
                   got.append(data, n);
                   const auto done = got.find("event: done\n");
                   return done == std::string::npos || got.find("\n\n", done) == std::string::npos;
                 });
      return got;
    };
    full = fetch("full_trace");
    brief = fetch("final_only");
    server.stop();
  });
  require(dataclaw::testing::matches_golden("scenario1.sse", run.sse), "encoded stream differs from golden");
  require(full == run.sse, "HTTP stream differs from the encoded golden");
  require(brief.find("event: thinking") == std::string::npos, "final_only stream has thinking frames");
  require(brief.find("event: tool_call") == std::string::npos, "final_only stream has tool_call frames");
  require(brief.find("event: message") != std::string::npos, "final_only stream lacks the message");
  return fmt::format("{} bytes identical over HTTP; final_only {} bytes", run.sse.size(), brief.size());
}

class NeverFinal final : public Backend {
 public:
  BackendKind kind() const override { return BackendKind::scripted; }
  std::string generate(const CompletionRequest&) override {
    return R"(ACTION: {"tool":"data_describe","args":{"handle":"d1"}})";
  }
};

std::string criterion8() {
  TempDir dir;
  const auto ws = dataclaw::testing::taxi_workspace(dir.path());
  gateway::AgentService service(
      ws, WorkspaceConfig{}, options_with([](const std::string&) { return std::make_shared<NeverFinal>(); }));
  require(service.config().agent.max_iterations == kIterationCap, "default cap is not 50");
  const auto sid = service.create_session("console").id;
  const auto trace = service.run(sid, "loop forever");
  const auto events = service.bus().history(sid);
  require(!trace.final, "turn reported final");
  require(trace.abort_reason == "max_iterations", "abort reason " + trace.abort_reason);
  require(trace.steps.size() == kIterationCap, fmt::format("{} steps", trace.steps.size()));
  std::size_t calls = 0;
  for (const auto& e : events) calls += e.kind == EventKind::tool_call;
  require(calls == kIterationCap, fmt::format("{} tool calls", calls));
  require(events.back().kind == EventKind::error && str(events.back(), "reason") == "max_iterations",
          "last event is not an error with reason max_iterations");
  require(std::regex_match(kinds(events), std::regex("S(TCR)*T?(MD|E)")), "grammar violated");
  return fmt::format("aborted after {} steps", trace.steps.size());
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"scenario 1 end to end", criterion1},
      {"compaction at 80% of a 1000-token window", criterion2},
      {"cross-session memory continuity", criterion3},
      {"runtime skill registration", criterion4},
      {"50 concurrent sessions, 51st rejected", criterion5},
      {"query and IQR oracle equivalence", criterion6},
      {"golden SSE bytes and final_only filtering", criterion7},
      {"50-step iteration cap", criterion8},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string verdict, detail;
    try {
      detail = criteria[i].second();
      verdict = "PASS";
    } catch (const Failure& f) {
      verdict = "FAIL";
      detail = f.what;
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = std::string("exception: ") + e.what();
    }
    failed += verdict == "FAIL";
    std::cout << fmt::format("[{}] criterion {}: {} ({})", verdict, i + 1, criteria[i].first, detail) << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
