#include <random>
#include <set>

#include "doctest.h"
#include "test_support.hpp"

#include "dataclaw/core/clock.hpp"
#include "dataclaw/core/config.hpp"
#include "dataclaw/core/error.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/sandbox.hpp"
#include "dataclaw/core/session_table.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/core/types.hpp"

using namespace dataclaw;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Precondition;
}

// Stack-based normalizer written independently of the sandbox code.
std::optional<std::string> oracle_normalize(const std::string& root, const std::string& rel) {
  std::vector<std::string> stack;
  std::string part;
  auto push = [&](const std::string& p) -> bool {
    if (p.empty() || p == ".") return true;
    if (p == "..") {
      if (stack.empty()) return false;
      stack.pop_back();
      return true;
    }
    stack.push_back(p);
    return true;
  };
  for (char c : rel) {
    if (c == '/') {
      if (!push(part)) return std::nullopt;
      part.clear();
    } else {
      part += c;
    }
  }
  if (!push(part)) return std::nullopt;
  std::string out = root;
  for (const auto& s : stack) out += "/" + s;
  return out;
}

}  // namespace

TEST_CASE("new_session starts idle with zero turns") {
  SteppingClock clock(TimePoint{}, std::chrono::milliseconds(1));
  SequentialIds ids;
  SessionTable table(50, clock, ids);
  auto s = table.new_session("loopback");
  CHECK(s.status == SessionStatus::idle);
  CHECK(s.turn_count == 0);
  CHECK(s.channel_id == "loopback");
}

TEST_CASE("session capacity admits exactly max_concurrent_sessions") {
  AgentConfig cfg;
  SessionTable table(cfg.max_concurrent_sessions, system_clock(), random_ids());
  std::set<std::string> ids;
  std::size_t created = 0;
  // Loop until failure: the first refusal must come at the configured bound.
  for (;;) {
    try {
      ids.insert(table.new_session("loopback").id);
      ++created;
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CapacityExceeded);
      break;
    }
    REQUIRE(created <= 1000);
  }
  CHECK(created == 50);
  CHECK(ids.size() == 50);
}

TEST_CASE("closing a session frees capacity and rejects turns") {
  SequentialIds ids;
  SessionTable table(1, system_clock(), ids);
  auto s = table.new_session("c");
  CHECK(code_of([&] { table.new_session("c"); }) == ErrorCode::CapacityExceeded);
  table.close(s.id);
  CHECK(code_of([&] { table.begin_turn(s.id); }) == ErrorCode::SessionClosed);
  CHECK_NOTHROW(table.new_session("c"));
}

TEST_CASE("one in-flight turn per session") {
  SequentialIds ids;
  SessionTable table(5, system_clock(), ids);
  auto s = table.new_session("c");
  auto running = table.begin_turn(s.id);
  CHECK(running.status == SessionStatus::running);
  CHECK(running.turn_count == 1);
  CHECK(code_of([&] { table.begin_turn(s.id); }) == ErrorCode::TurnInFlight);
  table.end_turn(s.id);
  CHECK(table.find(s.id)->status == SessionStatus::idle);
  CHECK(code_of([&] { table.begin_turn("nope"); }) == ErrorCode::UnknownSession);
}

TEST_CASE("validate_workspace_path examples") {
  const std::filesystem::path root = "/srv/ws";
  CHECK(validate_workspace_path("data/taxi.csv", root) == "/srv/ws/data/taxi.csv");
  CHECK(validate_workspace_path("data/./a/../taxi.csv", root) == "/srv/ws/data/taxi.csv");
  CHECK(code_of([&] { validate_workspace_path("../../etc/passwd", root); }) == ErrorCode::PathEscape);
  CHECK(code_of([&] { validate_workspace_path("/etc/passwd", root); }) == ErrorCode::PathEscape);
  CHECK(code_of([&] { validate_workspace_path("data/../../ws2/x", root); }) == ErrorCode::PathEscape);
}

TEST_CASE("validate_workspace_path agrees with a stack normalizer on random paths") {
  std::mt19937 rng(7);
  const std::vector<std::string> parts = {"a", "b", "data", ".", "..", "", "x.csv"};
  for (int i = 0; i < 2000; ++i) {
    std::string rel;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) {
      if (k) rel += '/';
      rel += parts[rng() % parts.size()];
    }
    // A leading empty segment makes the path absolute, which is always refused.
    const auto expected = !rel.empty() && rel.front() == '/' ? std::nullopt : oracle_normalize("/srv/ws", rel);
    if (!expected) {
      CHECK_MESSAGE(code_of([&] { validate_workspace_path(rel, "/srv/ws"); }) == ErrorCode::PathEscape, rel);
    } else {
      auto got = validate_workspace_path(rel, "/srv/ws").string();
      while (got.size() > 1 && got.back() == '/') got.pop_back();
      CHECK_MESSAGE(got == *expected, rel);
    }
  }
}

TEST_CASE("ids are 32 lowercase hex digits and unique") {
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    auto id = random_id();
    CHECK(id.size() == 32);
    CHECK(id.find_first_not_of("0123456789abcdef") == std::string::npos);
    seen.insert(id);
  }
  CHECK(seen.size() == 1000);
  CHECK(derived_id("telegram:42") == derived_id("telegram:42"));
  CHECK(derived_id("telegram:42") != derived_id("telegram:43"));
  SequentialIds seq(10);
  CHECK(seq.next() == "0000000000000000000000000000000a");
}

TEST_CASE("timestamps are ISO-8601 UTC with milliseconds") {
  const TimePoint tp{std::chrono::milliseconds(1700000000123LL)};
  CHECK(format_iso8601(tp) == "2023-11-14T22:13:20.123Z");
  SteppingClock clock(tp, std::chrono::milliseconds(5));
  CHECK(clock.now_iso() == "2023-11-14T22:13:20.123Z");
  CHECK(clock.now_iso() == "2023-11-14T22:13:20.128Z");
}

TEST_CASE("default config matches the documented defaults and validates") {
  AgentConfig c;
  CHECK(c.max_iterations == 50);
  CHECK(c.context_window_tokens == 8192);
  CHECK(c.compaction_threshold == doctest::Approx(0.8));
  CHECK(c.verbosity == Verbosity::progress);
  CHECK(c.max_concurrent_sessions == 50);
  CHECK(c.keep_recent_messages == 6);
  CHECK(c.parse_retry_limit == 3);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config invariants are enforced") {
  AgentConfig c;
  c.compaction_threshold = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = AgentConfig{};
  c.compaction_threshold = 1.5;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = AgentConfig{};
  c.context_window_tokens = 100;  // below the preamble overhead
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = AgentConfig{};
  c.max_iterations = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("config round-trips through the file format for random valid configs") {
  std::mt19937 rng(11);
  const Verbosity levels[] = {Verbosity::final_only, Verbosity::progress, Verbosity::full_trace};
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    WorkspaceConfig w;
    w.agent.max_iterations = 1 + rng() % 200;
    w.agent.context_window_tokens = 512 + rng() % 100000;
    w.agent.compaction_threshold = static_cast<double>(1 + rng() % 1000) / 1000.0;
    w.agent.verbosity = levels[rng() % 3];
    w.agent.max_concurrent_sessions = 1 + rng() % 500;
    w.agent.keep_recent_messages = 1 + rng() % 50;
    w.agent.parse_retry_limit = 1 + rng() % 10;
    if (rng() % 2) {
      w.backend.kind = "remote";
      w.backend.endpoint = "http://127.0.0.1:" + std::to_string(1000 + rng() % 60000) + "/v1/chat/completions";
      w.backend.model = "m" + std::to_string(rng() % 100);
    }
    try {
      w.agent.validate();
    } catch (const Error&) {
      continue;
    }
    CHECK(parse_config(serialize_config(w)) == w);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("config parse errors carry line numbers") {
  try {
    parse_config("max_iterations = 5\nbogus = 1\n");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("environment overrides apply on top of the file") {
  WorkspaceConfig w;
  auto env = [](const std::string& name) -> std::optional<std::string> {
    if (name == "DATACLAW_MAX_ITERATIONS") return "7";
    if (name == "DATACLAW_BACKEND_KIND") return "remote";
    if (name == "DATACLAW_BACKEND_ENDPOINT") return "http://localhost:9/x";
    return std::nullopt;
  };
  auto out = apply_env_overrides(w, env);
  CHECK(out.agent.max_iterations == 7);
  CHECK(out.backend.kind == "remote");
  CHECK(out.backend.endpoint == "http://localhost:9/x");
}

TEST_CASE("merge_config patches and validates") {
  AgentConfig base;
  auto merged = merge_config(base, Json{{"compaction_threshold", 0.5}, {"verbosity", "full_trace"}});
  CHECK(merged.compaction_threshold == doctest::Approx(0.5));
  CHECK(merged.verbosity == Verbosity::full_trace);
  CHECK(code_of([&] { merge_config(base, Json{{"compaction_threshold", 2.0}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { merge_config(base, Json{{"no_such_key", 1}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("AgentEvent JSON round trip keeps field order") {
  AgentEvent e{3, "s1", EventKind::tool_call, Json{{"tool", "data_describe"}}, "2024-01-01T00:00:00.000Z"};
  auto j = to_json(e);
  CHECK(j.dump() ==
        R"({"seq":3,"session_id":"s1","kind":"tool_call","timestamp":"2024-01-01T00:00:00.000Z","payload":{"tool":"data_describe"}})");
  CHECK(event_from_json(j) == e);
}

TEST_CASE("string helpers") {
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-3.5) == "-3.5");
  CHECK(utf8_prefix("h\xC3\xA9llo", 2) == "h");
  CHECK(utf8_first_chars("h\xC3\xA9llo", 2) == "h\xC3\xA9");
  CHECK(trim("  a b \n") == "a b");
  CHECK(split_lines("a\r\nb\n").size() == 2);
}
