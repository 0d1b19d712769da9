#include <random>
#include <set>
#include <thread>

#include "doctest.h"

#include "dataclaw/core/error.hpp"
#include "dataclaw/stream/event_bus.hpp"
#include "dataclaw/stream/sse.hpp"

using namespace dataclaw;
using namespace std::chrono_literals;

namespace {

const EventKind kAllKinds[] = {EventKind::session_start, EventKind::thinking, EventKind::tool_call,
                               EventKind::tool_result,   EventKind::message,  EventKind::artifact,
                               EventKind::error,         EventKind::done};

AgentEvent make_event(std::int64_t seq, EventKind kind, Json payload = Json::object(), std::string sid = "s1") {
  AgentEvent e;
  e.seq = seq;
  e.session_id = std::move(sid);
  e.kind = kind;
  e.payload = std::move(payload);
  e.timestamp = "2024-05-01T00:00:00.000Z";
  return e;
}

// A typical turn's kinds, repeated to the requested length.
EventKind kind_at(std::int64_t seq) {
  static const EventKind cycle[] = {EventKind::session_start, EventKind::thinking, EventKind::tool_call,
                                    EventKind::tool_result, EventKind::message, EventKind::done};
  return cycle[(seq - 1) % 6];
}

std::vector<AgentEvent> drain(Subscription& sub) {
  std::vector<AgentEvent> out;
  while (auto e = sub.poll()) out.push_back(*e);
  return out;
}

}  // namespace

TEST_CASE("emit logs events in order and rejects gaps") {
  EventBus bus;
  bus.emit(make_event(1, EventKind::session_start));
  bus.emit(make_event(2, EventKind::thinking));
  auto h = bus.history("s1");
  REQUIRE(h.size() == 2);
  CHECK(h[0].seq == 1);
  CHECK(h[1].seq == 2);
  try {
    bus.emit(make_event(4, EventKind::done));
    FAIL("expected SeqViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeqViolation);
  }
  CHECK(bus.last_seq("s1") == 2);
  CHECK_THROWS_AS(bus.emit(make_event(2, EventKind::done, {}, "s2")), Error);
}

TEST_CASE("verbosity filter table") {
  const std::set<EventKind> final_only{EventKind::session_start, EventKind::message, EventKind::artifact,
                                       EventKind::error, EventKind::done};
  for (auto k : kAllKinds) {
    CHECK(verbosity_allows(Verbosity::final_only, k) == (final_only.count(k) == 1));
    CHECK(verbosity_allows(Verbosity::progress, k) ==
          (final_only.count(k) == 1 || k == EventKind::tool_call || k == EventKind::tool_result));
    CHECK(verbosity_allows(Verbosity::full_trace, k));
  }
}

TEST_CASE("sse framing") {
  auto bytes = encode_sse(make_event(7, EventKind::done, {{"outcome", "final"}}));
  CHECK(bytes == "id: 7\nevent: done\ndata: {\"session_id\":\"s1\",\"timestamp\":\"2024-05-01T00:00:00.000Z\","
                 "\"payload\":{\"outcome\":\"final\"}}\n\n");
  auto multi = encode_sse(make_event(1, EventKind::message, {{"text", "line one\nline two"}}));
  CHECK(multi.find("line one\\nline two") != std::string::npos);
  CHECK(std::count(multi.begin(), multi.end(), '\n') == 4);
}

TEST_CASE("sse encoding is injective and has one terminator") {
  std::mt19937 rng(47);
  std::set<std::string> seen;
  std::set<std::tuple<std::int64_t, int, std::string>> keys;
  const std::vector<std::string> texts = {"", "a", "\n", "\n\n", "x\r\ny", "\"", "id: 3", "data: x", "\xC3\xA9"};
  for (int i = 0; i < 3000; ++i) {
    const auto seq = static_cast<std::int64_t>(rng() % 50);
    const auto kind = kAllKinds[rng() % 8];
    Json payload = {{"text", texts[rng() % texts.size()] + texts[rng() % texts.size()]}};
    if (rng() % 3 == 0) payload["n"] = rng() % 5;
    auto frame = encode_sse(make_event(seq, kind, payload));
    CHECK(frame.size() >= 2);
    CHECK(frame.substr(frame.size() - 2) == "\n\n");
    CHECK(frame.find("\n\n") == frame.size() - 2);
    const auto fresh_key = keys.emplace(seq, static_cast<int>(kind), payload.dump()).second;
    const auto fresh_frame = seen.insert(frame).second;
    CHECK(fresh_key == fresh_frame);
  }
}

TEST_CASE("subscribe replays filtered history and supports resume") {
  EventBus bus;
  CHECK_THROWS_AS(bus.subscribe("nope", Verbosity::full_trace), Error);
  for (std::int64_t s = 1; s <= 6; ++s) bus.emit(make_event(s, kind_at(s)));
  auto full = bus.subscribe("s1", Verbosity::full_trace);
  CHECK(drain(*full).size() == 6);
  auto fin = drain(*bus.subscribe("s1", Verbosity::final_only));
  REQUIRE(fin.size() == 3);
  CHECK(fin[0].kind == EventKind::session_start);
  CHECK(fin[1].kind == EventKind::message);
  CHECK(fin[2].kind == EventKind::done);
  auto resumed = drain(*bus.subscribe("s1", Verbosity::full_trace, 3));
  REQUIRE(resumed.size() == 3);
  CHECK(resumed[0].seq == 4);
  auto tip = bus.subscribe("s1", Verbosity::full_trace, 6);
  CHECK(drain(*tip).empty());
  bus.emit(make_event(7, EventKind::session_start));
  auto live = tip->next(1s);
  REQUIRE(live);
  CHECK(live->seq == 7);
}

TEST_CASE("cancelled subscriptions stop receiving") {
  EventBus bus;
  bus.open_session("s1");
  auto sub = bus.subscribe("s1", Verbosity::full_trace);
  sub->cancel();
  bus.emit(make_event(1, EventKind::session_start));
  CHECK_FALSE(sub->next(10ms));
  CHECK(sub->cancelled());
}

TEST_CASE("subscribing at random instants never duplicates or skips") {
  std::mt19937 rng(53);
  for (int round = 0; round < 30; ++round) {
    EventBus bus;
    bus.open_session("s1");
    constexpr std::int64_t kEvents = 400;
    const auto level = static_cast<Verbosity>(rng() % 3);
    std::vector<std::pair<std::shared_ptr<Subscription>, std::int64_t>> subs;
    std::thread emitter([&] {
      for (std::int64_t s = 1; s <= kEvents; ++s) bus.emit(make_event(s, kind_at(s)));
    });
    const int n_subs = 8;
    for (int i = 0; i < n_subs; ++i) {
      std::this_thread::sleep_for(std::chrono::microseconds(rng() % 200));
      const std::int64_t from = rng() % 4 == 0 ? static_cast<std::int64_t>(rng() % 50) : 0;
      subs.emplace_back(bus.subscribe("s1", level, from), from);
    }
    emitter.join();
    for (const auto& [sub, from] : subs) {
      std::vector<std::int64_t> got;
      while (auto e = sub->poll()) {
        CHECK(verbosity_allows(level, e->kind));
        got.push_back(e->seq);
      }
      std::vector<std::int64_t> want;
      for (std::int64_t s = 1; s <= kEvents; ++s) {
        if (verbosity_allows(level, kind_at(s)) && s > from) want.push_back(s);
      }
      CHECK(got == want);
      CHECK(sub->dropped_count() == 0);
    }
  }
}

TEST_CASE("start point of a subscription is its from_seq") {
  EventBus bus;
  for (std::int64_t s = 1; s <= 30; ++s) bus.emit(make_event(s, kind_at(s)));
  for (std::int64_t from = 0; from <= 30; ++from) {
    auto got = drain(*bus.subscribe("s1", Verbosity::full_trace, from));
    CHECK(got.size() == static_cast<std::size_t>(30 - from));
    if (!got.empty()) CHECK(got.front().seq == from + 1);
  }
}

TEST_CASE("slow consumers lose the oldest events and see one gap notice") {
  EventBus bus;
  bus.open_session("s1");
  auto sub = bus.subscribe("s1", Verbosity::full_trace);
  const std::int64_t total = Subscription::kBufferCapacity + 100;
  for (std::int64_t s = 1; s <= total; ++s) bus.emit(make_event(s, EventKind::thinking));
  auto got = drain(*sub);
  REQUIRE_FALSE(got.empty());
  CHECK(got[0].kind == EventKind::error);
  CHECK(got[0].payload["code"] == "gap");
  CHECK(got[0].payload["dropped_from"] == 1);
  CHECK(got[0].payload["dropped_to"] == 100);
  CHECK(sub->dropped_count() == 100);
  REQUIRE(got.size() == Subscription::kBufferCapacity + 1);
  CHECK(got[1].seq == 101);
  for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i].seq > got[i - 1].seq);
  // The log itself is untouched.
  CHECK(bus.history("s1").size() == static_cast<std::size_t>(total));
}
