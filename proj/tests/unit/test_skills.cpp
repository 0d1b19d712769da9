#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "doctest.h"
#include "test_support.hpp"

#include "dataclaw/core/error.hpp"
#include "dataclaw/skills/catalog.hpp"
#include "dataclaw/skills/skill.hpp"
#include "dataclaw/skills/skill_tool.hpp"

using namespace dataclaw;
using dataclaw::testing::TempDir;
using dataclaw::testing::write_text;
namespace fs = std::filesystem;

namespace {

std::string malformed_message(std::string_view bytes) {
  try {
    parse_skill(bytes);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedSkill);
    return e.what();
  }
  FAIL("expected MalformedSkill");
  return {};
}

std::string simple_skill(const std::string& name, const std::string& trigger, const std::string& body = "Do it.") {
  return "---\nname: " + name + "\ndescription: d\ntriggers: [" + trigger + "]\n---\n" + body + "\n";
}

void drop_fixture(const fs::path& skills_dir) {
  fs::copy(dataclaw::testing::data_path("skills/experiment-tracker"), skills_dir / "experiment-tracker",
           fs::copy_options::recursive);
}

std::set<std::string> names(const SkillSet& set) {
  std::set<std::string> out;
  for (const auto& s : set.skills) out.insert(s->name);
  return out;
}

}  // namespace

TEST_CASE("experiment tracker fixture parses") {
  const auto bytes = dataclaw::testing::read_text(dataclaw::testing::data_path("skills/experiment-tracker/SKILL.md"));
  auto s = parse_skill(bytes, "/w/skills/experiment-tracker");
  CHECK(s.name == "experiment-tracker");
  CHECK(s.triggers == std::vector<std::string>{"experiment", "track"});
  CHECK(s.examples.size() == 2);
  CHECK(s.examples[0].assistant == "Logged experiment baseline (accuracy = 0.81).");
  CHECK(s.tool == std::optional<std::string>("track_experiment"));
  CHECK(s.command == std::optional<std::string>("bin/track.sh"));
  CHECK(s.instructions.rfind("When the user asks", 0) == 0);
  CHECK(s.instructions.find("## Examples") == std::string::npos);
  CHECK(s.content_hash == skill_content_hash(bytes));
  CHECK(s.source_dir == fs::path("/w/skills/experiment-tracker"));
}

TEST_CASE("malformed skills report a line number") {
  CHECK(malformed_message("name: x\ntriggers: [a]\n").find("line 1") != std::string::npos);
  CHECK(malformed_message("---\nname: x\ntriggers: []\n---\nbody\n").find("line 3") != std::string::npos);
  CHECK(malformed_message("---\nname: x\ndescription: d\n---\n").find("triggers") != std::string::npos);
  CHECK(malformed_message("---\ntriggers: [a]\n---\n").find("name") != std::string::npos);
  CHECK(malformed_message("---\nname: x\ntriggers: [a]\n").find("unterminated") != std::string::npos);
  CHECK(malformed_message("---\nname: x\ntriggers: [a]\ntool: t\n---\n").find("together") != std::string::npos);
  CHECK(malformed_message("---\nname: x\ntriggers: [a]\ntool: t\ncommand: ../../bin/sh\n---\n")
            .find("line 5") != std::string::npos);
  CHECK(malformed_message("---\nname: x\ntriggers: [a]\n---\n## Examples\n- user: hi\n")
            .find("line 6") != std::string::npos);
}

TEST_CASE("parse_skill is total on arbitrary bytes") {
  std::mt19937 rng(43);
  const std::vector<std::string> pieces = {"---\n", "name: a\n", "triggers: [x, y]\n", "triggers: []\n", "tool: t\n",
                                           "command: run.sh\n", "## Examples\n", "- user: q\n", "  assistant: a\n",
                                           ":", "\n", "\xEF\xBB\xBF", "\r\n", "[", "]", "\0", "\xff", "body text"};
  for (int i = 0; i < 5000; ++i) {
    std::string bytes;
    for (std::size_t n = rng() % 12; n > 0; --n) {
      if (rng() % 4 == 0) {
        bytes += static_cast<char>(rng() % 256);
      } else {
        bytes += pieces[rng() % pieces.size()];
      }
    }
    try {
      auto s = parse_skill(bytes);
      CHECK_FALSE(s.name.empty());
      CHECK_FALSE(s.triggers.empty());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedSkill);
    }
  }
}

TEST_CASE("trigger matching is case-insensitive substring") {
  auto s = parse_skill(simple_skill("experiment-tracker", "experiment"));
  CHECK(skill_matches(s, "track this experiment"));
  CHECK(skill_matches(s, "EXPERIMENTS so far?"));
  CHECK_FALSE(skill_matches(s, "describe the data"));
}

TEST_CASE("scan examples") {
  TempDir dir;
  fs::create_directories(dir / "skills");
  SkillCatalog catalog(dir / "skills");
  auto cold = catalog.scan();
  CHECK(cold.registered.empty());
  CHECK(cold.removed.empty());
  CHECK(cold.unchanged.empty());

  drop_fixture(dir / "skills");
  auto first = catalog.scan();
  CHECK(first.registered == std::vector<std::string>{"experiment-tracker"});
  CHECK(catalog.snapshot()->find("experiment-tracker") != nullptr);

  fs::create_directories(dir / "skills/broken");
  write_text(dir / "skills/broken/SKILL.md", "no front matter\n");
  auto mixed = catalog.scan();
  REQUIRE(mixed.errors.size() == 1);
  CHECK(mixed.errors[0].dir == "broken");
  CHECK(mixed.unchanged == std::vector<std::string>{"experiment-tracker"});
  CHECK(names(*catalog.snapshot()) == std::set<std::string>{"experiment-tracker"});
}

TEST_CASE("rescan converges, picks up edits and removals") {
  TempDir dir;
  fs::create_directories(dir / "skills/alpha");
  write_text(dir / "skills/alpha/SKILL.md", simple_skill("alpha", "a"));
  SkillCatalog catalog(dir / "skills");
  auto first = catalog.scan();
  const auto v1 = first.version;
  auto again = catalog.scan();
  CHECK(again.registered.empty());
  CHECK(again.removed.empty());
  CHECK(again.unchanged == std::vector<std::string>{"alpha"});
  CHECK(again.version == v1);
  const auto before = catalog.snapshot()->find("alpha");

  write_text(dir / "skills/alpha/SKILL.md", simple_skill("alpha", "a", "New body."));
  auto edited = catalog.scan();
  CHECK(edited.registered == std::vector<std::string>{"alpha"});
  CHECK(edited.version > v1);
  CHECK(catalog.snapshot()->find("alpha")->instructions == "New body.");
  CHECK(before->instructions == "Do it.");

  fs::remove_all(dir / "skills/alpha");
  auto removed = catalog.scan();
  CHECK(removed.removed == std::vector<std::string>{"alpha"});
  CHECK(catalog.snapshot()->skills.empty());
}

TEST_CASE("skill name must match its directory") {
  TempDir dir;
  fs::create_directories(dir / "skills/beta");
  write_text(dir / "skills/beta/SKILL.md", simple_skill("gamma", "g"));
  SkillCatalog catalog(dir / "skills");
  auto report = catalog.scan();
  CHECK(report.errors.size() == 1);
  CHECK(catalog.snapshot()->skills.empty());
}

TEST_CASE("readers see the whole old set or the whole new set") {
  TempDir dir;
  fs::create_directories(dir / "skills");
  SkillCatalog catalog(dir / "skills");
  const std::set<std::string> a{"a1", "a2", "a3"}, b{"b1", "b2", "b3"};
  auto install = [&](const std::set<std::string>& add, const std::set<std::string>& drop) {
    for (const auto& n : drop) fs::remove_all(dir / "skills" / n);
    for (const auto& n : add) {
      fs::create_directories(dir / "skills" / n);
      write_text(dir / "skills" / n / "SKILL.md", simple_skill(n, n));
    }
  };
  install(a, {});
  catalog.scan();

  std::atomic<bool> stop{false};
  std::atomic<int> bad{0}, reads{0};
  std::thread reader([&] {
    while (!stop) {
      auto snap = catalog.snapshot();
      auto n = names(*snap);
      if (n != a && n != b) ++bad;
      ++reads;
    }
  });
  for (int i = 0; i < 40; ++i) {
    if (i % 2 == 0) {
      install(b, a);
    } else {
      install(a, b);
    }
    catalog.scan();
  }
  stop = true;
  reader.join();
  CHECK(bad == 0);
  CHECK(reads > 0);
}

TEST_CASE("skill executables run from the workspace root") {
  TempDir dir;
  fs::create_directories(dir / "skills");
  drop_fixture(dir / "skills");
  SkillCatalog catalog(dir / "skills");
  catalog.scan();
  auto tools = skill_tools(*catalog.snapshot(), dir.path());
  REQUIRE(tools.size() == 1);
  CHECK(tools[0].first.name == "track_experiment");
  CHECK(tools[0].first.origin == tools::ToolOrigin::skill);
  tools::ToolContext ctx;
  auto out = tools[0].second(Json{{"name", "baseline"}}, ctx);
  CHECK(out.get<std::string>() == R"(logged {"name":"baseline"})");
  CHECK(dataclaw::testing::read_text(dir / "data/experiments.log") == "{\"name\":\"baseline\"}\n");
}

TEST_CASE("skill executables time out and report failures") {
  TempDir dir;
  write_text(dir / "slow.sh", "#!/bin/sh\nsleep 5\n");
  write_text(dir / "fail.sh", "#!/bin/sh\necho oops >&2\nexit 3\n");
  fs::permissions(dir / "slow.sh", fs::perms::owner_all);
  fs::permissions(dir / "fail.sh", fs::perms::owner_all);
  const auto start = std::chrono::steady_clock::now();
  auto slow = run_process({(dir / "slow.sh").string()}, dir.path(), "", std::chrono::milliseconds(200));
  CHECK(slow.timed_out);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
  auto fail = run_process({(dir / "fail.sh").string()}, dir.path(), "", std::chrono::seconds(5));
  CHECK(fail.exit_code == 3);
  CHECK(fail.err == "oops\n");
}
