#include <cmath>
#include <random>
#include <regex>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

#include "dataclaw/core/clock.hpp"
#include "dataclaw/core/error.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/memory/global_memory.hpp"
#include "dataclaw/persist/artifact_store.hpp"
#include "dataclaw/persist/workspace.hpp"
#include "dataclaw/tools/builtins.hpp"
#include "dataclaw/tools/chart.hpp"
#include "dataclaw/tools/clean.hpp"
#include "dataclaw/tools/dataset.hpp"
#include "dataclaw/tools/form.hpp"
#include "dataclaw/tools/registry.hpp"
#include "dataclaw/tools/report.hpp"
#include "dataclaw/tools/stats.hpp"

using namespace dataclaw;
using namespace dataclaw::tools;
using dataclaw::testing::TempDir;
using dataclaw::testing::count_occurrences;

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

Dataset csv(std::string_view text) { return parse_delimited(text, ','); }

// Plain split for the fixture, which has no quoted fields.
std::vector<std::vector<std::string>> naive_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  for (auto line : split_lines(text)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    rows.push_back(cells);
  }
  return rows;
}

// Checks that every opened tag is closed in order (self-closing allowed).
bool tags_balanced(const std::string& xml) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  while ((pos = xml.find('<', pos)) != std::string::npos) {
    const auto end = xml.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = xml.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty() || tag[0] == '!' || tag[0] == '?') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find(' ')));
    }
  }
  return stack.empty();
}

struct Env {
  TempDir dir;
  WorkspaceLayout ws = init_workspace(dir.path()).layout;
  SequentialIds ids;
  ArtifactStore artifacts{ws, system_clock(), ids};
  DatasetStore datasets;
  GlobalMemory memory{ws};
  ToolRegistry registry;
  ToolContext ctx;

  Env() {
    register_builtin_tools(registry);
    ctx.session_id = "s1";
    ctx.workspace = &ws;
    ctx.datasets = &datasets;
    ctx.artifacts = &artifacts;
    ctx.memory = &memory;
    std::filesystem::copy_file(dataclaw::testing::data_path("taxi_trips.csv"), ws.data_dir() / "taxi.csv");
  }

  Json call(const std::string& tool, const Json& args) {
    auto out = registry.dispatch(tool, args, ctx);
    INFO(out);
    REQUIRE(out.rfind("ERROR", 0) != 0);
    return Json::parse(out);
  }
};

}  // namespace

TEST_CASE("dtype inference follows integer > float > boolean > string") {
  auto ds = csv("a,b\n1,x\n2,y\n3,z\n");
  REQUIRE(ds.columns.size() == 2);
  CHECK(ds.columns[0].dtype == DType::integer);
  CHECK(ds.columns[1].dtype == DType::string);
  CHECK(ds.rows.size() == 3);
  CHECK(csv("v\n1\n2.5\n3\n").columns[0].dtype == DType::floating);
  CHECK(csv("v\ntrue\nFALSE\n\n").columns[0].dtype == DType::boolean);
  auto nulls = csv("a,b\n1,\n,x\n");
  CHECK(is_null(nulls.rows[0][1]));
  CHECK(is_null(nulls.rows[1][0]));
}

TEST_CASE("ragged rows and missing headers are ParseError") {
  CHECK(code_of([] { csv("a,b\n1,2,3\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { csv(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { csv("a,a\n1,2\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("quoted fields follow RFC 4180") {
  auto ds = csv("name,note\n\"Doe, J\",\"said \"\"hi\"\"\"\nx,\"two\nlines\"\n");
  REQUIRE(ds.rows.size() == 2);
  CHECK(std::get<std::string>(ds.rows[0][0]) == "Doe, J");
  CHECK(std::get<std::string>(ds.rows[0][1]) == "said \"hi\"");
  CHECK(std::get<std::string>(ds.rows[1][1]) == "two\nlines");
}

TEST_CASE("load_table is sandboxed and format-checked") {
  TempDir dir;
  dataclaw::testing::write_text(dir / "t.tsv", "a\tb\n1\t2\n");
  CHECK(load_table("t.tsv", dir.path()).rows.size() == 1);
  CHECK(code_of([&] { load_table("../x.csv", dir.path()); }) == ErrorCode::PathEscape);
  CHECK(code_of([&] { load_table("missing.csv", dir.path()); }) == ErrorCode::NotFound);
}

TEST_CASE("describe examples") {
  auto d = describe(csv("v\n1\n2\n3\n"));
  CHECK(d["row_count"] == 3);
  CHECK(d["columns"][0]["min"] == 1);
  CHECK(d["columns"][0]["max"] == 3);
  CHECK(d["columns"][0]["mean"].get<double>() == doctest::Approx(2.0));
  auto empty = describe(csv("v,w\n"));
  CHECK(empty["row_count"] == 0);
  CHECK(empty["columns"][0]["mean"].is_null());
  CHECK(empty["columns"][0]["min"].is_null());
}

TEST_CASE("describe on the taxi fixture matches a brute-force pass") {
  const auto text = dataclaw::testing::read_text(dataclaw::testing::data_path("taxi_trips.csv"));
  auto d = describe(csv(text));
  const auto raw = naive_csv(text);
  const auto col = std::find(raw[0].begin(), raw[0].end(), "fare_amount") - raw[0].begin();
  double lo = 1e300, hi = -1e300, sum = 0;
  for (std::size_t r = 1; r < raw.size(); ++r) {
    const double v = std::stod(raw[r][static_cast<std::size_t>(col)]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  const auto& fare = d["columns"][static_cast<std::size_t>(col)];
  CHECK(fare["name"] == "fare_amount");
  CHECK(d["row_count"] == raw.size() - 1);
  CHECK(fare["min"].get<double>() == doctest::Approx(lo).epsilon(1e-12));
  CHECK(fare["max"].get<double>() == doctest::Approx(hi).epsilon(1e-12));
  CHECK(fare["mean"].get<double>() == doctest::Approx(sum / static_cast<double>(raw.size() - 1)).epsilon(1e-12));
}

TEST_CASE("quartiles by linear interpolation") {
  const std::vector<double> v = {1, 2, 3, 4, 100};
  CHECK(quantile_linear(v, 0.25) == 2);
  CHECK(quantile_linear(v, 0.75) == 4);
  const std::vector<double> w = {1, 2, 3, 4};
  CHECK(quantile_linear(w, 0.25) == doctest::Approx(1.75));
  auto f = iqr_fences(v);
  CHECK(f.low == -1);
  CHECK(f.high == 7);
}

TEST_CASE("profile examples") {
  auto p = profile(csv("v\n1\n2\n3\n4\n100\n"));
  REQUIRE(p.columns[0].numeric);
  CHECK(p.columns[0].numeric->outlier_count == 1);
  CHECK(p.columns[0].missing_fraction == 0);
  auto dups = profile(csv("a,b\n1,x\n2,y\n1,x\n3,z\n4,w\n"));
  CHECK(dups.row_count == 5);
  CHECK(dups.duplicate_row_count == 1);
  auto stddev = profile(csv("v\n2\n4\n4\n4\n5\n5\n7\n9\n"));
  CHECK(stddev.columns[0].numeric->stddev == doctest::Approx(2.0));
}

TEST_CASE("profile invariants hold on random tables") {
  std::mt19937 rng(29);
  for (int round = 0; round < 200; ++round) {
    const auto ncols = 1 + rng() % 6, nrows = rng() % 200;
    std::string text;
    for (std::size_t c = 0; c < ncols; ++c) text += (c ? "," : "") + std::string("c") + std::to_string(c);
    text += '\n';
    for (std::size_t r = 0; r < nrows; ++r) {
      for (std::size_t c = 0; c < ncols; ++c) {
        if (c) text += ',';
        if (rng() % 7 == 0) continue;
        text += (c % 2 == 0) ? std::to_string(rng() % 10) : std::string(1, static_cast<char>('a' + rng() % 4));
      }
      text += '\n';
    }
    auto ds = csv(text);
    auto p = profile(ds);
    std::set<Row> distinct(ds.rows.begin(), ds.rows.end());
    CHECK(p.duplicate_row_count == static_cast<std::int64_t>(ds.rows.size() - distinct.size()));
    for (const auto& c : p.columns) {
      CHECK(c.missing_fraction >= 0);
      CHECK(c.missing_fraction <= 1);
      CHECK(c.distinct_count <= p.row_count);
    }
  }
}

TEST_CASE("profile outlier counts match a hand-rolled IQR pass") {
  std::mt19937 rng(43);
  for (int i = 0; i < 100; ++i) {
    const auto col = dataclaw::testing::random_numeric_column(rng);
    auto p = profile(csv(col.csv));
    REQUIRE(p.columns[0].numeric);
    CHECK(p.columns[0].numeric->outlier_count == dataclaw::testing::reference_iqr_outliers(col.values));
  }
}

TEST_CASE("clean examples") {
  auto src = csv("k,v\na,1\nb,\nc,3\n");
  auto mean = apply_clean(src, parse_clean_ops(Json::parse(R"([{"op":"fill_missing","col":"v","strategy":"mean"}])")));
  CHECK(std::get<std::int64_t>(mean.rows[1][1]) == 2);
  CHECK(mean.columns[1].dtype == DType::integer);

  auto dup = csv("a,b\n1,x\n2,y\n1,x\n");
  auto dedup = apply_clean(dup, parse_clean_ops(Json::parse(R"([{"op":"drop_duplicates"}])")));
  CHECK(dedup.rows.size() == dup.rows.size() - 1);

  const auto before = dup;
  auto same = apply_clean(dup, {});
  CHECK(same == dup);
  CHECK(dup == before);

  auto outliers = apply_clean(csv("v\n1\n2\n3\n4\n100\n"), parse_clean_ops(Json::parse(R"([{"op":"drop_outliers","col":"v"}])")));
  CHECK(outliers.rows.size() == 4);

  CHECK(code_of([&] { parse_clean_ops(Json::parse(R"([{"op":"explode"}])")); }) == ErrorCode::BadOp);
  CHECK(code_of([&] {
          apply_clean(csv("s\nx\n"), parse_clean_ops(Json::parse(R"([{"op":"fill_missing","col":"s","strategy":"mean"}])")));
        }) == ErrorCode::BadOp);
}

TEST_CASE("bar chart of three categories has three bars") {
  auto ds = csv("cat,val\na,1\nb,5\nc,3\n");
  auto svg = render_chart(ds, parse_chart_spec(Json::parse(R"({"kind":"bar","x":"cat","y":"val","title":"T"})")));
  CHECK(count_occurrences(svg, "<rect class=\"bar\"") == 3);
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\"", 0) == 0);
  CHECK(svg.find("<?xml") == std::string::npos);
  CHECK(tags_balanced(svg));
}

TEST_CASE("aggregated bar chart groups by x") {
  auto ds = csv("v,t\n1,2\n2,4\n1,6\n");
  auto svg = render_chart(ds, parse_chart_spec(Json::parse(R"({"kind":"bar","x":"v","y":{"agg":"mean","col":"t"}})")));
  CHECK(count_occurrences(svg, "<rect class=\"bar\"") == 2);
}

TEST_CASE("histogram of 1..10 with five bins has five bars of two") {
  auto ds = csv("v\n1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n");
  auto svg = render_chart(ds, parse_chart_spec(Json::parse(R"({"kind":"histogram","x":"v","bins":5})")));
  CHECK(count_occurrences(svg, "<rect class=\"bar\"") == 5);
  CHECK(count_occurrences(svg, "data-count=\"2\"") == 5);
  // Equal pixel heights as well.
  std::regex height("class=\"bar\"[^>]* height=\"([0-9.]+)\"");
  std::set<std::string> heights;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), height); it != std::sregex_iterator(); ++it) {
    heights.insert((*it)[1]);
  }
  CHECK(heights.size() == 1);
  CHECK(tags_balanced(svg));
}

TEST_CASE("charts are byte-deterministic") {
  auto ds = csv(dataclaw::testing::read_text(dataclaw::testing::data_path("taxi_trips.csv")));
  for (const char* spec : {R"({"kind":"scatter","x":"fare_amount","y":"tip_amount"})",
                           R"({"kind":"line","x":"trip_distance","y":"fare_amount"})",
                           R"({"kind":"histogram","x":"fare_amount"})",
                           R"({"kind":"bar","x":"payment_type","y":{"agg":"count","col":"*"}})"}) {
    auto s = parse_chart_spec(Json::parse(spec));
    auto a = render_chart(ds, s);
    CHECK(a == render_chart(ds, s));
    CHECK(tags_balanced(a));
  }
}

TEST_CASE("chart specs are validated") {
  auto ds = csv("cat,val\na,1\n");
  auto bad = [&](const char* spec) { return code_of([&] { render_chart(ds, parse_chart_spec(Json::parse(spec))); }); };
  CHECK(bad(R"({"kind":"pie","x":"cat","y":"val"})") == ErrorCode::BadSpec);
  CHECK(bad(R"({"kind":"bar","x":"nope","y":"val"})") == ErrorCode::BadSpec);
  CHECK(bad(R"({"kind":"scatter","x":"cat","y":"val"})") == ErrorCode::BadSpec);
  CHECK(bad(R"({"kind":"histogram","x":"val","bins":0})") == ErrorCode::BadSpec);
  CHECK(bad(R"({"kind":"histogram","x":"val","y":"val"})") == ErrorCode::BadSpec);
  CHECK(bad(R"({"kind":"bar","x":"cat"})") == ErrorCode::BadSpec);
}

TEST_CASE("nice ticks are 1, 2 or 5 times a power of ten and cover the data") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    double a = u(rng), b = u(rng);
    if (i % 3 == 0) b = a + std::abs(u(rng)) * 1e-4;
    const auto lo = std::min(a, b), hi = std::max(a, b);
    auto s = nice_scale(lo, hi);
    const double mantissa = s.step / std::pow(10.0, std::floor(std::log10(s.step)));
    const bool nice = std::abs(mantissa - 1) < 1e-9 || std::abs(mantissa - 2) < 1e-9 || std::abs(mantissa - 5) < 1e-9;
    CHECK_MESSAGE(nice, s.step);
    CHECK(s.lo <= lo);
    CHECK(s.hi >= hi);
    CHECK(s.ticks.size() >= 2);
    CHECK(s.ticks.size() <= 12);
  }
  CHECK(nice_step(0.7) == doctest::Approx(1.0));
  CHECK(nice_step(1.2) == doctest::Approx(2.0));
  CHECK(nice_step(3) == doctest::Approx(5.0));
  CHECK(nice_step(20) == doctest::Approx(20.0));
}

TEST_CASE("report examples") {
  auto title_only = render_report("Taxi <tips>", {}, nullptr, nullptr);
  CHECK(title_only.find("<h1>Taxi &lt;tips&gt;</h1>") != std::string::npos);
  CHECK(title_only.rfind("<!DOCTYPE html>", 0) == 0);

  const std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\"><rect class=\"bar\"/></svg>\n";
  ArtifactLookup artifacts = [&](const std::string& ref) -> std::optional<ResolvedArtifact> {
    if (ref != "chart.svg") return std::nullopt;
    Artifact a;
    a.relative_path = "artifacts/s1/chart.svg";
    a.media_type = "image/svg+xml";
    return ResolvedArtifact{a, svg};
  };
  auto with_chart = render_report("R", {{"Chart", "body", {"chart.svg"}, std::nullopt}}, artifacts, nullptr);
  CHECK(with_chart.find(svg) != std::string::npos);

  DatasetLookup none = [](const std::string&) -> std::shared_ptr<const Dataset> { return nullptr; };
  CHECK(code_of([&] { render_report("R", {{"T", "", {}, std::string("d9")}}, artifacts, none); }) ==
        ErrorCode::UnknownReference);
  CHECK(code_of([&] { render_report("R", {{"T", "", {"gone.svg"}, std::nullopt}}, artifacts, none); }) ==
        ErrorCode::UnknownReference);
}

TEST_CASE("report tables show at most fifty rows") {
  std::string text = "n\n";
  for (int i = 0; i < 80; ++i) text += std::to_string(i) + "\n";
  auto ds = std::make_shared<const Dataset>(csv(text));
  DatasetLookup lookup = [&](const std::string&) { return ds; };
  auto html = render_report("R", {{"T", "", {}, std::string("d1")}}, nullptr, lookup);
  CHECK(count_occurrences(html, "<tr><td>") == 50);
}

TEST_CASE("form fill examples") {
  CHECK(fill_template("Name: {{name}}", lookup_from_values(Json{{"name", "Ada"}})) == "Name: Ada");
  try {
    fill_template("{{a}} and {{b}} and {{c}}", lookup_from_values(Json{{"a", 1}}));
    FAIL("expected MissingField");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingField);
    CHECK(std::string(e.what()).find("b, c") != std::string::npos);
  }
  CHECK(fill_template("{{x}}|{{ y }}|{{x}}", lookup_from_values(Json{{"x", 0.1}, {"y", 2.0}})) == "0.1|2|0.1");
}

TEST_CASE("row-sourced fill matches manual substitution") {
  auto ds = csv(dataclaw::testing::read_text(dataclaw::testing::data_path("taxi_trips.csv")));
  const auto raw = naive_csv(dataclaw::testing::read_text(dataclaw::testing::data_path("taxi_trips.csv")));
  auto out = fill_template("Vendor {{VendorID}} paid {{fare_amount}} via {{payment_type}}", lookup_from_row(ds, 0));
  // Manual: shortest round-trip text of the numeric cells.
  const auto fare = format_number(std::stod(raw[1][5]));
  CHECK(out == "Vendor " + raw[1][0] + " paid " + fare + " via " + raw[1][4]);
}

TEST_CASE("registry registration rules") {
  ToolRegistry r;
  Executor noop = [](const Json&, ToolContext&) -> Json { return "ok"; };
  r.register_tool({"data_describe", "d", {}}, noop);
  CHECK(r.lookup("data_describe").has_value());
  CHECK(code_of([&] { r.register_tool({"data_describe", "d", {}}, noop); }) == ErrorCode::DuplicateName);
  r.register_tool({"report_style", "v1", {}, ToolOrigin::skill}, noop);
  const auto size = r.size();
  r.register_tool({"report_style", "v2", {}, ToolOrigin::skill}, noop);
  CHECK(r.size() == size);
  CHECK(r.lookup("report_style")->description == "v2");
  CHECK(code_of([&] { r.register_tool({"data_describe", "d", {}, ToolOrigin::skill}, noop); }) ==
        ErrorCode::DuplicateName);
  CHECK(r.list().front().name == "data_describe");
}

TEST_CASE("dispatch reports problems as ERROR observations") {
  Env env;
  CHECK(env.registry.dispatch("no_such_tool", Json::object(), env.ctx) == "ERROR: unknown tool no_such_tool");
  CHECK(env.registry.dispatch("data_query", Json{{"handle", "d1"}}, env.ctx) == "ERROR: missing required arg query");
  CHECK(env.registry.dispatch("data_describe", Json{{"handle", 5}}, env.ctx).rfind("ERROR: arg handle", 0) == 0);
  CHECK(env.registry.dispatch("data_describe", Json{{"handle", "d7"}}, env.ctx).rfind("ERROR: UnknownHandle", 0) == 0);
}

TEST_CASE("data_describe through dispatch returns schema and stats") {
  Env env;
  auto loaded = env.call("data_load", {{"path", "data/taxi.csv"}});
  CHECK(loaded["handle"] == "d1");
  CHECK(loaded["row_count"] == 100);
  auto described = env.call("data_describe", {{"handle", "d1"}});
  CHECK(described["row_count"] == 100);
  CHECK(described["columns"].size() == 8);
  CHECK(described["columns"][0]["name"] == "VendorID");
  CHECK(described["columns"][0]["dtype"] == "integer");
}

TEST_CASE("builtin pipeline: query, clean, chart, report, form") {
  Env env;
  env.call("data_load", {{"path", "data/taxi.csv"}});
  auto q = env.call("data_query", {{"handle", "d1"},
                                   {"query", Json::parse(R"({"group_by":["payment_type"],
                                      "select":["payment_type",{"agg":"count","col":"*","as":"n"}]})")}});
  CHECK(q["handle"] == "d2");
  CHECK(q["source"] == "d1");
  CHECK(q["rows"].size() == 2);

  auto cleaned = env.call("data_clean", {{"handle", "d1"}, {"ops", Json::parse(R"([{"op":"drop_outliers","col":"tip_amount"}])")}});
  CHECK(cleaned["handle"] == "d3");

  auto chart = env.call("chart_render", {{"handle", "d2"}, {"kind", "bar"}, {"x", "payment_type"}, {"y", "n"}});
  CHECK(chart["path"] == "artifacts/s1/chart.svg");
  auto report = env.call("report_generate", {{"title", "Taxi"},
                                             {"sections", Json::array({Json{{"heading", "Counts"},
                                                                            {"artifacts", Json::array({"chart.svg"})},
                                                                            {"table", "d2"}}})}});
  CHECK(report["path"] == "artifacts/s1/report.html");
  const auto html = dataclaw::testing::read_text(env.ws.root / "artifacts/s1/report.html");
  CHECK(html.find(dataclaw::testing::read_text(env.ws.root / "artifacts/s1/chart.svg")) != std::string::npos);

  dataclaw::testing::write_text(env.ws.data_dir() / "form.txt", "Trip by vendor {{VendorID}}: fare {{fare_amount}}\n");
  auto form = env.call("form_fill", {{"template", "data/form.txt"}, {"handle", "d1"}, {"row_index", 0}});
  CHECK(form["path"] == "artifacts/s1/form-filled.txt");
  CHECK(env.ctx.produced.size() == 3);
  CHECK(env.registry.dispatch("form_fill", {{"template", "../x.txt"}, {"values", Json::object()}}, env.ctx)
            .rfind("ERROR: PathEscape", 0) == 0);
}

TEST_CASE("dispatch never throws for fuzzed names and arguments") {
  Env env;
  env.call("data_load", {{"path", "data/taxi.csv"}});
  std::mt19937 rng(37);
  const auto specs = env.registry.list();
  const std::vector<Json> values = {Json(), Json(1), Json(-3.5), Json("d1"), Json("x"), Json(true),
                                    Json::array(), Json::object(), Json::array({1, "a"}),
                                    Json::parse(R"({"select":["fare_amount"],"limit":2})"),
                                    Json::parse(R"([{"op":"drop_duplicates"}])")};
  const std::vector<std::string> keys = {"handle", "query", "ops", "kind", "x", "y", "path", "title", "bins",
                                         "sections", "template", "values", "row_index", "top_k", "zzz"};
  for (int i = 0; i < 3000; ++i) {
    std::string name = rng() % 10 == 0 ? "random_" + std::to_string(rng() % 5) : specs[rng() % specs.size()].name;
    Json args = rng() % 15 == 0 ? values[rng() % values.size()] : Json::object();
    if (args.is_object()) {
      const auto n = rng() % 5;
      for (std::size_t k = 0; k < n; ++k) args[keys[rng() % keys.size()]] = values[rng() % values.size()];
    }
    std::string out;
    CHECK_NOTHROW(out = env.registry.dispatch(name, args, env.ctx));
  }
}
