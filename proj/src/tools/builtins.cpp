#include "dataclaw/tools/builtins.hpp"

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/sandbox.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/memory/global_memory.hpp"
#include "dataclaw/persist/artifact_store.hpp"
#include "dataclaw/persist/workspace.hpp"
#include "dataclaw/tools/chart.hpp"
#include "dataclaw/tools/clean.hpp"
#include "dataclaw/tools/dataset.hpp"
#include "dataclaw/tools/form.hpp"
#include "dataclaw/tools/query.hpp"
#include "dataclaw/tools/report.hpp"
#include "dataclaw/tools/stats.hpp"

namespace dataclaw::tools {

namespace {

ArgSpec arg(std::string name, ArgType type, bool required) { return ArgSpec{std::move(name), {type}, required}; }

DatasetStore& datasets(ToolContext& ctx) {
  if (!ctx.datasets) throw Error(ErrorCode::Precondition, "no dataset store in this context");
  return *ctx.datasets;
}

ArtifactStore& artifacts(ToolContext& ctx) {
  if (!ctx.artifacts) throw Error(ErrorCode::Precondition, "no artifact store in this context");
  return *ctx.artifacts;
}

const WorkspaceLayout& workspace(ToolContext& ctx) {
  if (!ctx.workspace) throw Error(ErrorCode::Precondition, "no workspace in this context");
  return *ctx.workspace;
}

Json columns_json(const Dataset& ds) {
  Json cols = Json::array();
  for (const auto& c : ds.columns) cols.push_back({{"name", c.name}, {"dtype", to_string(c.dtype)}});
  return cols;
}

Json save_artifact(ToolContext& ctx, std::string_view name, const std::string& bytes, const std::string& media) {
  auto a = artifacts(ctx).save(ctx.session_id, name, bytes, media);
  ctx.produced.push_back(a);
  return {{"artifact_id", a.id}, {"path", a.relative_path}, {"media_type", a.media_type}, {"byte_length", a.byte_length}};
}

Json data_load(const Json& args, ToolContext& ctx) {
  auto ds = load_table(args.at("path").get<std::string>(), workspace(ctx).root);
  const auto rows = ds.rows.size();
  auto cols = columns_json(ds);
  auto path = ds.source_path;
  auto handle = datasets(ctx).add(std::move(ds));
  return {{"handle", handle}, {"path", path}, {"row_count", rows}, {"columns", cols}};
}

Json data_describe(const Json& args, ToolContext& ctx) {
  return describe(*datasets(ctx).get(args.at("handle").get<std::string>()));
}

Json data_profile(const Json& args, ToolContext& ctx) {
  const auto& handle = args.at("handle").get_ref<const std::string&>();
  Json out = {{"handle", handle}};
  out.update(to_json(profile(*datasets(ctx).get(handle))));
  return out;
}

Json data_query(const Json& args, ToolContext& ctx) {
  auto source = datasets(ctx).get(args.at("handle").get<std::string>());
  auto result = run_query(*source, parse_query(args.at("query")));
  result.source_path = source->source_path;
  auto handle = datasets(ctx).add(result);
  result.handle = handle;
  Json out = table_summary(result, kQueryPreviewRows);
  out["source"] = source->handle;
  return out;
}

Json data_clean(const Json& args, ToolContext& ctx) {
  auto source = datasets(ctx).get(args.at("handle").get<std::string>());
  auto cleaned = apply_clean(*source, parse_clean_ops(args.at("ops")));
  const auto removed = source->rows.size() - cleaned.rows.size();
  auto handle = datasets(ctx).add(cleaned);
  return {{"handle", handle},
          {"source", source->handle},
          {"row_count", cleaned.rows.size()},
          {"rows_removed", removed},
          {"columns", columns_json(cleaned)}};
}

Json chart_render(const Json& args, ToolContext& ctx) {
  auto ds = datasets(ctx).get(args.at("handle").get<std::string>());
  Json spec_json = args;
  spec_json.erase("handle");
  const auto spec = parse_chart_spec(spec_json);
  auto svg = render_chart(*ds, spec);
  return save_artifact(ctx, "chart.svg", svg, "image/svg+xml");
}

Json report_generate(const Json& args, ToolContext& ctx) {
  const auto title = args.at("title").get<std::string>();
  const auto sections = parse_report_sections(args.value("sections", Json()));
  auto& store = artifacts(ctx);
  ArtifactLookup find_artifact = [&](const std::string& ref) -> std::optional<ResolvedArtifact> {
    auto a = store.resolve(ctx.session_id, ref);
    if (!a) return std::nullopt;
    return ResolvedArtifact{*a, store.read(*a)};
  };
  DatasetLookup find_dataset = [&](const std::string& handle) { return datasets(ctx).get(handle); };
  auto html = render_report(title, sections, find_artifact, find_dataset);
  return save_artifact(ctx, "report.html", html, "text/html");
}

Json form_fill(const Json& args, ToolContext& ctx) {
  const auto template_path = args.at("template").get<std::string>();
  const auto resolved = validate_workspace_path(template_path, workspace(ctx).root);
  const auto text = read_file(resolved.string());
  FieldLookup lookup;
  if (args.contains("values") && !args.at("values").is_null()) {
    lookup = lookup_from_values(args.at("values"));
  } else if (args.contains("handle") && !args.at("handle").is_null()) {
    const auto& idx = args.value("row_index", Json(0));
    if (!idx.is_number_integer() || idx.get<std::int64_t>() < 0) {
      throw Error(ErrorCode::MissingField, "row_index must be a non-negative integer");
    }
    auto ds = datasets(ctx).get(args.at("handle").get<std::string>());
    lookup = lookup_from_row(*ds, idx.get<std::size_t>());
  } else {
    throw Error(ErrorCode::MissingField, "form_fill needs 'values' or 'handle' with 'row_index'");
  }
  const auto name = filled_name(template_path);
  auto out = save_artifact(ctx, name, fill_template(text, lookup), media_type_for(name));
  out["fields"] = template_fields(text);
  return out;
}

Json memory_search(const Json& args, ToolContext& ctx) {
  if (!ctx.memory) throw Error(ErrorCode::Precondition, "no global memory in this context");
  std::size_t top_k = 5;
  if (args.contains("top_k")) {
    const auto& k = args.at("top_k");
    if (!k.is_number_integer() || k.get<std::int64_t>() <= 0) throw Error(ErrorCode::Precondition, "top_k must be positive");
    top_k = k.get<std::size_t>();
  }
  Json hits = Json::array();
  for (const auto& h : ctx.memory->search(args.at("query").get<std::string>(), top_k)) {
    hits.push_back({{"score", h.score}, {"snippet", h.snippet}, {"source", h.source}});
  }
  return {{"hits", hits}};
}

}  // namespace

Json table_summary(const Dataset& ds, std::size_t preview_rows) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < std::min(preview_rows, ds.rows.size()); ++r) {
    Json row = Json::array();
    for (const auto& cell : ds.rows[r]) row.push_back(to_json(cell));
    rows.push_back(std::move(row));
  }
  return {{"handle", ds.handle}, {"row_count", ds.rows.size()}, {"columns", columns_json(ds)}, {"rows", rows}};
}

void register_builtin_tools(ToolRegistry& registry) {
  using T = ArgType;
  registry.register_tool({"data_load", "Load a workspace CSV/TSV file; returns a dataset handle and its schema.",
                          {arg("path", T::string, true)}},
                         data_load);
  registry.register_tool({"data_describe", "Schema, row count and min/max/mean of numeric columns.",
                          {arg("handle", T::string, true)}},
                         data_describe);
  registry.register_tool({"data_profile",
                          "Data quality profile: missing values, distinct counts, duplicates, IQR outliers.",
                          {arg("handle", T::string, true)}},
                         data_profile);
  registry.register_tool(
      {"data_query",
       "Run a structured query {select, where, derive, group_by, order_by, limit}; result gets a new handle.",
       {arg("handle", T::string, true), arg("query", T::object, true)}},
      data_query);
  registry.register_tool(
      {"data_clean",
       "Apply cleaning ops in order (drop_duplicates, fill_missing, drop_outliers); result gets a new handle.",
       {arg("handle", T::string, true), arg("ops", T::array, true)}},
      data_clean);
  registry.register_tool({"chart_render",
                          "Render an SVG chart (bar, line, scatter, histogram) from a dataset.",
                          {arg("handle", T::string, true), arg("kind", T::string, true), arg("x", T::string, true),
                           ArgSpec{"y", {T::string, T::object}, false}, arg("title", T::string, false),
                           arg("bins", T::number, false)}},
                         chart_render);
  registry.register_tool({"report_generate",
                          "Write a self-contained HTML report from sections with text, charts and tables.",
                          {arg("title", T::string, true), arg("sections", T::array, false)}},
                         report_generate);
  registry.register_tool({"form_fill",
                          "Fill {{field}} placeholders of a workspace template from values or a dataset row.",
                          {arg("template", T::string, true), arg("values", T::object, false),
                           arg("handle", T::string, false), arg("row_index", T::number, false)}},
                         form_fill);
  registry.register_tool({"memory_search", "Keyword search over long-term memory (MEMORY.md, SOULS.md).",
                          {arg("query", T::string, true), arg("top_k", T::number, false)}},
                         memory_search);
}

}  // namespace dataclaw::tools
