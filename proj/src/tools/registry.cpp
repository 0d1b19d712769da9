#include "dataclaw/tools/registry.hpp"

#include <algorithm>
#include <mutex>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"

namespace dataclaw::tools {

namespace {

bool matches(const Json& v, ArgType t) {
  switch (t) {
    case ArgType::string: return v.is_string();
    case ArgType::number: return v.is_number();
    case ArgType::boolean: return v.is_boolean();
    case ArgType::object: return v.is_object();
    case ArgType::array: return v.is_array();
  }
  return false;
}

std::string type_list(const std::vector<ArgType>& types) {
  std::string out;
  for (auto t : types) {
    if (!out.empty()) out += " or ";
    out += to_string(t);
  }
  return out;
}

}  // namespace

std::string_view to_string(ArgType t) {
  switch (t) {
    case ArgType::string: return "string";
    case ArgType::number: return "number";
    case ArgType::boolean: return "boolean";
    case ArgType::object: return "object";
    case ArgType::array: return "array";
  }
  return "?";
}

Json to_json(const ToolSpec& spec) {
  Json args = Json::object();
  for (const auto& a : spec.args) {
    Json type = a.types.size() == 1 ? Json(to_string(a.types.front())) : Json::array();
    if (a.types.size() != 1) {
      for (auto t : a.types) type.push_back(to_string(t));
    }
    args[a.name] = {{"type", type}, {"required", a.required}};
  }
  return {{"name", spec.name},
          {"description", spec.description},
          {"args", args},
          {"origin", spec.origin == ToolOrigin::builtin ? "builtin" : "skill"}};
}

bool valid_tool_name(std::string_view name) {
  if (name.empty() || name.front() < 'a' || name.front() > 'z') return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
}

void ToolRegistry::register_tool(ToolSpec spec, Executor executor) {
  if (!valid_tool_name(spec.name)) {
    throw Error(ErrorCode::Precondition, fmt::format("tool name '{}' is not lowercase snake_case", spec.name));
  }
  std::unique_lock lock(mu_);
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.spec.name == spec.name; });
  auto run = std::make_shared<const Executor>(std::move(executor));
  if (it != entries_.end()) {
    if (it->spec.origin == ToolOrigin::skill && spec.origin == ToolOrigin::skill) {
      *it = Entry{std::move(spec), std::move(run)};
      return;
    }
    throw Error(ErrorCode::DuplicateName, fmt::format("tool '{}' is already registered", spec.name));
  }
  entries_.push_back(Entry{std::move(spec), std::move(run)});
}

bool ToolRegistry::remove_skill_tool(const std::string& name) {
  std::unique_lock lock(mu_);
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const Entry& e) { return e.spec.name == name && e.spec.origin == ToolOrigin::skill; });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

void ToolRegistry::replace_skill_tools(std::vector<std::pair<ToolSpec, Executor>> tools) {
  std::vector<Entry> next;
  {
    std::shared_lock lock(mu_);
    for (const auto& e : entries_) {
      if (e.spec.origin == ToolOrigin::builtin) next.push_back(e);
    }
  }
  for (auto& [spec, run] : tools) {
    spec.origin = ToolOrigin::skill;
    const bool taken = std::any_of(next.begin(), next.end(), [&](const Entry& e) { return e.spec.name == spec.name; });
    if (taken || !valid_tool_name(spec.name)) continue;
    next.push_back(Entry{std::move(spec), std::make_shared<const Executor>(std::move(run))});
  }
  std::unique_lock lock(mu_);
  entries_ = std::move(next);
}

std::optional<ToolSpec> ToolRegistry::lookup(const std::string& name) const {
  std::shared_lock lock(mu_);
  for (const auto& e : entries_) {
    if (e.spec.name == name) return e.spec;
  }
  return std::nullopt;
}

std::vector<ToolSpec> ToolRegistry::list() const {
  std::shared_lock lock(mu_);
  std::vector<ToolSpec> out;
  for (const auto& e : entries_) out.push_back(e.spec);
  return out;
}

std::size_t ToolRegistry::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::optional<std::string> validate_args(const ToolSpec& spec, const Json& args) {
  if (!args.is_object()) return std::string("arguments must be a JSON object");
  for (const auto& a : spec.args) {
    auto it = args.find(a.name);
    if (it == args.end() || it->is_null()) {
      if (a.required) return "missing required arg " + a.name;
      continue;
    }
    if (!std::any_of(a.types.begin(), a.types.end(), [&](ArgType t) { return matches(*it, t); })) {
      return fmt::format("arg {} must be {}", a.name, type_list(a.types));
    }
  }
  if (!spec.open_args) {
    for (const auto& [key, _] : args.items()) {
      const bool known = std::any_of(spec.args.begin(), spec.args.end(), [&](const ArgSpec& a) { return a.name == key; });
      if (!known) return fmt::format("unknown arg {} for tool {}", key, spec.name);
    }
  }
  return std::nullopt;
}

std::string render_observation(const Json& result) {
  if (result.is_string()) return result.get<std::string>();
  return result.dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string ToolRegistry::dispatch(const std::string& name, const Json& args, ToolContext& ctx) const {
  try {
    ToolSpec spec;
    std::shared_ptr<const Executor> run;
    {
      std::shared_lock lock(mu_);
      auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.spec.name == name; });
      if (it == entries_.end()) return "ERROR: unknown tool " + name;
      spec = it->spec;
      run = it->run;
    }
    if (auto problem = validate_args(spec, args)) return "ERROR: " + *problem;
    return render_observation((*run)(args, ctx));
  } catch (const Error& e) {
    return fmt::format("ERROR: {}: {}", to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fmt::format("ERROR: {}", e.what());
  } catch (...) {
    return "ERROR: tool failed";
  }
}

}  // namespace dataclaw::tools
