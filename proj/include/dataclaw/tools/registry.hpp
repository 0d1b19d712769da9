#pragma once

#include <functional>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "dataclaw/core/types.hpp"

namespace dataclaw {
class ArtifactStore;
class GlobalMemory;
struct WorkspaceLayout;
}  // namespace dataclaw

namespace dataclaw::tools {

class DatasetStore;

enum class ArgType { string, number, boolean, object, array };

std::string_view to_string(ArgType t);

struct ArgSpec {
  std::string name;
  // Accepted JSON types; more than one only where a value may take two
  // shapes (chart y: column name or aggregate).
  std::vector<ArgType> types;
  bool required = false;
};

enum class ToolOrigin { builtin, skill };

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ArgSpec> args;
  ToolOrigin origin = ToolOrigin::builtin;
  // Skill tools accept arguments beyond the declared ones.
  bool open_args = false;
};

Json to_json(const ToolSpec& spec);

// Lowercase snake_case: [a-z][a-z0-9_]*
bool valid_tool_name(std::string_view name);

/// Everything a tool invocation may touch. Artifacts saved during the call
/// are appended to `produced`.
struct ToolContext {
  std::string session_id;
  const WorkspaceLayout* workspace = nullptr;
  DatasetStore* datasets = nullptr;
  ArtifactStore* artifacts = nullptr;
  GlobalMemory* memory = nullptr;
  std::vector<Artifact> produced;
};

// String results become the observation verbatim; anything else is dumped
// as compact JSON.
using Executor = std::function<Json(const Json& args, ToolContext& ctx)>;

class ToolRegistry {
 public:
  /// DuplicateName when the name is taken, except that a skill tool may
  /// replace an earlier skill tool (keeping its position).
  void register_tool(ToolSpec spec, Executor executor);

  // Removes a skill tool; builtins cannot be removed.
  bool remove_skill_tool(const std::string& name);

  /// Replaces every skill-origin tool in one step.
  void replace_skill_tools(std::vector<std::pair<ToolSpec, Executor>> tools);

  std::optional<ToolSpec> lookup(const std::string& name) const;
  std::vector<ToolSpec> list() const;
  std::size_t size() const;

  /// Validates args, runs the executor and renders the observation. Never
  /// throws: every failure comes back as "ERROR: ...".
  std::string dispatch(const std::string& name, const Json& args, ToolContext& ctx) const;

 private:
  struct Entry {
    ToolSpec spec;
    std::shared_ptr<const Executor> run;
  };

  mutable std::shared_mutex mu_;
  std::vector<Entry> entries_;
};

/// Checks args against the schema; returns the problem or nullopt.
std::optional<std::string> validate_args(const ToolSpec& spec, const Json& args);

std::string render_observation(const Json& result);

}  // namespace dataclaw::tools
