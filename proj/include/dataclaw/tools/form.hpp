#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dataclaw/core/types.hpp"
#include "dataclaw/tools/dataset.hpp"

namespace dataclaw::tools {

// Placeholder names in order of first appearance; `{{ name }}` is trimmed.
std::vector<std::string> template_fields(std::string_view text);

using FieldLookup = std::function<std::optional<std::string>(const std::string& field)>;

/// Replaces every `{{field}}`. MissingField names every unresolved field.
std::string fill_template(std::string_view text, const FieldLookup& lookup);

// Strings as-is, numbers in shortest round-trip form, null empty.
std::string render_value(const Json& v);

FieldLookup lookup_from_values(const Json& values);
FieldLookup lookup_from_row(const Dataset& ds, std::size_t row_index);

// "invoice.txt" -> "invoice-filled.txt"
std::string filled_name(std::string_view template_path);

}  // namespace dataclaw::tools
