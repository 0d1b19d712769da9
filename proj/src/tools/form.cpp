#include "dataclaw/tools/form.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw::tools {

namespace {

struct Placeholder {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing braces
  std::string name;
};

std::vector<Placeholder> scan(std::string_view text) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const auto close = text.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    auto name = trim(text.substr(pos + 2, close - pos - 2));
    if (name.empty() || name.find('{') != std::string_view::npos || name.find('\n') != std::string_view::npos) {
      pos += 2;
      continue;
    }
    out.push_back({pos, close + 2, std::string(name)});
    pos = close + 2;
  }
  return out;
}

}  // namespace

std::vector<std::string> template_fields(std::string_view text) {
  std::vector<std::string> names;
  for (auto& p : scan(text)) {
    if (std::find(names.begin(), names.end(), p.name) == names.end()) names.push_back(std::move(p.name));
  }
  return names;
}

std::string fill_template(std::string_view text, const FieldLookup& lookup) {
  const auto placeholders = scan(text);
  std::map<std::string, std::string> values;
  std::vector<std::string> missing;
  for (const auto& p : placeholders) {
    if (values.count(p.name) || std::find(missing.begin(), missing.end(), p.name) != missing.end()) continue;
    if (auto v = lookup(p.name)) {
      values.emplace(p.name, std::move(*v));
    } else {
      missing.push_back(p.name);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::MissingField, fmt::format("unresolved fields: {}", fmt::join(missing, ", ")));
  }
  std::string out;
  std::size_t last = 0;
  for (const auto& p : placeholders) {
    out.append(text.substr(last, p.begin - last));
    out += values.at(p.name);
    last = p.end;
  }
  out.append(text.substr(last));
  return out;
}

std::string render_value(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) return format_number(v.get<double>());
  return v.dump();
}

FieldLookup lookup_from_values(const Json& values) {
  if (!values.is_object()) throw Error(ErrorCode::MissingField, "values must be an object");
  return [values](const std::string& field) -> std::optional<std::string> {
    auto it = values.find(field);
    if (it == values.end()) return std::nullopt;
    return render_value(*it);
  };
}

FieldLookup lookup_from_row(const Dataset& ds, std::size_t row_index) {
  if (row_index >= ds.rows.size()) {
    throw Error(ErrorCode::MissingField,
                fmt::format("row_index {} out of range ({} rows in {})", row_index, ds.rows.size(), ds.handle));
  }
  return [columns = ds.columns, row = ds.rows[row_index]](const std::string& field) -> std::optional<std::string> {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == field) return render(row[i]);
    }
    return std::nullopt;
  };
}

std::string filled_name(std::string_view template_path) {
  const std::filesystem::path p(template_path);
  auto stem = p.stem().string();
  if (stem.empty()) stem = "form";
  return stem + "-filled" + p.extension().string();
}

}  // namespace dataclaw::tools
