#pragma once

#include <cstdint>
#include <string_view>

namespace dataclaw {

/// ceil(bytes / 4). Deterministic and monotone in byte length; no tokenizer.
constexpr std::int64_t estimate_tokens(std::string_view text) noexcept {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

}  // namespace dataclaw
