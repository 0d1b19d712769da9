#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

namespace dataclaw {

/// 128 random bits as 32 lowercase hex digits.
std::string random_id();

/// Stable 128-bit id derived from a key (two independent FNV-1a lanes).
/// Used where an id must be a pure function of its inputs, e.g. chat routing.
std::string derived_id(std::string_view key);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

class IdSource {
 public:
  virtual ~IdSource() = default;
  virtual std::string next() = 0;
};

class RandomIds final : public IdSource {
 public:
  std::string next() override { return random_id(); }
};

// Counter-backed ids (zero-padded hex) for deterministic tests and golden files.
class SequentialIds final : public IdSource {
 public:
  explicit SequentialIds(std::uint64_t start = 1) : next_(start) {}
  std::string next() override;

 private:
  std::atomic<std::uint64_t> next_;
};

IdSource& random_ids();

}  // namespace dataclaw
