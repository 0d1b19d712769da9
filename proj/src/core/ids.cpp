#include "dataclaw/core/ids.hpp"

#include <random>

#include <fmt/format.h>

namespace dataclaw {

std::string random_id() {
  thread_local std::mt19937_64 rng{[] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }()};
  return fmt::format("{:016x}{:016x}", rng(), rng());
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string derived_id(std::string_view key) {
  const auto hi = fnv1a64(key);
  const auto lo = fnv1a64(key, 0x84222325cbf29ce4ULL ^ 0x9e3779b97f4a7c15ULL);
  return fmt::format("{:016x}{:016x}", hi, lo);
}

std::string SequentialIds::next() {
  return fmt::format("{:032x}", next_.fetch_add(1));
}

IdSource& random_ids() {
  static RandomIds ids;
  return ids;
}

}  // namespace dataclaw
