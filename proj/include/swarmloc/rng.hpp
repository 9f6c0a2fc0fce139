#pragma once

#include <cstdint>
#include <random>

namespace swarmloc {

// splitmix64, used only to spread a (seed, purpose, index) triple into
// independent engine seeds so that reordering unrelated draws in one
// subsystem never shifts the streams of another.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(mix64(mix64(seed ^ mix64(purpose)) + index));
}

// stream purposes, kept distinct per subsystem
namespace stream {
constexpr std::uint64_t kVioDrift = 0x11;
constexpr std::uint64_t kDetector = 0x22;
constexpr std::uint64_t kLink = 0x33;
constexpr std::uint64_t kBench = 0x44;
}  // namespace stream

}  // namespace swarmloc
