#include "stou/random.hpp"

namespace stou {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t dataset, std::uint64_t replication) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ dataset);
  h = splitmix64(h ^ (replication + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace stou
