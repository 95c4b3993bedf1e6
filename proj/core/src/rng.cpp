#include "rpg/rng.hpp"

#include <cmath>
#include <numbers>

#include "rpg/error.hpp"

namespace rpg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  const std::uint64_t key = splitmix64(seed_ ^ 0x5851f42d4c957f2dULL);
  return splitmix64(key + 0x9e3779b97f4a7c15ULL * (counter_++));
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw BadDimensions("RngStream::index: empty range");
  __extension__ using u128 = unsigned __int128;
  const u128 wide = static_cast<u128>(next_u64()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

double RngStream::sign() { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

RngStream RngStream::substream(std::uint64_t key) const {
  return RngStream(splitmix64(seed_ * 0x2545f4914f6cdd1dULL + splitmix64(key)), 0);
}

Vector rademacher_probe(RngStream& rng, int n) {
  if (n < 1) throw BadDimensions("rademacher_probe: n must be >= 1");
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.sign();
  return v;
}

}  // namespace rpg
