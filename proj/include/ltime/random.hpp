#pragma once

#include <cstdint>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace ltime {

/// Counter-style splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// A reproducible random stream keyed by (seed, stream_id). The harness uses
/// the path index as stream_id, so a path's draws never depend on which
/// worker simulated it.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_id_(stream_id),
        engine_(splitmix64(seed) ^ splitmix64(splitmix64(stream_id) + 0x632be59bd9b4e019ULL)) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  double exponential() { return exponential_(engine_); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
  boost::random::exponential_distribution<double> exponential_;
};

}  // namespace ltime
