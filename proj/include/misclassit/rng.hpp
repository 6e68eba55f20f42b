#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <random>

namespace misclassit {

std::uint64_t splitmix64(std::uint64_t x);

/// Derives a sub-stream key from a base seed and a path of identifiers, so
/// that (seed, replicate, tag) always maps to the same stream.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

/// Random stream with platform-independent draws (no std distributions).
class Stream {
 public:
  explicit Stream(std::uint64_t key) : eng_(key) {}
  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
      : eng_(derive_seed(seed, ids)) {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal by inversion.
  double normal();

 private:
  std::mt19937_64 eng_;
};

/// Thread count from an explicit value, else MISCLASSIT_THREADS, else 1.
int resolve_threads(std::optional<int> requested);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace misclassit
