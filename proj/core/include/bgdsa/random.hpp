#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace bgdsa {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from (master, stream). Pure function,
/// so adding streams never perturbs existing ones. SplitMix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

/// Uniform double in [0,1) from the top 53 bits of one 64-bit draw.
/// Bit-reproducible across standard libraries, unlike
/// std::uniform_real_distribution.
inline double u01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double normal01(Rng& rng) {
  return std::normal_distribution<double>{0.0, 1.0}(rng);
}

/// Runs fn(0..n-1), split over up to max_threads workers. Results must be
/// written to per-index slots by the caller; merge order is then
/// deterministic regardless of scheduling. Rethrows the first exception.
inline void parallel_for(int n, const std::function<void(int)>& fn,
                         unsigned max_threads = 0) {
  if (n <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned workers = max_threads == 0 ? hw : std::min(hw, max_threads);
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = static_cast<int>(w); i < n; i += static_cast<int>(workers)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace bgdsa
