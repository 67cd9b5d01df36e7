#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lsm {

/// Thrown for invalid configuration (bad parameters, divisibility violations).
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical operation fails (non-SPD pivot, divergence, ...).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw numerical_error(msg);
}

// ---------------------------------------------------------------------------
// PCG32 (minimal member of the PCG family, 64-bit state / 32-bit output).
// Stream order is documented wherever draws are consumed; one double uses
// two consecutive 32-bit outputs (high word first).
// ---------------------------------------------------------------------------
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 54u) {
    state_ = 0u;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() {
    std::uint64_t hi = next_u32();
    std::uint64_t lo = next_u32();
    std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// ---------------------------------------------------------------------------
// FNV-1a 64-bit, used to fingerprint assembled matrices and config tuples.
// ---------------------------------------------------------------------------
class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ULL;
    }
  }
  template <class T>
  void add(const T& v) {
    add_bytes(&v, sizeof(T));
  }
  template <class T>
  void add_span(const std::vector<T>& v) {
    add(v.size());
    if (!v.empty()) add_bytes(v.data(), v.size() * sizeof(T));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

// ---------------------------------------------------------------------------
// Deterministic parallel loop: contiguous blocks per worker, results must be
// written to disjoint, index-addressed slots by the callable.
// ---------------------------------------------------------------------------
inline void parallel_for(std::size_t n, int degree,
                         const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  if (degree <= 0) degree = static_cast<int>(std::thread::hardware_concurrency());
  if (degree <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(degree, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lsm
