#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace om {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  return mix64(mix64(mix64(base ^ mix64(a)) ^ mix64(b + 0x51ULL)) ^ mix64(c + 0xa3ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// FNV-1a over raw bytes.
class Fingerprint {
 public:
  void update(const void* data, std::size_t n) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void update_value(const T& v) noexcept {
    update(&v, sizeof(T));
  }
  void update_string(std::string_view s) noexcept {
    update_value(s.size());
    update(s.data(), s.size());
  }
  std::uint64_t digest() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t v);

// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

// Runs fn(i) for i in [0, n) over `workers` threads; workers <= 1 runs inline.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);
std::size_t default_workers();

// Ordinary least squares fit of y = a + b x; returns {a, b, r_squared}.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace om
