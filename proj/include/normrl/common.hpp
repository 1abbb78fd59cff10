#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace normrl {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON syntax, schema, undeclared identifiers ...).
struct ParseError : Error {
  using Error::Error;
};

/// Invalid configuration (scenario, training, shaping, CLI arguments).
struct ConfigError : Error {
  using Error::Error;
};

/// A grid cell; col grows east, row grows south.
struct Cell {
  int col = 0;
  int row = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline int chebyshev(const Cell& a, const Cell& b) {
  int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  return dc > dr ? dc : dr;
}

enum class Orientation : uint8_t { North = 0, East = 1, South = 2, West = 3 };

inline Cell orientation_vector(Orientation o) {
  switch (o) {
    case Orientation::North: return {0, -1};
    case Orientation::East: return {1, 0};
    case Orientation::South: return {0, 1};
    case Orientation::West: return {-1, 0};
  }
  return {0, 0};
}

/// FNV-1a over a byte string; used for fingerprints and seed derivation.
inline uint64_t fnv1a(std::string_view s, uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// splitmix64 finalizer; mixes two seeds into one stream-independent seed.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace normrl
