#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tcusim/distances.hpp"
#include "tcusim/matrix.hpp"

namespace tcusim {

/// Binary point container:
///
///   "TCUJ" | version u8 | kind u8 | n u64le | d u64le | payload
///
/// kind is 0 hamming, 1 l2sq, 2 cosine. Hamming payloads are bit-packed rows
/// of ceil(d/8) bytes (coordinate i in byte i/8, bit i%8); the other kinds
/// store row-major little-endian IEEE-754 doubles.
inline constexpr std::uint8_t kDatasetVersion = 1;

struct Dataset {
  DistanceKind kind = DistanceKind::hamming;
  Matrix points;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

/// Ground truth as "p,q" lines under a "p,q" header.
void write_pairs_csv(std::ostream& out, const std::vector<IdPair>& pairs);
std::vector<IdPair> read_pairs_csv(std::istream& in);

/// Synthetic join instance. The first `planted` points of Q are copies of the
/// matching P points moved to exactly `planted_distance` (hamming) or just
/// inside it (l2sq, cosine). Every other cross pair is at least `background`
/// away; for cosine both values are similarities and background is an upper
/// bound.
struct PlantedSpec {
  std::size_t n = 64;
  std::size_t d = 32;
  DistanceKind kind = DistanceKind::hamming;
  std::size_t planted = 4;
  double planted_distance = 1.0;
  double background = 8.0;
  std::uint64_t seed = 1;
};

struct PlantedInstance {
  PointSet p;
  PointSet q;
  std::vector<IdPair> truth;  // sorted
};

/// Throws std::invalid_argument when the requested instance cannot be built.
PlantedInstance generate_planted(const PlantedSpec& spec);

}  // namespace tcusim
