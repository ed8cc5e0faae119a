#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcusim/matrix.hpp"
#include "tcusim/tcu.hpp"

namespace tcusim {

enum class DistanceKind { hamming, l2_squared, cosine };
enum class Orientation { distance, similarity };

/// A distance (or similarity) that is an inner product of lifted points,
/// D(x, y) = f(x) . g(y).
struct IpDistance {
  DistanceKind kind = DistanceKind::hamming;
  std::size_t d = 0;

  /// "hamming", "l2sq" (or "l2_squared"), "cosine".
  static IpDistance parse(std::string_view kind, std::size_t d);

  std::size_t lifted_dim() const;
  Orientation orientation() const {
    return kind == DistanceKind::cosine ? Orientation::similarity : Orientation::distance;
  }
  /// D <= r for distances, sim >= r for similarities. Ties count as matches.
  bool accepts(double value, double r) const {
    return orientation() == Orientation::distance ? value <= r : value >= r;
  }
  std::string name() const;

  /// Monotone map to a distance scale: identity for distances, the angle
  /// acos(sim) for cosine. Near/approx/far categories use this scale.
  double native(double value) const;
  /// Category of a verified value for threshold r and approximation factor c.
  int category(double value, double r, double c) const;  // 0 near, 1 approx, 2 far
};

/// Rows of `data` are points; ids[i] labels row i.
class PointSet {
 public:
  PointSet() = default;
  /// Ids default to 0..n-1.
  explicit PointSet(Matrix data);
  PointSet(Matrix data, std::vector<std::uint64_t> ids);

  std::size_t size() const { return data_.rows(); }
  std::size_t dim() const { return data_.cols(); }
  const Matrix& data() const { return data_; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }
  std::span<const double> point(std::size_t i) const { return data_.row(i); }

 private:
  Matrix data_;
  std::vector<std::uint64_t> ids_;
};

std::vector<double> feature_map_f(std::span<const double> x, const IpDistance& dist);
std::vector<double> feature_map_g(std::span<const double> y, const IpDistance& dist);

/// Hamming count, squared Euclidean distance, or cosine similarity computed
/// directly from the coordinates.
double exact_distance(std::span<const double> x, std::span<const double> y, const IpDistance& dist);

enum class LiftSide { f, g };

/// Stacks f (or g) of every point as rows of an n x d' matrix.
Matrix lift_points(const PointSet& points, const IpDistance& dist, LiftSide side);

struct IdPair {
  std::uint64_t p;
  std::uint64_t q;
  friend auto operator<=>(const IdPair&, const IdPair&) = default;
};

/// Candidates split by verified distance: near <= r, approx in (r, cr], far > cr.
struct CandidateCounts {
  std::uint64_t near = 0;
  std::uint64_t approx = 0;
  std::uint64_t far = 0;
  std::uint64_t total() const { return near + approx + far; }
  CandidateCounts& operator+=(const CandidateCounts& o) {
    near += o.near;
    approx += o.approx;
    far += o.far;
    return *this;
  }
  friend bool operator==(const CandidateCounts&, const CandidateCounts&) = default;
};

struct RepetitionStats {
  std::size_t concatenation = 0;
  std::size_t buckets = 0;         // distinct keys over P u Q
  std::size_t joined_buckets = 0;  // keys present on both sides
  /// Key floor(log2(p_j + q_j)) -> number of buckets of that size class.
  std::map<std::size_t, std::size_t> size_histogram;
  CandidateCounts candidates;
  CostLedger ledger;
  friend bool operator==(const RepetitionStats&, const RepetitionStats&) = default;
};

struct JoinStats {
  std::vector<RepetitionStats> repetitions;  // empty for the brute-force join
  CandidateCounts candidates;                // LSH join only
  std::uint64_t evaluated_pairs = 0;         // inner products computed
  /// Largest |matmul value - exact value| over all verified candidates.
  double max_value_mismatch = 0.0;
  friend bool operator==(const JoinStats&, const JoinStats&) = default;
};

struct JoinResult {
  std::vector<IdPair> pairs;  // sorted, unique
  JoinStats stats;
  CostLedger ledger;
  friend bool operator==(const JoinResult&, const JoinResult&) = default;
};

struct JoinOptions {
  /// Drop pairs whose two ids coincide (self-join of a set with itself).
  bool drop_self_pairs = false;
  unsigned threads = 1;
};

/// F_P * G_Q^T on the simulated TCU, then thresholding. Values close to r are
/// re-checked with exact_distance so the output matches a scalar double loop.
JoinResult brute_force_join(const PointSet& p, const PointSet& q, const IpDistance& dist, double r,
                            const TcuConfig& cfg, CostLedger& ledger, const JoinOptions& options = {});

/// Counts every (p, q) pair by category with exact_distance. Feeds the
/// pair counts of the LSH join cost bound.
CandidateCounts pair_census(const PointSet& p, const PointSet& q, const IpDistance& dist, double r, double c,
                            bool drop_self_pairs = false);

}  // namespace tcusim
