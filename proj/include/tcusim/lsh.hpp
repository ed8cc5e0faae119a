#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "tcusim/distances.hpp"
#include "tcusim/tcu.hpp"

namespace tcusim {

/// (r, cr, p1, p2) sensitivity of a base family, with rho = log(1/p1)/log(1/p2).
struct LshParams {
  double r = 0.0;
  double c = 2.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double rho = 0.0;

  /// Rejects p1 <= p2, c <= 1 and probabilities outside [0, 1].
  void validate() const;
};

using HashFunction = std::function<std::uint64_t(std::span<const double>)>;

/// A locality-sensitive family for one ip-distance. The collision curve is
/// expressed on the distance's native scale (see IpDistance::native).
class LshFamily {
 public:
  virtual ~LshFamily() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual DistanceKind distance_kind() const = 0;
  /// Pr[h(x) = h(y)] as a function of native distance; non-increasing.
  virtual double collision_probability(double native_distance) const = 0;
  /// Deterministic in seed.
  virtual HashFunction sample(std::uint64_t seed) const = 0;

  /// p1 = curve(native(r)), p2 = curve(c * native(r)).
  LshParams sensitivity(double r, double c) const;
};

/// h(x) = x_i for a uniform coordinate i; curve 1 - t/d in Hamming distance t.
std::unique_ptr<LshFamily> bit_sampling_family(std::size_t d);

/// h(x) = [w . x >= 0] for Gaussian w; curve 1 - theta/pi in angle theta.
std::unique_ptr<LshFamily> simhash_family(std::size_t d);

/// L_low tables concatenate k_low base hashes, L_high tables concatenate
/// k_high. Tables [0, L_low) are the low ones.
struct RepetitionPlan {
  LshParams params;
  double p2_target = 0.0;
  double k = 0.0;
  std::size_t k_low = 0;
  std::size_t k_high = 0;
  std::size_t L_low = 0;
  std::size_t L_high = 0;

  std::size_t tables() const { return L_low + L_high; }
  std::size_t concatenation(std::size_t table) const { return table < L_low ? k_low : k_high; }
  /// L_low * p1^k_low + L_high * p1^k_high.
  double expected_near_collisions() const;
};

/// Targets p2 = m^{3/2} / (tau n), clamped to at most p2'. Integral k uses
/// L = ceil(p1^-k) tables of one length; otherwise the mixed pair minimizing
/// L_low * cost(k_low) + L_high * cost(k_high), cost(k) = n + n^2 p2^k,
/// subject to expected_near_collisions() >= 1.
RepetitionPlan plan_repetitions(const LshParams& params, std::size_t n, const TcuConfig& cfg);

/// Bucketed join: for every table each point is keyed by its concatenated
/// hash; every bucket with members on both sides is brute-force joined on the
/// TCU. Each candidate is verified with exact_distance.
JoinResult lsh_join(const PointSet& p, const PointSet& q, const IpDistance& dist, double r, const LshFamily& family,
                    const RepetitionPlan& plan, const TcuConfig& cfg, std::uint64_t seed, CostLedger& ledger,
                    const JoinOptions& options = {});

/// Mean far candidates per point of P per table.
double far_collisions_per_point(const JoinResult& result, std::size_t n);

/// p1^{rho-1} (n tau m^{-3/2})^rho (near tau m^{-3/2} + n) + tau m^{-3/2} approx,
/// evaluated with constant 1 and optionally multiplied by the dimension d.
double lsh_join_cost_bound(const RepetitionPlan& plan, const IpDistance& dist, const TcuConfig& cfg, std::size_t n,
                           std::uint64_t near_count, std::uint64_t approx_count, bool include_dimension = true);

}  // namespace tcusim
