#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcusim/matrix.hpp"
#include "tcusim/tcu.hpp"

namespace tcusim {

enum class EntryKind { gaussian, rademacher, sparse };

/// Entry distribution of the per-level JL matrices. All three have unit
/// expected squared column norm after scaling.
struct EntryDistribution {
  EntryKind kind = EntryKind::gaussian;
  std::size_t sparsity = 0;  // nonzeros per column, sparse only

  /// Accepts "gaussian", "rademacher", "sparse(s)" and "sparse:s".
  static EntryDistribution parse(std::string_view text);
  std::string name() const;
};

struct JlParams {
  double eps = 0.25;
  double delta = 0.05;
  double c_const = 4.0;
  std::size_t zeta = 2;
  EntryDistribution distribution;

  void validate() const;
};

/// One block-diagonal factor I_{blocks} (x) A with A of shape rows x cols.
struct JlLevel {
  std::size_t rows;    // k_i
  std::size_t cols;    // c_i
  std::size_t blocks;  // r_i

  friend bool operator==(const JlLevel&, const JlLevel&) = default;
};

struct JlSchedule {
  std::size_t d = 0;         // requested input dimension
  std::size_t k = 0;         // output dimension of the last level
  std::size_t zeta = 2;
  std::size_t ell = 0;
  std::size_t d_padded = 0;  // k * zeta^ell
  std::vector<JlLevel> levels;
};

/// ceil(c_const * eps^-2 * ln(1/delta)).
std::size_t target_dim(double eps, double delta, double c_const = 4.0);

/// Level sequence with ell = ceil(log_zeta(d/k)); throws std::invalid_argument
/// when d <= k ("no reduction needed") or zeta < 2.
JlSchedule build_schedule(std::size_t d, std::size_t k, std::size_t zeta = 2);

/// A sampled product (I (x) A_ell) ... (I (x) A_1), optionally followed by a
/// truncation to fewer output coordinates.
class JlTransform {
 public:
  JlTransform(JlSchedule schedule, std::vector<Matrix> level_matrices, std::uint64_t seed, std::size_t output_dim);

  const JlSchedule& schedule() const { return schedule_; }
  const std::vector<Matrix>& level_matrices() const { return levels_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t input_dim() const { return schedule_.d; }
  std::size_t output_dim() const { return output_dim_; }
  /// sqrt(k / output_dim); compensates for the dropped rows of the last level.
  double output_scale() const { return output_scale_; }

 private:
  JlSchedule schedule_;
  std::vector<Matrix> levels_;
  std::uint64_t seed_;
  std::size_t output_dim_;
  double output_scale_;
};

/// Samples every level i.i.d. from the distribution with entry variance
/// 1/k_i. Level i draws from derive_seed(seed, i).
JlTransform sample_transform(const JlSchedule& schedule, const EntryDistribution& dist, std::uint64_t seed,
                             std::size_t output_dim);
JlTransform sample_transform(const JlParams& params, std::size_t d, std::uint64_t seed);
/// As above, but when the tile side exceeds k the levels are built for
/// k' = tile_side and the output is truncated back to k.
JlTransform sample_transform(const JlParams& params, std::size_t d, std::uint64_t seed, const TcuConfig& cfg);

std::vector<double> apply(const JlTransform& t, std::span<const double> x, const TcuConfig& cfg, CostLedger& ledger);

/// Reduces every column of x (d x n). The batch is folded into the block
/// dimension so each level is one tiled multiply of width r_i * n.
Matrix apply_batch(const JlTransform& t, const Matrix& x, const TcuConfig& cfg, CostLedger& ledger,
                   unsigned threads = 1);

/// Same result as apply, but blocks that are entirely zero are dropped from
/// each level's multiply.
std::vector<double> skip_empty_blocks(const JlTransform& t, std::span<const double> x, const TcuConfig& cfg,
                                      CostLedger& ledger);

/// Explicit output_dim x d_padded matrix, built with ram_multiply. Never
/// charged to a ledger. Refuses to build more than 1e8 entries.
Matrix materialize_dense(const JlTransform& t);

inline constexpr std::size_t kMaterializeLimit = 100'000'000;

}  // namespace tcusim
