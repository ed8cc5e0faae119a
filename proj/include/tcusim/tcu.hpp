#pragma once

#include <cstdint>

#include "tcusim/matrix.hpp"
#include "tcusim/rational.hpp"

namespace tcusim {

/// Parameters of the simulated tensor core: one instruction multiplies two
/// dense tile_side x tile_side matrices (tile_side^2 = m) at modeled cost tau.
class TcuConfig {
 public:
  /// Throws std::invalid_argument unless m is a positive perfect square and tau > 0.
  TcuConfig(std::uint64_t m, Rational tau);

  /// The usual accelerator assumption tau = m.
  static TcuConfig linear(std::uint64_t m) { return TcuConfig(m, Rational(static_cast<std::int64_t>(m))); }

  std::uint64_t m() const { return m_; }
  std::uint64_t tile_side() const { return side_; }
  const Rational& tau() const { return tau_; }

 private:
  std::uint64_t m_;
  std::uint64_t side_;
  Rational tau_;
};

/// Exact operation counts. tcu_time always equals tile_mults * tau for a
/// ledger charged under a single configuration.
struct CostLedger {
  std::uint64_t tile_mults = 0;
  Rational tcu_time;
  std::uint64_t ram_flops = 0;

  void charge_tiles(std::uint64_t count, const TcuConfig& cfg);

  CostLedger& operator+=(const CostLedger& o);
  friend CostLedger operator+(CostLedger a, const CostLedger& b) { return a += b; }
  friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

/// ceil(p/s) * ceil(r/s) * ceil(q/s) for s = cfg.tile_side().
std::uint64_t tile_count(std::uint64_t p, std::uint64_t r, std::uint64_t q, const TcuConfig& cfg);

/// One TCU instruction. Both operands must be exactly tile_side x tile_side.
Matrix tile_multiply(const Matrix& a, const Matrix& b, const TcuConfig& cfg, CostLedger& ledger);

/// Tiled product a * b. Operands are zero-padded to whole tiles; every
/// (row-tile, inner-tile, col-tile) triple costs one tile multiply, and
/// partial products are accumulated in increasing inner-tile order.
/// Output tile rows are distributed over `threads` workers.
Matrix multiply(const Matrix& a, const Matrix& b, const TcuConfig& cfg, CostLedger& ledger,
                unsigned threads = 1);

/// Schoolbook triple loop; the RAM baseline and correctness oracle.
Matrix ram_multiply(const Matrix& a, const Matrix& b);

}  // namespace tcusim
