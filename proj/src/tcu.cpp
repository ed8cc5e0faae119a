#include "tcusim/tcu.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tcusim/parallel.hpp"

namespace tcusim {

namespace {

std::uint64_t exact_sqrt(std::uint64_t m) {
  auto s = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(m)));
  while (s * s > m) --s;
  while ((s + 1) * (s + 1) <= m) ++s;
  return s;
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// out = a * b for s x s tiles; each entry sums over k in increasing order.
// Only the leading rows x inner x cols corner is computed: the rest of a
// padded tile is zero, and the cost model charges the full tile regardless.
void tile_product(const double* a, const double* b, double* out, std::size_t s, std::size_t rows, std::size_t inner,
                  std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* out_row = out + i * s;
    for (std::size_t j = 0; j < cols; ++j) out_row[j] = 0.0;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a[i * s + k];
      const double* b_row = b + k * s;
      for (std::size_t j = 0; j < cols; ++j) out_row[j] += aik * b_row[j];
    }
  }
}

void tile_product(const double* a, const double* b, double* out, std::size_t s) {
  tile_product(a, b, out, s, s, s, s);
}

// Copies m into zero-padded tiles laid out tile-major: tile (ti, tj) starts at
// ((ti * col_tiles) + tj) * s * s.
std::vector<double> pack_tiles(const Matrix& m, std::size_t s, std::size_t row_tiles, std::size_t col_tiles) {
  std::vector<double> packed(row_tiles * col_tiles * s * s, 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const std::size_t ti = r / s;
    const std::size_t ri = r % s;
    const auto row = m.row(r);
    for (std::size_t tj = 0; tj < col_tiles; ++tj) {
      const std::size_t begin = tj * s, len = std::min(s, m.cols() - begin);
      std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(begin), len,
                  packed.begin() + static_cast<std::ptrdiff_t>(((ti * col_tiles + tj) * s + ri) * s));
    }
  }
  return packed;
}

}  // namespace

TcuConfig::TcuConfig(std::uint64_t m, Rational tau) : m_(m), side_(exact_sqrt(m)), tau_(tau) {
  if (m == 0) throw std::invalid_argument("TCU parameter m must be positive");
  if (side_ * side_ != m) throw std::invalid_argument("TCU parameter m=" + std::to_string(m) + " is not a perfect square");
  if (tau <= Rational(0)) throw std::invalid_argument("TCU parameter tau must be positive");
}

void CostLedger::charge_tiles(std::uint64_t count, const TcuConfig& cfg) {
  tile_mults += count;
  tcu_time += cfg.tau() * Rational(static_cast<std::int64_t>(count));
}

CostLedger& CostLedger::operator+=(const CostLedger& o) {
  tile_mults += o.tile_mults;
  tcu_time += o.tcu_time;
  ram_flops += o.ram_flops;
  return *this;
}

std::uint64_t tile_count(std::uint64_t p, std::uint64_t r, std::uint64_t q, const TcuConfig& cfg) {
  const auto s = cfg.tile_side();
  return ceil_div(p, s) * ceil_div(r, s) * ceil_div(q, s);
}

Matrix tile_multiply(const Matrix& a, const Matrix& b, const TcuConfig& cfg, CostLedger& ledger) {
  const auto s = cfg.tile_side();
  if (a.rows() != s || a.cols() != s || b.rows() != s || b.cols() != s) {
    throw ShapeError("tile_multiply needs " + std::to_string(s) + "x" + std::to_string(s) + " operands, got " +
                     shape_string(a) + " and " + shape_string(b));
  }
  Matrix out(s, s);
  tile_product(a.data().data(), b.data().data(), out.data().data(), s);
  ledger.charge_tiles(1, cfg);
  ledger.ram_flops += s * s * s;
  return out;
}

Matrix multiply(const Matrix& a, const Matrix& b, const TcuConfig& cfg, CostLedger& ledger, unsigned threads) {
  if (a.cols() != b.rows()) {
    throw ShapeError("multiply inner dimensions differ: " + shape_string(a) + " * " + shape_string(b));
  }
  if (a.rows() == 0 || a.cols() == 0 || b.cols() == 0) {
    throw ShapeError("multiply needs non-empty operands, got " + shape_string(a) + " * " + shape_string(b));
  }
  const std::size_t s = cfg.tile_side();
  const std::size_t p = a.rows(), r = a.cols(), q = b.cols();
  const std::size_t pt = ceil_div(p, s), rt = ceil_div(r, s), qt = ceil_div(q, s);
  const std::vector<double> a_tiles = pack_tiles(a, s, pt, rt);
  const std::vector<double> b_tiles = pack_tiles(b, s, rt, qt);
  const std::size_t tile_area = s * s;

  Matrix out(p, q);
  parallel_for(pt, threads, [&](std::size_t ti) {
    std::vector<double> acc(tile_area);
    std::vector<double> partial(tile_area);
    const std::size_t row_end = std::min(s, p - ti * s);
    for (std::size_t tj = 0; tj < qt; ++tj) {
      const std::size_t col_end = std::min(s, q - tj * s);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t tk = 0; tk < rt; ++tk) {
        const std::size_t inner_end = std::min(s, r - tk * s);
        tile_product(&a_tiles[(ti * rt + tk) * tile_area], &b_tiles[(tk * qt + tj) * tile_area], partial.data(), s,
                     row_end, inner_end, col_end);
        for (std::size_t i = 0; i < row_end; ++i)
          for (std::size_t j = 0; j < col_end; ++j) acc[i * s + j] += partial[i * s + j];
      }
      for (std::size_t i = 0; i < row_end; ++i)
        for (std::size_t j = 0; j < col_end; ++j) out(ti * s + i, tj * s + j) = acc[i * s + j];
    }
  });

  ledger.charge_tiles(static_cast<std::uint64_t>(pt) * rt * qt, cfg);
  ledger.ram_flops += static_cast<std::uint64_t>(p) * r * q;
  return out;
}

Matrix ram_multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("ram_multiply inner dimensions differ: " + shape_string(a) + " * " + shape_string(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

}  // namespace tcusim
