#include "tcusim/jl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tcusim/random.hpp"

namespace tcusim {

namespace {

std::size_t parse_size(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw std::invalid_argument("unknown distribution '" + std::string(whole) + "'");
  return v;
}

Matrix sample_level(const JlLevel& level, const EntryDistribution& dist, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(level.rows, level.cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(level.rows));
  switch (dist.kind) {
    case EntryKind::gaussian:
      for (double& v : a.data()) v = rng.normal() * scale;
      break;
    case EntryKind::rademacher:
      for (double& v : a.data()) v = rng.coin() ? scale : -scale;
      break;
    case EntryKind::sparse: {
      const std::size_t s = dist.sparsity;
      const double value = 1.0 / std::sqrt(static_cast<double>(s));
      std::vector<std::size_t> rows(level.rows);
      for (std::size_t c = 0; c < level.cols; ++c) {
        // Partial Fisher-Yates: the first s slots become the support.
        for (std::size_t i = 0; i < level.rows; ++i) rows[i] = i;
        for (std::size_t i = 0; i < s; ++i) {
          std::swap(rows[i], rows[i + rng.below(level.rows - i)]);
          a(rows[i], c) = rng.coin() ? value : -value;
        }
      }
      break;
    }
  }
  return a;
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Pushes n stacked vectors (sample-major, each of length d_padded) through
// every level. Returns the final state, n vectors of length k.
std::vector<double> run_levels(const JlTransform& t, std::vector<double> state, std::size_t n, const TcuConfig& cfg,
                               CostLedger& ledger, unsigned threads, bool skip_zero_blocks) {
  const auto& sched = t.schedule();
  std::size_t len = sched.d_padded;
  for (std::size_t li = 0; li < sched.levels.size(); ++li) {
    const JlLevel& lv = sched.levels[li];
    const std::size_t c = lv.cols, r = lv.blocks, kk = lv.rows;
    std::vector<std::size_t> active;
    active.reserve(n * r);
    for (std::size_t col = 0; col < n * r; ++col) {
      const std::size_t s = col / r, j = col % r;
      if (!skip_zero_blocks || !all_zero(std::span<const double>(state).subspan(s * len + j * c, c)))
        active.push_back(col);
    }
    const std::size_t next_len = r * kk;
    std::vector<double> next(n * next_len, 0.0);
    if (!active.empty()) {
      Matrix x(c, active.size());
      for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t s = active[a] / r, j = active[a] % r;
        const double* block = &state[s * len + j * c];
        for (std::size_t row = 0; row < c; ++row) x(row, a) = block[row];
      }
      const Matrix y = multiply(t.level_matrices()[li], x, cfg, ledger, threads);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t s = active[a] / r, j = active[a] % r;
        double* block = &next[s * next_len + j * kk];
        for (std::size_t row = 0; row < kk; ++row) block[row] = y(row, a);
      }
    }
    state = std::move(next);
    len = next_len;
  }
  return state;
}

std::vector<double> finish_single(const JlTransform& t, const std::vector<double>& state) {
  std::vector<double> out(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(t.output_dim()));
  if (t.output_dim() != t.schedule().k)
    for (double& v : out) v *= t.output_scale();
  return out;
}

std::vector<double> padded_input(const JlTransform& t, std::span<const double> x) {
  if (x.size() != t.input_dim()) {
    throw ShapeError("JL input has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(t.input_dim()));
  }
  std::vector<double> state(t.schedule().d_padded, 0.0);
  std::copy(x.begin(), x.end(), state.begin());
  return state;
}

}  // namespace

EntryDistribution EntryDistribution::parse(std::string_view text) {
  if (text == "gaussian") return {EntryKind::gaussian, 0};
  if (text == "rademacher") return {EntryKind::rademacher, 0};
  if (text.starts_with("sparse(") && text.ends_with(")")) {
    return {EntryKind::sparse, parse_size(text.substr(7, text.size() - 8), text)};
  }
  if (text.starts_with("sparse:")) return {EntryKind::sparse, parse_size(text.substr(7), text)};
  throw std::invalid_argument("unknown distribution '" + std::string(text) + "'");
}

std::string EntryDistribution::name() const {
  switch (kind) {
    case EntryKind::gaussian: return "gaussian";
    case EntryKind::rademacher: return "rademacher";
    case EntryKind::sparse: return "sparse(" + std::to_string(sparsity) + ")";
  }
  return "?";
}

void JlParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(c_const > 0.0) || !std::isfinite(c_const)) throw std::invalid_argument("C must be positive");
  if (zeta < 2) throw std::invalid_argument("zeta must be at least 2");
  if (distribution.kind == EntryKind::sparse && distribution.sparsity == 0)
    throw std::invalid_argument("sparse distribution needs s >= 1");
}

std::size_t target_dim(double eps, double delta, double c_const) {
  // eps = 1 is accepted here so the formula can be evaluated at its boundary.
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0,1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(c_const > 0.0) || !std::isfinite(c_const)) throw std::invalid_argument("C must be positive");
  const double raw = c_const / (eps * eps) * std::log(1.0 / delta);
  // Absorb last-ulp noise so that exact integers are not bumped up by one.
  const double k = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return static_cast<std::size_t>(std::max(1.0, k));
}

JlSchedule build_schedule(std::size_t d, std::size_t k, std::size_t zeta) {
  if (k == 0) throw std::invalid_argument("target dimension must be positive");
  if (zeta < 2) throw std::invalid_argument("zeta must be at least 2");
  if (d <= k) {
    throw std::invalid_argument("no reduction needed: d=" + std::to_string(d) + " <= k=" + std::to_string(k));
  }
  JlSchedule s;
  s.d = d;
  s.k = k;
  s.zeta = zeta;
  std::size_t padded = k;
  while (padded < d) {
    if (padded > std::numeric_limits<std::size_t>::max() / zeta) throw std::overflow_error("schedule too large");
    padded *= zeta;
    ++s.ell;
  }
  s.d_padded = padded;
  std::size_t blocks = padded / k;  // zeta^ell
  for (std::size_t i = 1; i <= s.ell; ++i) {
    blocks /= zeta;
    const std::size_t rows = i < s.ell ? i * k : k;
    const std::size_t cols = i == 1 ? k * zeta : zeta * s.levels.back().rows;
    s.levels.push_back({rows, cols, blocks});
  }
  return s;
}

JlTransform::JlTransform(JlSchedule schedule, std::vector<Matrix> level_matrices, std::uint64_t seed,
                         std::size_t output_dim)
    : schedule_(std::move(schedule)), levels_(std::move(level_matrices)), seed_(seed), output_dim_(output_dim) {
  if (levels_.size() != schedule_.levels.size()) throw ShapeError("level count does not match schedule");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].rows() != schedule_.levels[i].rows || levels_[i].cols() != schedule_.levels[i].cols)
      throw ShapeError("level " + std::to_string(i + 1) + " matrix is " + shape_string(levels_[i]));
  }
  if (output_dim_ == 0 || output_dim_ > schedule_.k) throw std::invalid_argument("output dimension out of range");
  output_scale_ = std::sqrt(static_cast<double>(schedule_.k) / static_cast<double>(output_dim_));
}

JlTransform sample_transform(const JlSchedule& schedule, const EntryDistribution& dist, std::uint64_t seed,
                             std::size_t output_dim) {
  if (dist.kind == EntryKind::sparse && (dist.sparsity == 0 || dist.sparsity > schedule.k)) {
    throw std::invalid_argument("sparse(s) needs 1 <= s <= k");
  }
  std::vector<Matrix> mats;
  mats.reserve(schedule.levels.size());
  for (std::size_t i = 0; i < schedule.levels.size(); ++i)
    mats.push_back(sample_level(schedule.levels[i], dist, derive_seed(seed, i + 1)));
  return JlTransform(schedule, std::move(mats), seed, output_dim);
}

JlTransform sample_transform(const JlParams& params, std::size_t d, std::uint64_t seed) {
  params.validate();
  const std::size_t k = target_dim(params.eps, params.delta, params.c_const);
  return sample_transform(build_schedule(d, k, params.zeta), params.distribution, seed, k);
}

JlTransform sample_transform(const JlParams& params, std::size_t d, std::uint64_t seed, const TcuConfig& cfg) {
  params.validate();
  const std::size_t k = target_dim(params.eps, params.delta, params.c_const);
  const std::size_t padded_k = std::max<std::size_t>(k, cfg.tile_side());
  return sample_transform(build_schedule(d, padded_k, params.zeta), params.distribution, seed, k);
}

std::vector<double> apply(const JlTransform& t, std::span<const double> x, const TcuConfig& cfg, CostLedger& ledger) {
  return finish_single(t, run_levels(t, padded_input(t, x), 1, cfg, ledger, 1, false));
}

std::vector<double> skip_empty_blocks(const JlTransform& t, std::span<const double> x, const TcuConfig& cfg,
                                      CostLedger& ledger) {
  return finish_single(t, run_levels(t, padded_input(t, x), 1, cfg, ledger, 1, true));
}

Matrix apply_batch(const JlTransform& t, const Matrix& x, const TcuConfig& cfg, CostLedger& ledger,
                   unsigned threads) {
  if (x.rows() != t.input_dim()) {
    throw ShapeError("JL batch has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(t.input_dim()));
  }
  const std::size_t n = x.cols();
  const std::size_t dp = t.schedule().d_padded;
  std::vector<double> state(n * dp, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t s = 0; s < n; ++s) state[s * dp + r] = x(r, s);
  const std::vector<double> reduced = run_levels(t, std::move(state), n, cfg, ledger, threads, false);
  const std::size_t k = t.schedule().k;
  const bool truncated = t.output_dim() != k;
  Matrix out(t.output_dim(), n);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t r = 0; r < t.output_dim(); ++r)
      out(r, s) = truncated ? reduced[s * k + r] * t.output_scale() : reduced[s * k + r];
  return out;
}

Matrix materialize_dense(const JlTransform& t) {
  const auto& sched = t.schedule();
  if (sched.k * sched.d_padded > kMaterializeLimit) {
    throw std::invalid_argument("refusing to materialize a " + std::to_string(sched.k) + "x" +
                                std::to_string(sched.d_padded) + " JL matrix");
  }
  const auto& mats = t.level_matrices();
  // The last level has a single block, so the running product starts as A_ell
  // and is extended leftwards: R <- R * (I_{r_i} (x) A_i).
  Matrix acc = mats.back();
  for (std::size_t li = sched.levels.size() - 1; li-- > 0;) {
    const JlLevel& lv = sched.levels[li];
    Matrix next(sched.k, lv.blocks * lv.cols);
    for (std::size_t j = 0; j < lv.blocks; ++j) {
      Matrix slice(sched.k, lv.rows);
      for (std::size_t r = 0; r < sched.k; ++r)
        for (std::size_t c = 0; c < lv.rows; ++c) slice(r, c) = acc(r, j * lv.rows + c);
      const Matrix part = ram_multiply(slice, mats[li]);
      for (std::size_t r = 0; r < sched.k; ++r)
        for (std::size_t c = 0; c < lv.cols; ++c) next(r, j * lv.cols + c) = part(r, c);
    }
    acc = std::move(next);
  }
  if (t.output_dim() == sched.k) return acc;
  Matrix out(t.output_dim(), acc.cols());
  for (std::size_t r = 0; r < t.output_dim(); ++r)
    for (std::size_t c = 0; c < acc.cols(); ++c) out(r, c) = acc(r, c) * t.output_scale();
  return out;
}

}  // namespace tcusim
