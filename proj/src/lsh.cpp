#include "tcusim/lsh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "tcusim/parallel.hpp"
#include "tcusim/random.hpp"

namespace tcusim {

namespace {

constexpr double kPi = 3.14159265358979323846;

class BitSampling final : public LshFamily {
 public:
  explicit BitSampling(std::size_t d) : d_(d) {
    if (d == 0) throw std::invalid_argument("bit sampling needs d >= 1");
  }
  std::string name() const override { return "bitsample"; }
  std::size_t dim() const override { return d_; }
  DistanceKind distance_kind() const override { return DistanceKind::hamming; }
  double collision_probability(double t) const override {
    return std::clamp(1.0 - t / static_cast<double>(d_), 0.0, 1.0);
  }
  HashFunction sample(std::uint64_t seed) const override {
    Rng rng(seed);
    const std::size_t coord = rng.below(d_);
    const std::size_t d = d_;
    return [coord, d](std::span<const double> x) -> std::uint64_t {
      if (x.size() != d) throw ShapeError("bit sampling hash applied to wrong dimension");
      return x[coord] != 0.0 ? 1 : 0;
    };
  }

 private:
  std::size_t d_;
};

class SimHash final : public LshFamily {
 public:
  explicit SimHash(std::size_t d) : d_(d) {
    if (d == 0) throw std::invalid_argument("simhash needs d >= 1");
  }
  std::string name() const override { return "simhash"; }
  std::size_t dim() const override { return d_; }
  DistanceKind distance_kind() const override { return DistanceKind::cosine; }
  double collision_probability(double theta) const override { return std::clamp(1.0 - theta / kPi, 0.0, 1.0); }
  HashFunction sample(std::uint64_t seed) const override {
    Rng rng(seed);
    std::vector<double> w(d_);
    for (double& v : w) v = rng.normal();
    return [w = std::move(w)](std::span<const double> x) -> std::uint64_t {
      if (x.size() != w.size()) throw ShapeError("simhash applied to wrong dimension");
      double dot = 0.0;
      bool nonzero = false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        dot += w[i] * x[i];
        nonzero = nonzero || x[i] != 0.0;
      }
      if (!nonzero) throw std::invalid_argument("simhash is undefined for the zero vector");
      return dot >= 0.0 ? 1 : 0;
    };
  }

 private:
  std::size_t d_;
};

double table_cost(double n, double p2, std::size_t k) { return n + n * n * std::pow(p2, static_cast<double>(k)); }

struct Member {
  std::uint64_t key;
  int side;  // 0 = P, 1 = Q
  std::size_t index;
  friend auto operator<=>(const Member&, const Member&) = default;
};

struct TableOutput {
  RepetitionStats stats;
  std::vector<IdPair> pairs;
  double max_mismatch = 0.0;
  std::uint64_t evaluated = 0;
};

std::size_t floor_log2(std::size_t v) { return static_cast<std::size_t>(std::bit_width(v) - 1); }

}  // namespace

void LshParams::validate() const {
  if (!(c > 1.0)) throw std::invalid_argument("approximation factor c must exceed 1");
  if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0)) throw std::invalid_argument("LSH probabilities must lie in [0,1]");
  if (!(p1 > p2)) throw std::invalid_argument("not a valid LSH: p1 <= p2");
}

LshParams LshFamily::sensitivity(double r, double c) const {
  const IpDistance dist{distance_kind(), dim()};
  LshParams params;
  params.r = r;
  params.c = c;
  const double near = dist.native(r);
  params.p1 = collision_probability(near);
  params.p2 = collision_probability(c * near);
  if (params.p1 >= 1.0 || params.p2 <= 0.0) {
    params.rho = 0.0;
  } else {
    params.rho = std::log(1.0 / params.p1) / std::log(1.0 / params.p2);
  }
  params.validate();
  return params;
}

std::unique_ptr<LshFamily> bit_sampling_family(std::size_t d) { return std::make_unique<BitSampling>(d); }
std::unique_ptr<LshFamily> simhash_family(std::size_t d) { return std::make_unique<SimHash>(d); }

double RepetitionPlan::expected_near_collisions() const {
  return static_cast<double>(L_low) * std::pow(params.p1, static_cast<double>(k_low)) +
         static_cast<double>(L_high) * std::pow(params.p1, static_cast<double>(k_high));
}

RepetitionPlan plan_repetitions(const LshParams& params, std::size_t n, const TcuConfig& cfg) {
  params.validate();
  if (n == 0) throw std::invalid_argument("plan needs n >= 1");
  if (params.p1 <= 0.0) throw std::invalid_argument("p1 must be positive");
  RepetitionPlan plan;
  plan.params = params;
  const double m32 = static_cast<double>(cfg.m()) * static_cast<double>(cfg.tile_side());
  const double wanted = m32 / (cfg.tau().to_double() * static_cast<double>(n));
  plan.p2_target = std::min(params.p2, wanted);
  if (params.p2 <= 0.0 || plan.p2_target >= params.p2) {
    plan.k = 1.0;  // fractional concatenation is undefined; never go below one
  } else {
    plan.k = std::max(1.0, std::log(plan.p2_target) / std::log(params.p2));
  }

  const double rounded = std::round(plan.k);
  if (std::abs(plan.k - rounded) < 1e-9) {
    const auto k = static_cast<std::size_t>(rounded);
    plan.k_low = plan.k_high = k;
    plan.L_low = 0;
    plan.L_high = static_cast<std::size_t>(std::ceil(std::pow(params.p1, -rounded) - 1e-12));
    return plan;
  }

  plan.k_low = static_cast<std::size_t>(std::floor(plan.k));
  plan.k_high = plan.k_low + 1;
  const double low_hit = std::pow(params.p1, static_cast<double>(plan.k_low));
  const double high_hit = std::pow(params.p1, static_cast<double>(plan.k_high));
  const double low_cost = table_cost(static_cast<double>(n), params.p2, plan.k_low);
  const double high_cost = table_cost(static_cast<double>(n), params.p2, plan.k_high);
  const auto max_high = static_cast<std::size_t>(std::ceil(1.0 / high_hit - 1e-12));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t high = 0; high <= max_high; ++high) {
    const double missing = 1.0 - static_cast<double>(high) * high_hit;
    const std::size_t low =
        missing <= 1e-12 ? 0 : static_cast<std::size_t>(std::ceil(missing / low_hit - 1e-12));
    const double cost = static_cast<double>(low) * low_cost + static_cast<double>(high) * high_cost;
    if (cost < best) {
      best = cost;
      plan.L_low = low;
      plan.L_high = high;
    }
  }
  return plan;
}

JoinResult lsh_join(const PointSet& p, const PointSet& q, const IpDistance& dist, double r, const LshFamily& family,
                    const RepetitionPlan& plan, const TcuConfig& cfg, std::uint64_t seed, CostLedger& ledger,
                    const JoinOptions& options) {
  if (plan.tables() == 0) throw std::invalid_argument("repetition plan has no tables");
  if (p.size() == 0 || q.size() == 0) throw std::invalid_argument("join needs non-empty point sets");
  if (p.dim() != dist.d || q.dim() != dist.d) throw ShapeError("point set dimension does not match distance");
  if (family.dim() != dist.d || family.distance_kind() != dist.kind) {
    throw std::invalid_argument("LSH family " + family.name() + " does not match distance " + dist.name());
  }
  if (!std::isfinite(r)) throw std::invalid_argument("join threshold must be finite");

  const Matrix f = lift_points(p, dist, LiftSide::f);
  const Matrix g = lift_points(q, dist, LiftSide::g);
  const std::size_t lifted = dist.lifted_dim();
  const double c = plan.params.c;

  std::vector<TableOutput> outputs(plan.tables());
  parallel_for(plan.tables(), options.threads, [&](std::size_t table) {
    TableOutput& out = outputs[table];
    const std::size_t length = plan.concatenation(table);
    out.stats.concatenation = length;
    std::vector<HashFunction> hashes;
    hashes.reserve(length);
    for (std::size_t pos = 0; pos < length; ++pos) hashes.push_back(family.sample(derive_seed(seed, table, pos)));
    auto key_of = [&](std::span<const double> x) {
      std::uint64_t key = 0x243f6a8885a308d3ULL;
      for (std::size_t pos = 0; pos < length; ++pos) key = mix64(key ^ mix64(hashes[pos](x) + pos));
      return key;
    };

    std::vector<Member> members;
    members.reserve(p.size() + q.size());
    for (std::size_t i = 0; i < p.size(); ++i) members.push_back({key_of(p.point(i)), 0, i});
    for (std::size_t j = 0; j < q.size(); ++j) members.push_back({key_of(q.point(j)), 1, j});
    std::sort(members.begin(), members.end());

    std::vector<std::size_t> left, right;
    for (std::size_t begin = 0; begin < members.size();) {
      std::size_t end = begin;
      left.clear();
      right.clear();
      while (end < members.size() && members[end].key == members[begin].key) {
        (members[end].side == 0 ? left : right).push_back(members[end].index);
        ++end;
      }
      begin = end;
      ++out.stats.buckets;
      ++out.stats.size_histogram[floor_log2(left.size() + right.size())];
      if (left.empty() || right.empty()) continue;
      ++out.stats.joined_buckets;

      Matrix fb(left.size(), lifted);
      for (std::size_t a = 0; a < left.size(); ++a) std::copy_n(f.row(left[a]).begin(), lifted, fb.row(a).begin());
      Matrix gbt(lifted, right.size());
      for (std::size_t b = 0; b < right.size(); ++b)
        for (std::size_t e = 0; e < lifted; ++e) gbt(e, b) = g(right[b], e);
      const Matrix values = multiply(fb, gbt, cfg, out.stats.ledger);
      out.evaluated += left.size() * right.size();

      for (std::size_t a = 0; a < left.size(); ++a) {
        for (std::size_t b = 0; b < right.size(); ++b) {
          const std::uint64_t pid = p.ids()[left[a]], qid = q.ids()[right[b]];
          if (options.drop_self_pairs && pid == qid) continue;
          const double exact = exact_distance(p.point(left[a]), q.point(right[b]), dist);
          out.max_mismatch = std::max(out.max_mismatch, std::abs(exact - values(a, b)));
          switch (dist.category(exact, r, c)) {
            case 0:
              ++out.stats.candidates.near;
              out.pairs.push_back({pid, qid});
              break;
            case 1: ++out.stats.candidates.approx; break;
            default: ++out.stats.candidates.far; break;
          }
        }
      }
    }
  });

  JoinResult result;
  for (auto& out : outputs) {
    result.pairs.insert(result.pairs.end(), out.pairs.begin(), out.pairs.end());
    result.stats.candidates += out.stats.candidates;
    result.stats.evaluated_pairs += out.evaluated;
    result.stats.max_value_mismatch = std::max(result.stats.max_value_mismatch, out.max_mismatch);
    result.ledger += out.stats.ledger;
    result.stats.repetitions.push_back(std::move(out.stats));
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  result.pairs.erase(std::unique(result.pairs.begin(), result.pairs.end()), result.pairs.end());
  ledger += result.ledger;
  return result;
}

double far_collisions_per_point(const JoinResult& result, std::size_t n) {
  if (n == 0 || result.stats.repetitions.empty()) return 0.0;
  return static_cast<double>(result.stats.candidates.far) /
         (static_cast<double>(n) * static_cast<double>(result.stats.repetitions.size()));
}

double lsh_join_cost_bound(const RepetitionPlan& plan, const IpDistance& dist, const TcuConfig& cfg, std::size_t n,
                           std::uint64_t near_count, std::uint64_t approx_count, bool include_dimension) {
  const double tau = cfg.tau().to_double();
  const double per_tile = tau / (static_cast<double>(cfg.m()) * static_cast<double>(cfg.tile_side()));
  const double nd = static_cast<double>(n);
  const double rho = plan.params.rho;
  const double tables = std::pow(plan.params.p1, rho - 1.0) * std::pow(nd * per_tile, rho);
  double bound = tables * (static_cast<double>(near_count) * per_tile + nd) +
                 per_tile * static_cast<double>(approx_count);
  if (include_dimension) bound *= static_cast<double>(dist.d);
  return bound;
}

}  // namespace tcusim
