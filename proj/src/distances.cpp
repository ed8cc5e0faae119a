#include "tcusim/distances.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace tcusim {

namespace {

void check_dim(std::span<const double> x, const IpDistance& dist) {
  if (x.size() != dist.d) {
    throw ShapeError("point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(dist.d));
  }
}

void check_binary(std::span<const double> x) {
  for (double v : x)
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("hamming points must be 0/1 vectors");
}

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double euclidean_norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

std::vector<std::uint64_t> pack_bits(std::span<const double> x) {
  std::vector<std::uint64_t> words((x.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) words[i / 64] |= std::uint64_t{1} << (i % 64);
  return words;
}

void validate_join_inputs(const PointSet& p, const PointSet& q, const IpDistance& dist, double r) {
  if (p.size() == 0 || q.size() == 0) throw std::invalid_argument("join needs non-empty point sets");
  if (p.dim() != dist.d || q.dim() != dist.d) throw ShapeError("point set dimension does not match distance");
  if (!std::isfinite(r)) throw std::invalid_argument("join threshold must be finite");
}

}  // namespace

IpDistance IpDistance::parse(std::string_view kind, std::size_t d) {
  if (kind == "hamming") return {DistanceKind::hamming, d};
  if (kind == "l2sq" || kind == "l2_squared") return {DistanceKind::l2_squared, d};
  if (kind == "cosine") return {DistanceKind::cosine, d};
  throw std::invalid_argument("unknown distance '" + std::string(kind) + "'");
}

std::size_t IpDistance::lifted_dim() const {
  switch (kind) {
    case DistanceKind::hamming: return 2 * d;
    case DistanceKind::l2_squared: return 3 * d;
    case DistanceKind::cosine: return d;
  }
  return d;
}

std::string IpDistance::name() const {
  switch (kind) {
    case DistanceKind::hamming: return "hamming";
    case DistanceKind::l2_squared: return "l2sq";
    case DistanceKind::cosine: return "cosine";
  }
  return "?";
}

double IpDistance::native(double value) const {
  if (kind == DistanceKind::cosine) return std::acos(std::clamp(value, -1.0, 1.0));
  return value;
}

int IpDistance::category(double value, double r, double c) const {
  if (accepts(value, r)) return 0;
  return native(value) <= c * native(r) ? 1 : 2;
}

PointSet::PointSet(Matrix data) : data_(std::move(data)), ids_(data_.rows()) {
  for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = i;
}

PointSet::PointSet(Matrix data, std::vector<std::uint64_t> ids) : data_(std::move(data)), ids_(std::move(ids)) {
  if (ids_.size() != data_.rows()) throw ShapeError("id count does not match point count");
  std::set<std::uint64_t> seen(ids_.begin(), ids_.end());
  if (seen.size() != ids_.size()) throw std::invalid_argument("point ids must be unique");
}

std::vector<double> feature_map_f(std::span<const double> x, const IpDistance& dist) {
  check_dim(x, dist);
  std::vector<double> out;
  out.reserve(dist.lifted_dim());
  switch (dist.kind) {
    case DistanceKind::hamming:
      check_binary(x);
      for (double v : x) {
        out.push_back(v);
        out.push_back(1.0 - v);
      }
      break;
    case DistanceKind::l2_squared:
      for (double v : x) {
        out.push_back(v * v);
        out.push_back(1.0);
        out.push_back(-2.0 * v);
      }
      break;
    case DistanceKind::cosine: {
      const double norm = euclidean_norm(x);
      if (norm == 0.0) throw std::invalid_argument("cosine similarity is undefined for the zero vector");
      for (double v : x) out.push_back(v / norm);
      break;
    }
  }
  return out;
}

std::vector<double> feature_map_g(std::span<const double> y, const IpDistance& dist) {
  check_dim(y, dist);
  std::vector<double> out;
  out.reserve(dist.lifted_dim());
  switch (dist.kind) {
    case DistanceKind::hamming:
      check_binary(y);
      for (double v : y) {
        out.push_back(1.0 - v);
        out.push_back(v);
      }
      break;
    case DistanceKind::l2_squared:
      for (double v : y) {
        out.push_back(1.0);
        out.push_back(v * v);
        out.push_back(v);
      }
      break;
    case DistanceKind::cosine:
      return feature_map_f(y, dist);
  }
  return out;
}

double exact_distance(std::span<const double> x, std::span<const double> y, const IpDistance& dist) {
  check_dim(x, dist);
  check_dim(y, dist);
  switch (dist.kind) {
    case DistanceKind::hamming: {
      check_binary(x);
      check_binary(y);
      std::size_t count = 0;
      for (std::size_t i = 0; i < x.size(); ++i) count += x[i] != y[i];
      return static_cast<double>(count);
    }
    case DistanceKind::l2_squared: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
      return s;
    }
    case DistanceKind::cosine: {
      const double nx = squared_norm(x), ny = squared_norm(y);
      if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("cosine similarity is undefined for the zero vector");
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return dot / std::sqrt(nx * ny);
    }
  }
  return 0.0;
}

Matrix lift_points(const PointSet& points, const IpDistance& dist, LiftSide side) {
  Matrix out(points.size(), dist.lifted_dim());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto lifted = side == LiftSide::f ? feature_map_f(points.point(i), dist) : feature_map_g(points.point(i), dist);
    std::copy(lifted.begin(), lifted.end(), out.row(i).begin());
  }
  return out;
}

JoinResult brute_force_join(const PointSet& p, const PointSet& q, const IpDistance& dist, double r,
                            const TcuConfig& cfg, CostLedger& ledger, const JoinOptions& options) {
  validate_join_inputs(p, q, dist, r);
  const Matrix f = lift_points(p, dist, LiftSide::f);
  const Matrix g = lift_points(q, dist, LiftSide::g);
  JoinResult result;
  const Matrix values = multiply(f, g.transpose(), cfg, result.ledger, options.threads);

  std::vector<double> f_norms(p.size()), g_norms(q.size());
  for (std::size_t i = 0; i < p.size(); ++i) f_norms[i] = euclidean_norm(f.row(i));
  for (std::size_t j = 0; j < q.size(); ++j) g_norms[j] = euclidean_norm(g.row(j));
  // Forward error bound of a length-d' dot product in any summation order.
  const double unit = (2.0 * static_cast<double>(dist.lifted_dim()) + 8.0) * std::numeric_limits<double>::epsilon();

  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (options.drop_self_pairs && p.ids()[i] == q.ids()[j]) continue;
      double v = values(i, j);
      if (std::abs(v - r) <= unit * f_norms[i] * g_norms[j]) {
        const double exact = exact_distance(p.point(i), q.point(j), dist);
        result.stats.max_value_mismatch = std::max(result.stats.max_value_mismatch, std::abs(exact - v));
        v = exact;
      }
      if (dist.accepts(v, r)) result.pairs.push_back({p.ids()[i], q.ids()[j]});
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  result.stats.evaluated_pairs = static_cast<std::uint64_t>(p.size()) * q.size();
  ledger += result.ledger;
  return result;
}

CandidateCounts pair_census(const PointSet& p, const PointSet& q, const IpDistance& dist, double r, double c,
                            bool drop_self_pairs) {
  validate_join_inputs(p, q, dist, r);
  CandidateCounts counts;
  auto tally = [&](int category) {
    if (category == 0) ++counts.near;
    else if (category == 1) ++counts.approx;
    else ++counts.far;
  };
  if (dist.kind == DistanceKind::hamming) {
    std::vector<std::vector<std::uint64_t>> pw, qw;
    for (std::size_t i = 0; i < p.size(); ++i) {
      check_binary(p.point(i));
      pw.push_back(pack_bits(p.point(i)));
    }
    for (std::size_t j = 0; j < q.size(); ++j) {
      check_binary(q.point(j));
      qw.push_back(pack_bits(q.point(j)));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < q.size(); ++j) {
        if (drop_self_pairs && p.ids()[i] == q.ids()[j]) continue;
        int bits = 0;
        for (std::size_t w = 0; w < pw[i].size(); ++w) bits += std::popcount(pw[i][w] ^ qw[j][w]);
        tally(dist.category(bits, r, c));
      }
    }
    return counts;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (drop_self_pairs && p.ids()[i] == q.ids()[j]) continue;
      tally(dist.category(exact_distance(p.point(i), q.point(j), dist), r, c));
    }
  }
  return counts;
}

}  // namespace tcusim
