#include "tcusim/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tcusim/random.hpp"

namespace tcusim {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'C', 'U', 'J'};
constexpr int kMaxAttempts = 1000;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw std::runtime_error("dataset truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

std::uint8_t kind_code(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::hamming: return 0;
    case DistanceKind::l2_squared: return 1;
    case DistanceKind::cosine: return 2;
  }
  return 0;
}

DistanceKind kind_from_code(std::uint8_t code) {
  switch (code) {
    case 0: return DistanceKind::hamming;
    case 1: return DistanceKind::l2_squared;
    case 2: return DistanceKind::cosine;
    default: throw std::runtime_error("dataset has unknown kind byte " + std::to_string(code));
  }
}

// Generator state for one instance.
class Planter {
 public:
  explicit Planter(const PlantedSpec& spec) : spec_(spec), dist_{spec.kind, spec.d}, rng_(spec.seed) {}

  PlantedInstance run() {
    validate();
    Matrix p(spec_.n, spec_.d), q(spec_.n, spec_.d);
    // Triangle inequality: P points this far apart leave room for every
    // planted partner. Angles between random points concentrate near pi/2,
    // so cosine instances rely on the direct checks below instead.
    const double separation = spec_.kind == DistanceKind::cosine
                                  ? 0.0
                                  : metric_of(spec_.background) + metric_of(spec_.planted_distance);
    for (std::size_t i = 0; i < spec_.n; ++i) {
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxAttempts) fail("P point " + std::to_string(i));
        random_point(p.row(i));
        remember(i, p.row(i));
        bool ok = true;
        for (std::size_t j = 0; j < i && ok; ++j) ok = metric_of(value(i, j, p)) >= separation;
        if (ok) break;
      }
    }
    for (std::size_t i = 0; i < spec_.n; ++i) {
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxAttempts) fail("Q point " + std::to_string(i));
        const bool planted = i < spec_.planted;
        if (planted) {
          plant_near(p.row(i), q.row(i));
          if (!dist_.accepts(exact_distance(p.row(i), q.row(i), dist_), spec_.planted_distance)) continue;
        } else {
          random_point(q.row(i));
        }
        remember(spec_.n, q.row(i));
        bool ok = true;
        for (std::size_t j = 0; j < spec_.n && ok; ++j) {
          if (planted && j == i) continue;
          ok = background_ok(value(spec_.n, j, p, q.row(i)));
        }
        if (ok) break;
      }
    }
    PlantedInstance inst{PointSet(std::move(p)), PointSet(std::move(q)), {}};
    for (std::size_t i = 0; i < spec_.planted; ++i) inst.truth.push_back({i, i});
    return inst;
  }

 private:
  void validate() const {
    if (spec_.n == 0 || spec_.d == 0) throw std::invalid_argument("planting needs n, d >= 1");
    if (spec_.planted > spec_.n) throw std::invalid_argument("more planted pairs than points");
    switch (spec_.kind) {
      case DistanceKind::hamming:
        if (spec_.planted_distance < 0 || spec_.planted_distance > static_cast<double>(spec_.d) ||
            spec_.planted_distance != std::floor(spec_.planted_distance))
          throw std::invalid_argument("hamming planted distance must be an integer in [0, d]");
        [[fallthrough]];
      case DistanceKind::l2_squared:
        if (!(spec_.planted_distance >= 0)) throw std::invalid_argument("planted distance must be non-negative");
        if (!(spec_.background > spec_.planted_distance))
          throw std::invalid_argument("background distance must exceed the planted distance");
        break;
      case DistanceKind::cosine:
        if (!(spec_.planted_distance > -1.0 && spec_.planted_distance < 1.0))
          throw std::invalid_argument("planted cosine similarity must lie in (-1, 1)");
        if (!(spec_.background < spec_.planted_distance && spec_.background >= -1.0))
          throw std::invalid_argument("background similarity must be below the planted similarity");
        break;
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("unsatisfiable planting parameters: could not place " + what);
  }

  // A metric on the kind's scale.
  double metric_of(double value) const {
    switch (spec_.kind) {
      case DistanceKind::hamming: return value;
      case DistanceKind::l2_squared: return std::sqrt(value);
      case DistanceKind::cosine: return std::acos(std::clamp(value, -1.0, 1.0));
    }
    return value;
  }

  // Hamming points are also kept bit-packed: slots 0..n-1 hold P, slot n the
  // current candidate.
  void remember(std::size_t slot, std::span<const double> x) {
    if (spec_.kind != DistanceKind::hamming) return;
    if (bits_.empty()) bits_.assign(spec_.n + 1, std::vector<std::uint64_t>((spec_.d + 63) / 64));
    auto& words = bits_[slot];
    std::fill(words.begin(), words.end(), 0);
    for (std::size_t c = 0; c < x.size(); ++c)
      if (x[c] != 0.0) words[c / 64] |= std::uint64_t{1} << (c % 64);
  }

  // Distance between slot `a` and P point `j`; `x` is slot a's coordinates.
  double value(std::size_t a, std::size_t j, const Matrix& p, std::span<const double> x = {}) const {
    if (spec_.kind == DistanceKind::hamming) {
      int count = 0;
      for (std::size_t w = 0; w < bits_[a].size(); ++w) count += std::popcount(bits_[a][w] ^ bits_[j][w]);
      return count;
    }
    return exact_distance(x.empty() ? p.row(a) : x, p.row(j), dist_);
  }

  bool background_ok(double value) const {
    return dist_.orientation() == Orientation::distance ? value >= spec_.background : value <= spec_.background;
  }

  void random_point(std::span<double> x) {
    if (spec_.kind == DistanceKind::hamming) {
      for (double& v : x) v = rng_.coin() ? 1.0 : 0.0;
    } else {
      for (double& v : x) v = rng_.normal();
    }
  }

  void random_unit(std::span<double> u) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : u) {
        v = rng_.normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
  }

  void plant_near(std::span<const double> base, std::span<double> out) {
    std::copy(base.begin(), base.end(), out.begin());
    switch (spec_.kind) {
      case DistanceKind::hamming: {
        const auto flips = static_cast<std::size_t>(spec_.planted_distance);
        std::vector<std::size_t> coords(spec_.d);
        for (std::size_t i = 0; i < spec_.d; ++i) coords[i] = i;
        for (std::size_t i = 0; i < flips; ++i) {
          std::swap(coords[i], coords[i + rng_.below(spec_.d - i)]);
          out[coords[i]] = 1.0 - out[coords[i]];
        }
        break;
      }
      case DistanceKind::l2_squared: {
        std::vector<double> u(spec_.d);
        random_unit(u);
        const double step = std::sqrt(spec_.planted_distance) * (1.0 - 1e-9);
        for (std::size_t i = 0; i < spec_.d; ++i) out[i] += step * u[i];
        break;
      }
      case DistanceKind::cosine: {
        double norm = 0.0;
        for (double v : base) norm += v * v;
        norm = std::sqrt(norm);
        std::vector<double> u(spec_.d);
        random_unit(u);
        double along = 0.0;
        for (std::size_t i = 0; i < spec_.d; ++i) along += u[i] * base[i] / norm;
        double un = 0.0;
        for (std::size_t i = 0; i < spec_.d; ++i) {
          u[i] -= along * base[i] / norm;
          un += u[i] * u[i];
        }
        un = std::sqrt(un);
        const double theta = std::acos(spec_.planted_distance) * (1.0 - 1e-9);
        for (std::size_t i = 0; i < spec_.d; ++i)
          out[i] = std::cos(theta) * base[i] / norm + std::sin(theta) * (un > 0 ? u[i] / un : 0.0);
        break;
      }
    }
  }

  const PlantedSpec& spec_;
  IpDistance dist_;
  Rng rng_;
  std::vector<std::vector<std::uint64_t>> bits_;
};

}  // namespace

void write_dataset(std::ostream& out, const Dataset& data) {
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kDatasetVersion));
  out.put(static_cast<char>(kind_code(data.kind)));
  const Matrix& m = data.points;
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  if (data.kind == DistanceKind::hamming) {
    const std::size_t row_bytes = (m.cols() + 7) / 8;
    std::vector<char> row(row_bytes);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      std::fill(row.begin(), row.end(), 0);
      for (std::size_t c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        if (v != 0.0 && v != 1.0) throw std::invalid_argument("hamming dataset must be 0/1");
        if (v == 1.0) row[c / 8] = static_cast<char>(row[c / 8] | (1 << (c % 8)));
      }
      out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
  } else {
    for (double v : m.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("failed writing dataset");
}

Dataset read_dataset(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("not a TCUJ dataset");
  const int version = in.get();
  if (version != kDatasetVersion) throw std::runtime_error("unsupported dataset version " + std::to_string(version));
  const int kind = in.get();
  if (kind == std::char_traits<char>::eof()) throw std::runtime_error("dataset truncated");
  Dataset data;
  data.kind = kind_from_code(static_cast<std::uint8_t>(kind));
  const std::uint64_t n = get_u64(in);
  const std::uint64_t d = get_u64(in);
  if (d != 0 && n > (std::uint64_t{1} << 40) / d) throw std::runtime_error("dataset header too large");
  data.points = Matrix(n, d);
  if (data.kind == DistanceKind::hamming) {
    const std::size_t row_bytes = (d + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (std::size_t r = 0; r < n; ++r) {
      if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes)))
        throw std::runtime_error("dataset truncated");
      for (std::size_t c = 0; c < d; ++c) data.points(r, c) = (row[c / 8] >> (c % 8)) & 1 ? 1.0 : 0.0;
      if (d % 8 != 0 && (row.back() >> (d % 8)) != 0) throw std::runtime_error("dataset has stray padding bits");
    }
  } else {
    for (double& v : data.points.data()) v = std::bit_cast<double>(get_u64(in));
  }
  return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(out, data);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

void write_pairs_csv(std::ostream& out, const std::vector<IdPair>& pairs) {
  out << "p,q\n";
  for (const auto& pair : pairs) out << pair.p << ',' << pair.q << '\n';
}

std::vector<IdPair> read_pairs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "p,q") throw std::runtime_error("pair CSV must start with 'p,q'");
  std::vector<IdPair> pairs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad pair line '" + line + "'");
    pairs.push_back({std::stoull(line.substr(0, comma)), std::stoull(line.substr(comma + 1))});
  }
  return pairs;
}

PlantedInstance generate_planted(const PlantedSpec& spec) { return Planter(spec).run(); }

}  // namespace tcusim
