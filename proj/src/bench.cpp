#include "tcusim/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "tcusim/jl.hpp"
#include "tcusim/lsh.hpp"
#include "tcusim/parallel.hpp"
#include "tcusim/random.hpp"

namespace tcusim::bench {

namespace {

// Stream tags for derive_seed, so that each consumer of --seed draws from its
// own sequence.
constexpr std::uint64_t kSyntheticStream = 0x5eed'da7a;
constexpr std::uint64_t kTrialStream = 0x5eed'7a1a;
constexpr std::uint64_t kLshStream = 0x5eed'0154;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double recall_against(const std::vector<IdPair>& found, const std::vector<IdPair>& reference) {
  if (reference.empty()) return 1.0;
  std::size_t hits = 0;
  for (const auto& pair : reference) hits += std::binary_search(found.begin(), found.end(), pair);
  return static_cast<double>(hits) / static_cast<double>(reference.size());
}

bool is_subset(const std::vector<IdPair>& small, const std::vector<IdPair>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

double per_tile_time(const TcuConfig& cfg) {
  return cfg.tau().to_double() / (static_cast<double>(cfg.m()) * static_cast<double>(cfg.tile_side()));
}

// (dk + k^2 sqrt(m) ln^3(d/k)) tau m^{-3/2}
double jl_cost_shape(std::size_t d, std::size_t k, const TcuConfig& cfg) {
  const double dd = static_cast<double>(d), kk = static_cast<double>(k);
  const double lg = std::log(dd / kk);
  return (dd * kk + kk * kk * static_cast<double>(cfg.tile_side()) * lg * lg * lg) * per_tile_time(cfg);
}

double max_min_ratio(const std::vector<double>& values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi / *lo;
}

struct JoinInput {
  PointSet p;
  PointSet q;
  std::vector<IdPair> truth;
  DistanceKind kind;
};

JoinInput load_join_input(const JoinCommand& cmd, const IpDistance& requested) {
  if (!cmd.data.empty()) {
    const auto paths = DatasetPaths::from_prefix(cmd.data);
    Dataset p = load_dataset(paths.p);
    Dataset q = load_dataset(paths.q);
    if (p.kind != q.kind) throw std::invalid_argument("P and Q datasets have different kinds");
    std::ifstream truth_in(paths.truth);
    std::vector<IdPair> truth;
    if (truth_in) truth = read_pairs_csv(truth_in);
    std::sort(truth.begin(), truth.end());
    return {PointSet(std::move(p.points)), PointSet(std::move(q.points)), std::move(truth), p.kind};
  }
  PlantedSpec spec;
  spec.n = cmd.n;
  spec.d = cmd.d;
  spec.kind = requested.kind;
  spec.planted = std::min(cmd.planted, cmd.n);
  spec.planted_distance = cmd.r;
  spec.background = cmd.background;
  spec.seed = derive_seed(cmd.common.seed, kSyntheticStream);
  auto inst = generate_planted(spec);
  return {std::move(inst.p), std::move(inst.q), std::move(inst.truth), requested.kind};
}

std::unique_ptr<LshFamily> make_family(const std::string& name, std::size_t d) {
  if (name == "bitsample") return bit_sampling_family(d);
  if (name == "simhash") return simhash_family(d);
  throw std::invalid_argument("unknown LSH family '" + name + "'");
}

}  // namespace

TcuConfig make_config(std::uint64_t m, const std::string& tau_spec) {
  if (m == 0) throw std::invalid_argument("m must be positive");
  TcuConfig probe(m, Rational(1));  // validates m
  if (tau_spec == "m") return TcuConfig(m, Rational(static_cast<std::int64_t>(m)));
  if (tau_spec == "m^1.5" || tau_spec == "m^3/2")
    return TcuConfig(m, Rational(static_cast<std::int64_t>(m * probe.tile_side())));
  return TcuConfig(m, Rational::parse(tau_spec));
}

DatasetPaths DatasetPaths::from_prefix(const std::string& prefix) {
  return {prefix + "_P.tcuj", prefix + "_Q.tcuj", prefix + "_truth.csv"};
}

DatasetPaths cmd_gen(const GenCommand& cmd) {
  const IpDistance dist = IpDistance::parse(cmd.dist, cmd.d);
  PlantedSpec spec;
  spec.n = cmd.n;
  spec.d = cmd.d;
  spec.kind = dist.kind;
  spec.planted = cmd.planted;
  spec.planted_distance = cmd.r;
  spec.background = cmd.background;
  spec.seed = cmd.seed;
  const PlantedInstance inst = generate_planted(spec);
  const auto paths = DatasetPaths::from_prefix(cmd.out);
  save_dataset(paths.p, {dist.kind, inst.p.data()});
  save_dataset(paths.q, {dist.kind, inst.q.data()});
  std::ofstream truth(paths.truth, std::ios::binary);
  if (!truth) throw std::runtime_error("cannot open " + paths.truth.string());
  write_pairs_csv(truth, inst.truth);
  return paths;
}

Report cmd_jl(const JlCommand& cmd) {
  const TcuConfig cfg = make_config(cmd.common.m, cmd.common.tau);
  JlParams params;
  params.eps = cmd.eps;
  params.delta = cmd.delta;
  params.c_const = cmd.c_const;
  params.zeta = cmd.zeta;
  params.distribution = EntryDistribution::parse(cmd.distribution);
  params.validate();

  Matrix x;  // one vector per column
  if (!cmd.data.empty()) {
    x = load_dataset(cmd.data).points.transpose();
  } else {
    if (cmd.n == 0 || cmd.d == 0) throw std::invalid_argument("jl needs n, d >= 1");
    Rng rng(derive_seed(cmd.common.seed, kSyntheticStream));
    x = Matrix(cmd.d, cmd.n);
    for (double& v : x.data()) v = rng.normal();
  }
  const std::size_t d = x.rows(), n = x.cols();
  if (n == 0) throw std::invalid_argument("jl needs at least one vector");

  const JlTransform t = sample_transform(params, d, cmd.common.seed, cfg);
  const std::size_t k = t.output_dim();
  const double shape = jl_cost_shape(d, t.schedule().k, cfg);
  const double slack = [&](std::size_t trials) { return cmd.delta + 2.0 * std::sqrt(cmd.delta / trials); }(n);

  auto base_row = [&](std::string scenario) {
    ReportRow row;
    row.scenario = std::move(scenario);
    row.d = d;
    row.k = k;
    row.m = cfg.m();
    row.tau = cfg.tau();
    row.seed = cmd.common.seed;
    row.tables = t.schedule().ell;
    return row;
  };

  Report report;
  {
    CostLedger ledger;
    const Matrix y = apply_batch(t, x, cfg, ledger, cmd.common.threads);
    std::size_t failures = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const double nx = norm2(x.col(s)), ny = norm2(y.col(s));
      failures += std::abs(ny - nx) > cmd.eps * nx;
    }
    ReportRow row = base_row("jl_batch");
    row.n = n;
    row.tile_mults = ledger.tile_mults;
    row.tcu_time = ledger.tcu_time;
    row.ram_flops = static_cast<std::uint64_t>(d) * k * n;
    row.failure_rate = static_cast<double>(failures) / static_cast<double>(n);
    row.fitted_constant = ledger.tcu_time.to_double() / static_cast<double>(n) / shape;
    row.pass = *row.failure_rate <= slack;
    report.add(std::move(row));
  }
  {
    CostLedger ledger;
    const auto first = x.col(0);
    apply(t, first, cfg, ledger);
    ReportRow row = base_row("jl_single");
    row.n = 1;
    row.tile_mults = ledger.tile_mults;
    row.tcu_time = ledger.tcu_time;
    row.ram_flops = static_cast<std::uint64_t>(d) * k;
    row.fitted_constant = ledger.tcu_time.to_double() / shape;
    report.add(std::move(row));
  }
  if (cmd.trials > 0) {
    std::vector<double> unit = x.col(0);
    const double nu = norm2(unit);
    if (nu == 0.0) throw std::invalid_argument("first vector is zero; cannot run distortion trials");
    for (double& v : unit) v /= nu;
    std::vector<CostLedger> ledgers(cmd.trials);
    std::vector<char> failed(cmd.trials, 0);
    parallel_for(cmd.trials, cmd.common.threads, [&](std::size_t i) {
      const JlTransform ti = sample_transform(params, d, derive_seed(cmd.common.seed, kTrialStream, i), cfg);
      const auto y = apply(ti, unit, cfg, ledgers[i]);
      failed[i] = std::abs(norm2(y) - 1.0) > cmd.eps;
    });
    CostLedger total;
    for (const auto& l : ledgers) total += l;
    ReportRow row = base_row("jl_trials");
    row.n = cmd.trials;
    row.tile_mults = total.tile_mults;
    row.tcu_time = total.tcu_time;
    row.ram_flops = static_cast<std::uint64_t>(d) * k * cmd.trials;
    const auto failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
    row.failure_rate = static_cast<double>(failures) / static_cast<double>(cmd.trials);
    row.pass = *row.failure_rate <= cmd.delta + 2.0 * std::sqrt(cmd.delta / static_cast<double>(cmd.trials));
    report.add(std::move(row));
  }
  return report;
}

Report cmd_join(const JoinCommand& cmd) {
  const TcuConfig cfg = make_config(cmd.common.m, cmd.common.tau);
  if (cmd.mode != "brute" && cmd.mode != "lsh" && cmd.mode != "both")
    throw std::invalid_argument("mode must be brute, lsh or both");
  if (cmd.amplify == 0) throw std::invalid_argument("amplify must be at least 1");
  JoinInput input = load_join_input(cmd, IpDistance::parse(cmd.dist, cmd.d));
  const IpDistance dist{input.kind, input.p.dim()};
  if (IpDistance::parse(cmd.dist, dist.d).kind != dist.kind)
    throw std::invalid_argument("dataset kind " + dist.name() + " does not match --dist " + cmd.dist);
  const std::size_t n = input.p.size();
  const JoinOptions options{cmd.drop_self_pairs, cmd.common.threads};
  const double s = static_cast<double>(cfg.tile_side());

  auto base_row = [&](std::string scenario) {
    ReportRow row;
    row.scenario = std::move(scenario);
    row.n = n;
    row.d = dist.d;
    row.k = dist.lifted_dim();
    row.m = cfg.m();
    row.tau = cfg.tau();
    row.seed = cmd.common.seed;
    return row;
  };

  Report report;
  std::optional<JoinResult> brute;
  if (cmd.mode != "lsh") {
    CostLedger ledger;
    brute = brute_force_join(input.p, input.q, dist, cmd.r, cfg, ledger, options);
    ReportRow row = base_row("brute");
    row.tile_mults = ledger.tile_mults;
    row.tcu_time = ledger.tcu_time;
    row.ram_flops = ledger.ram_flops;
    row.pairs = brute->pairs.size();
    row.recall = 1.0;
    if (!input.truth.empty()) row.recall_truth = recall_against(brute->pairs, input.truth);
    const auto side = cfg.tile_side();
    const bool whole_tiles = n % side == 0 && input.q.size() % side == 0 && dist.lifted_dim() % side == 0;
    const Rational full_speedup =
        Rational(static_cast<std::int64_t>(cfg.m() * cfg.tile_side())) / cfg.tau();
    row.pass = (!row.recall_truth || *row.recall_truth == 1.0) && (!whole_tiles || row.speedup() == full_speedup);
    report.add(std::move(row));
  }
  if (cmd.mode != "brute") {
    const auto family = make_family(cmd.family, dist.d);
    const LshParams params = family->sensitivity(cmd.r, cmd.approx_c);
    const RepetitionPlan plan = plan_repetitions(params, n, cfg);
    CostLedger ledger;
    std::vector<IdPair> found;
    CandidateCounts candidates;
    for (std::size_t run = 0; run < cmd.amplify; ++run) {
      const auto result = lsh_join(input.p, input.q, dist, cmd.r, *family, plan, cfg,
                                   derive_seed(cmd.common.seed, kLshStream, run), ledger, options);
      found.insert(found.end(), result.pairs.begin(), result.pairs.end());
      candidates += result.stats.candidates;
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());

    const CandidateCounts census = pair_census(input.p, input.q, dist, cmd.r, cmd.approx_c, cmd.drop_self_pairs);
    const double bound =
        lsh_join_cost_bound(plan, dist, cfg, n, census.near, census.approx) * static_cast<double>(cmd.amplify);
    const double far_budget = 2.0 * s * s * s / cfg.tau().to_double();

    ReportRow row = base_row(cmd.amplify > 1 ? "lsh_amplified" : "lsh");
    row.tables = plan.tables() * cmd.amplify;
    row.tile_mults = ledger.tile_mults;
    row.tcu_time = ledger.tcu_time;
    row.ram_flops = ledger.ram_flops;
    row.pairs = found.size();
    row.candidates = candidates;
    row.far_per_point =
        static_cast<double>(candidates.far) / (static_cast<double>(n) * static_cast<double>(row.tables));
    row.bound = bound;
    row.fitted_constant = bound > 0 ? ledger.tcu_time.to_double() / bound : 0.0;
    row.note = "bound includes factor d";
    bool sound = true;
    if (brute) {
      row.recall = recall_against(found, brute->pairs);
      sound = is_subset(found, brute->pairs);
    }
    if (!input.truth.empty()) row.recall_truth = recall_against(found, input.truth);
    const auto amplified_runs = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2)))));
    const double recall_floor = cmd.amplify >= amplified_runs ? 0.99 : 0.6;
    const std::optional<double> measured = row.recall ? row.recall : row.recall_truth;
    row.pass = sound && *row.far_per_point <= far_budget && (!measured || *measured >= recall_floor);
    report.add(std::move(row));
  }
  return report;
}

SweepOutcome cmd_sweep(const SweepCommand& cmd) {
  if (cmd.scenario != "brute" && cmd.scenario != "lsh" && cmd.scenario != "jl")
    throw std::invalid_argument("sweep scenario must be brute, lsh or jl");
  SweepOutcome outcome;
  for (const auto m : cmd.ms) {
    for (const auto n : cmd.ns) {
      for (const auto d : cmd.ds) {
        if (cmd.scenario == "jl") {
          JlCommand c = cmd.jl;
          c.common.m = m;
          c.n = n;
          c.d = d;
          c.data.clear();
          Report r = cmd_jl(c);
          outcome.report.add(r.rows().front());
        } else {
          JoinCommand c = cmd.join;
          c.common.m = m;
          c.n = n;
          c.d = d;
          c.planted = std::min(c.planted, n);
          c.mode = cmd.scenario;
          c.data.clear();
          Report r = cmd_join(c);
          outcome.report.add(r.rows().front());
        }
      }
    }
  }
  outcome.report.sort_rows();
  for (const auto& row : outcome.report.rows())
    if (!row.pass) outcome.failures.push_back("cell " + row.sort_key() + " failed its threshold");

  std::vector<double> fitted;
  for (const auto& row : outcome.report.rows())
    if (row.fitted_constant && *row.fitted_constant > 0) fitted.push_back(*row.fitted_constant);
  const double limit = cmd.scenario == "jl" ? 4.0 : cmd.scenario == "lsh" ? 8.0 : 0.0;
  if (limit > 0 && fitted.size() > 1 && max_min_ratio(fitted) > limit) {
    outcome.failures.push_back("fitted constant spread " + format_double(max_min_ratio(fitted)) + " exceeds " +
                               format_double(limit));
  }
  outcome.passed = outcome.failures.empty();
  return outcome;
}

}  // namespace tcusim::bench
