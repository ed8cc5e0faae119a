// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance --cli path/to/tcusim --workdir scratch/ [--only 3,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <sys/wait.h>

#include "../unit/oracles.hpp"
#include "CLI11.hpp"
#include "tcusim/bench.hpp"
#include "tcusim/jl.hpp"
#include "tcusim/lsh.hpp"
#include "tcusim/parallel.hpp"
#include "tcusim/random.hpp"

namespace fs = std::filesystem;
using namespace tcusim;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. Tiled multiply equals the schoolbook oracle; tile charges follow the ceiling formula.
Verdict tiling_exactness() {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::size_t> dim(1, 200);
  const std::uint64_t ms[] = {4, 16, 64, 256};
  std::size_t int_mismatch = 0, float_mismatch = 0, charge_mismatch = 0;
  double worst = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t p = dim(gen), r = dim(gen), q = dim(gen);
    const TcuConfig cfg = TcuConfig::linear(ms[t % 4]);
    const auto s = cfg.tile_side();
    const Matrix a = oracle::random_integer_matrix(p, r, gen), b = oracle::random_integer_matrix(r, q, gen);
    CostLedger ledger;
    if (multiply(a, b, cfg, ledger) != oracle::schoolbook(a, b)) ++int_mismatch;
    if (ledger.tile_mults != oracle::ceil_div(p, s) * oracle::ceil_div(r, s) * oracle::ceil_div(q, s) ||
        ledger.tcu_time != cfg.tau() * Rational(static_cast<std::int64_t>(ledger.tile_mults)) ||
        ledger.ram_flops != p * r * q)
      ++charge_mismatch;

    const Matrix fa = oracle::random_real_matrix(p, r, gen), fb = oracle::random_real_matrix(r, q, gen);
    const Matrix got = multiply(fa, fb, cfg, ledger);
    const Matrix want = oracle::schoolbook(fa, fb);
    bool bad = false;
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double err = std::abs(got.data()[i] - want.data()[i]) / std::max(1.0, std::abs(want.data()[i]));
      worst = std::max(worst, err);
      bad = bad || err > 1e-12;
    }
    float_mismatch += bad;
  }
  return {int_mismatch == 0 && float_mismatch == 0 && charge_mismatch == 0,
          fmt("%d shapes; integer mismatches %zu, float mismatches %zu (worst rel %.2e), charge mismatches %zu", trials,
              int_mismatch, float_mismatch, worst, charge_mismatch)};
}

// 2. apply agrees with the dense materialized transform.
Verdict jl_oracle() {
  struct Config {
    std::size_t d, k, zeta;
  };
  const Config configs[] = {{1024, 16, 2}, {4096, 64, 2}, {1000, 16, 2}, {729, 9, 3}, {2048, 32, 4}};
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  double worst = 0;
  const TcuConfig cfg = TcuConfig::linear(64);
  for (const auto& c : configs) {
    const JlSchedule s = build_schedule(c.d, c.k, c.zeta);
    const JlTransform t = sample_transform(s, EntryDistribution{}, 1000 + c.d, c.k);
    const Matrix dense = materialize_dense(t);
    for (int v = 0; v < 100; ++v) {
      std::vector<double> x(c.d);
      for (double& e : x) e = normal(gen);
      std::vector<double> xp(x);
      xp.resize(s.d_padded, 0.0);
      CostLedger ledger;
      worst = std::max(worst, oracle::rel_l2(apply(t, x, cfg, ledger), oracle::matvec(dense, xp)));
    }
  }
  // The dense matrix itself against explicit Kronecker products, on the
  // smallest configuration.
  const JlSchedule s = build_schedule(1024, 16, 2);
  const JlTransform t = sample_transform(s, EntryDistribution{}, 2024, 16);
  Matrix kron = oracle::kron_identity(s.levels[0].blocks, t.level_matrices()[0]);
  for (std::size_t i = 1; i < s.ell; ++i)
    kron = oracle::schoolbook(oracle::kron_identity(s.levels[i].blocks, t.level_matrices()[i]), kron);
  const Matrix dense = materialize_dense(t);
  double kron_err = 0;
  for (std::size_t i = 0; i < kron.size(); ++i)
    kron_err = std::max(kron_err, std::abs(kron.data()[i] - dense.data()[i]));
  return {worst <= 1e-9 && kron_err <= 1e-12,
          fmt("5 configs x 100 vectors; worst relative L2 %.2e; dense vs Kronecker max abs %.2e", worst, kron_err)};
}

// 3. Distortion failure rate of independent transforms on a fixed unit vector.
Verdict jl_distortion() {
  JlParams params;  // eps 0.25, delta 0.05, C 4, gaussian
  const std::size_t d = 4096, trials = 2000;
  const TcuConfig cfg = TcuConfig::linear(256);
  std::vector<double> x(d);
  Rng rng(3);
  double sq = 0;
  for (double& v : x) {
    v = rng.normal();
    sq += v * v;
  }
  for (double& v : x) v /= std::sqrt(sq);
  std::vector<char> failed(trials, 0);
  std::vector<double> norms(trials);
  parallel_for(trials, worker_count(), [&](std::size_t i) {
    const JlTransform t = sample_transform(params, d, derive_seed(3, i), cfg);
    CostLedger ledger;
    norms[i] = oracle::norm(apply(t, x, cfg, ledger));
    failed[i] = std::abs(norms[i] - 1.0) > params.eps;
  });
  const double rate = static_cast<double>(std::count(failed.begin(), failed.end(), 1)) / trials;
  const double limit = params.delta + 2.0 * std::sqrt(params.delta / trials);
  const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
  return {rate <= limit, fmt("k=%zu, %zu transforms: failure rate %.4f (limit %.4f), norm range [%.3f, %.3f]",
                             target_dim(params.eps, params.delta), trials, rate, limit, *lo, *hi)};
}

// 4. Per-vector TCU time tracks (dk + k^2 sqrt(m) ln^3(d/k)) tau / m^1.5.
Verdict jl_cost_shape() {
  std::vector<double> fitted;
  std::string worst_cells;
  double lo_val = 1e300, hi_val = 0;
  std::string lo_cell, hi_cell;
  for (std::size_t k : {64, 128, 256}) {
    for (std::size_t logd = 12; logd <= 16; ++logd) {
      const std::size_t d = std::size_t{1} << logd;
      const JlSchedule s = build_schedule(d, k, 2);
      const JlTransform t = sample_transform(s, EntryDistribution{}, d * 7 + k, k);
      std::vector<double> x(d, 1.0);
      for (std::uint64_t side : {8, 16, 32, 64}) {
        if (side > k) continue;
        const TcuConfig cfg = TcuConfig::linear(side * side);
        CostLedger ledger;
        apply(t, x, cfg, ledger);
        const double lg = std::log(static_cast<double>(d) / static_cast<double>(k));
        const double shape = (static_cast<double>(d * k) + static_cast<double>(k * k * side) * lg * lg * lg) *
                             cfg.tau().to_double() / static_cast<double>(side * side * side);
        const double c = ledger.tcu_time.to_double() / shape;
        fitted.push_back(c);
        const std::string cell = fmt("(k=%zu,d=2^%zu,sqrt m=%llu)", k, logd, static_cast<unsigned long long>(side));
        if (c < lo_val) lo_val = c, lo_cell = cell;
        if (c > hi_val) hi_val = c, hi_cell = cell;
      }
    }
  }
  const double spread = hi_val / lo_val;
  return {spread <= 4.0, fmt("%zu cells; fitted constant in [%.3f %s, %.3f %s], max/min %.3f (limit 4)",
                             fitted.size(), lo_val, lo_cell.c_str(), hi_val, hi_cell.c_str(), spread)};
}

// 5. Brute-force join speedup is exactly sqrt(m) at tau = m.
Verdict brute_speedup() {
  bench::SweepCommand sweep;
  sweep.scenario = "brute";
  sweep.ms = {64, 256, 1024};
  sweep.ns = {1024};
  sweep.ds = {1024};
  sweep.join.planted = 64;
  sweep.join.r = 4;
  sweep.join.background = 256;
  const auto out = bench::cmd_sweep(sweep);
  std::string got;
  bool ok = out.report.rows().size() == 3;
  const std::int64_t want[] = {8, 16, 32};
  for (std::size_t i = 0; i < out.report.rows().size() && i < 3; ++i) {
    const auto sp = out.report.rows()[i].speedup();
    ok = ok && sp && *sp == Rational(want[i]) && out.report.rows()[i].recall_truth == 1.0;
    got += (i ? ", " : "") + (sp ? sp->str() : std::string("none"));
  }
  return {ok && out.passed, "speedup at m = 64, 256, 1024: " + got + " (want 8, 16, 32, exact)"};
}

// 6. Feature-map inner products reproduce the distances.
Verdict ip_identities() {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  const std::size_t d = 32, pairs = 10000;
  std::size_t ham_bad = 0;
  double l2_worst = 0, cos_worst = 0;
  const IpDistance ham{DistanceKind::hamming, d}, l2{DistanceKind::l2_squared, d}, cos{DistanceKind::cosine, d};
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  for (std::size_t t = 0; t < pairs; ++t) {
    std::vector<int> ix(d), iy(d);
    std::vector<double> bx(d), by(d), rx(d), ry(d);
    for (std::size_t i = 0; i < d; ++i) {
      ix[i] = static_cast<int>(gen() & 1);
      iy[i] = static_cast<int>(gen() & 1);
      bx[i] = ix[i];
      by[i] = iy[i];
      rx[i] = normal(gen);
      ry[i] = normal(gen);
    }
    if (dot(feature_map_f(bx, ham), feature_map_g(by, ham)) != oracle::hamming(ix, iy)) ++ham_bad;
    const double want_l2 = oracle::squared_euclidean(rx, ry);
    l2_worst = std::max(l2_worst, std::abs(dot(feature_map_f(rx, l2), feature_map_g(ry, l2)) - want_l2) / want_l2);
    const double want_cos = oracle::cosine(rx, ry);
    cos_worst = std::max(cos_worst, std::abs(dot(feature_map_f(rx, cos), feature_map_g(ry, cos)) - want_cos) /
                                        std::max(std::abs(want_cos), 1e-300));
  }
  return {ham_bad == 0 && l2_worst <= 1e-9 && cos_worst <= 1e-9,
          fmt("%zu pairs per kind; hamming mismatches %zu, l2sq worst rel %.2e, cosine worst rel %.2e", pairs, ham_bad,
              l2_worst, cos_worst)};
}

// 7 and 8 share one planted suite.
struct SuiteResult {
  std::size_t violations = 0;
  std::size_t instances = 0;
  double single_recall = 0;
  double amplified_recall = 0;
  double min_amplified = 1;
  double seconds = 0;
};

SuiteResult& planted_suite() {
  static SuiteResult result;
  static bool done = false;
  if (done) return result;
  done = true;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = 1024, d = 128, seeds = 20;
  const auto runs = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))));
  const IpDistance ham{DistanceKind::hamming, d};
  const auto family = bit_sampling_family(d);
  const TcuConfig cfg = TcuConfig::linear(256);
  const RepetitionPlan plan = plan_repetitions(family->sensitivity(4, 12), n, cfg);
  for (std::size_t s = 0; s < seeds; ++s) {
    PlantedSpec spec;
    spec.n = n;
    spec.d = d;
    spec.planted = 128;
    spec.planted_distance = 4;
    spec.background = 32;
    spec.seed = derive_seed(8, s);
    const auto inst = generate_planted(spec);
    CostLedger ledger;
    const auto brute = brute_force_join(inst.p, inst.q, ham, 4, cfg, ledger).pairs;
    auto recall = [&](const std::vector<IdPair>& found) {
      std::size_t hits = 0;
      for (const auto& p : brute) hits += std::binary_search(found.begin(), found.end(), p);
      return brute.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(brute.size());
    };
    std::set<IdPair> amplified;
    for (std::size_t run = 0; run < runs; ++run) {
      const auto res = lsh_join(inst.p, inst.q, ham, 4, *family, plan, cfg, derive_seed(9, s, run), ledger);
      ++result.instances;
      if (!std::includes(brute.begin(), brute.end(), res.pairs.begin(), res.pairs.end())) ++result.violations;
      if (run == 0) result.single_recall += recall(res.pairs);
      amplified.insert(res.pairs.begin(), res.pairs.end());
    }
    const double amp = recall(std::vector<IdPair>(amplified.begin(), amplified.end()));
    result.amplified_recall += amp;
    result.min_amplified = std::min(result.min_amplified, amp);
  }
  result.single_recall /= seeds;
  result.amplified_recall /= seeds;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Verdict join_soundness() {
  const auto& r = planted_suite();
  return {r.violations == 0, fmt("%zu LSH runs over 20 planted instances (n=1024, d=128): %zu soundness violations",
                                 r.instances, r.violations)};
}

Verdict join_recall() {
  const auto& r = planted_suite();
  return {r.single_recall >= 0.6 && r.amplified_recall >= 0.99 && r.seconds < 300,
          fmt("mean single-run recall %.4f (>= 0.6); mean 10-run recall %.4f, min %.4f (>= 0.99); suite %.1fs",
              r.single_recall, r.amplified_recall, r.min_amplified, r.seconds)};
}

// 9. One fitted constant bounds the LSH join cost across the (n, m) grid.
Verdict lsh_cost_bound() {
  bench::SweepCommand sweep;
  sweep.scenario = "lsh";
  sweep.ms = {64, 256, 1024};
  sweep.ns = {256, 1024, 4096};
  sweep.ds = {128};
  sweep.join.r = 4;
  sweep.join.approx_c = 12;
  sweep.join.planted = std::numeric_limits<std::size_t>::max();  // every P point has a partner
  sweep.join.background = 32;
  const auto out = bench::cmd_sweep(sweep);
  double lo = 1e300, hi = 0, worst_far = 0;
  bool far_ok = true;
  for (const auto& row : out.report.rows()) {
    lo = std::min(lo, *row.fitted_constant);
    hi = std::max(hi, *row.fitted_constant);
    const double budget = 2.0 * std::pow(static_cast<double>(row.m), 1.5) / row.tau.to_double();
    worst_far = std::max(worst_far, *row.far_per_point / budget);
    far_ok = far_ok && *row.far_per_point <= budget;
  }
  const bool ok = out.report.rows().size() == 9 && hi / lo <= 8.0 && far_ok;
  return {ok, fmt("9 cells; fitted constant in [%.3f, %.3f], max/min %.3f (limit 8); worst far/budget %.3f", lo, hi,
                  hi / lo, worst_far)};
}

// 10. Fixed command lines give byte-identical output across runs and thread counts.
Verdict determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty()) return {false, "no --cli given"};
  fs::create_directories(work);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  auto run = [&](const std::string& args, const fs::path& out) {
    const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::vector<std::string> commands = {
      "join --n 512 --d 128 --planted 64 --m 64 --seed 7 --mode both",
      "join --dist cosine --family simhash --r 0.9 --approx-c 2 --background 0.5 --n 200 --d 32 --planted 20 --m 16 "
      "--seed 4 --amplify 3",
      "jl --d 2048 --n 32 --trials 16 --seed 3 --m 256",
      "sweep --scenario brute --ms 16,64 --ns 64,128 --ds 64 --planted 8 --background 12 --seed 5",
  };
  std::size_t identical = 0, checked = 0;
  std::string problem;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string reference;
    int reference_status = -2;
    for (unsigned threads : {1u, 4u}) {
      for (int rep = 0; rep < 3; ++rep) {
        const fs::path out = work / fmt("cmd%zu_t%u_r%d.csv", c, threads, rep);
        const int status = run(commands[c] + " --threads " + std::to_string(threads), out);
        const std::string bytes = slurp(out);
        ++checked;
        if (reference_status == -2) {
          reference = bytes;
          reference_status = status;
          if (status != 0 || bytes.empty()) problem = fmt("command %zu exited %d", c, status);
        }
        if (bytes == reference && status == reference_status) ++identical;
      }
    }
  }
  // gen writes files, not CSV reports.
  for (int rep = 0; rep < 3; ++rep) {
    const std::string prefix = (work / fmt("gen%d", rep)).string();
    const std::string cmd = "\"" + cli + "\" gen --n 128 --d 64 --planted 8 --r 2 --background 16 --seed 11 --out \"" +
                            prefix + "\" 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) problem = "gen failed";
  }
  bool gen_same = true;
  for (const char* suffix : {"_P.tcuj", "_Q.tcuj", "_truth.csv"}) {
    const std::string first = slurp(work / (std::string("gen0") + suffix));
    gen_same = gen_same && !first.empty();
    for (int rep = 1; rep < 3; ++rep) gen_same = gen_same && slurp(work / (fmt("gen%d", rep) + suffix)) == first;
  }
  return {identical == checked && gen_same && problem.empty(),
          fmt("%zu/%zu report files identical across 3 runs x threads {1,4}; gen outputs identical: %s%s%s", identical,
              checked, gen_same ? "yes" : "no", problem.empty() ? "" : "; ", problem.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli;
  std::string workdir = (fs::temp_directory_path() / "tcusim_acceptance").string();
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the tcusim executable");
  app.add_option("--workdir", workdir, "scratch directory");
  app.add_option("--only", only, "run a subset of criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: no runtime limit
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "tiling exactness", 30, tiling_exactness},
      {2, "JL dense-oracle equivalence", 60, jl_oracle},
      {3, "JL distortion", 120, jl_distortion},
      {4, "JL cost shape", 0, jl_cost_shape},
      {5, "brute-force sqrt(m) speedup", 60, brute_speedup},
      {6, "ip-distance identities", 10, ip_identities},
      {7, "join soundness", 0, join_soundness},
      {8, "join recall", 0, join_recall},
      {9, "LSH join cost bound", 0, lsh_cost_bound},
      {10, "determinism", 0, [&] { return determinism(cli, workdir); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      v.pass = false;
      v.detail += fmt("; runtime %.1fs exceeds %.0fs", secs, c.limit_seconds);
    }
    std::printf("[%s] criterion %2d: %s -- %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
