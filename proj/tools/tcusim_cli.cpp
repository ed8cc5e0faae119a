// tcusim: command-line driver for the TCU cost simulator.
//
//   tcusim gen   --n 1024 --d 128 --dist hamming --planted 128 --r 4 --out data/run
//   tcusim jl    --d 4096 --n 64 --m 256 --tau m --out jl.csv
//   tcusim join  --data data/run --r 4 --approx-c 12 --mode both --out join.csv
//   tcusim sweep --scenario brute --ms 64,256,1024 --ns 256,1024 --ds 128 --out sweep.csv
//
// Exit status: 0 ok, 1 bad input, 2 a sweep threshold failed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "tcusim/bench.hpp"

namespace {

using namespace tcusim;
using namespace tcusim::bench;

void add_common(CLI::App* app, CommonOptions& common, std::string& out) {
  app->add_option("--m", common.m, "TCU tile size m (a perfect square)")->capture_default_str();
  app->add_option("--tau", common.tau, "latency per tile: m, m^1.5, or a number such as 4096 or 5/2")
      ->capture_default_str();
  app->add_option("--seed", common.seed, "master seed")->capture_default_str();
  app->add_option("--threads", common.threads, "worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--out", out, "CSV output path; stdout when omitted");
}

void emit(const Report& report, const std::string& out) {
  if (out.empty() || out == "-") {
    report.write_csv(std::cout);
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + out + " for writing");
  report.write_csv(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-core cost simulator: JL projection and similarity joins"};
  app.require_subcommand(1);

  GenCommand gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a planted P/Q instance");
  gen_cmd->add_option("--n", gen.n, "points per side")->capture_default_str();
  gen_cmd->add_option("--d", gen.d, "dimension")->capture_default_str();
  gen_cmd->add_option("--dist", gen.dist, "hamming, l2sq or cosine")->capture_default_str();
  gen_cmd->add_option("--planted", gen.planted, "number of planted near pairs")->capture_default_str();
  gen_cmd->add_option("--r", gen.r, "planted distance (similarity for cosine)")->capture_default_str();
  gen_cmd->add_option("--background", gen.background, "minimum distance of every other cross pair")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output prefix")->capture_default_str();

  JlCommand jl;
  std::string jl_out;
  auto* jl_cmd = app.add_subcommand("jl", "run the blocked JL transform");
  add_common(jl_cmd, jl.common, jl_out);
  jl_cmd->add_option("--eps", jl.eps, "distortion")->capture_default_str();
  jl_cmd->add_option("--delta", jl.delta, "failure probability")->capture_default_str();
  jl_cmd->add_option("--zeta", jl.zeta, "block growth factor")->capture_default_str();
  jl_cmd->add_option("--c-const", jl.c_const, "constant in k = c eps^-2 ln(1/delta)")->capture_default_str();
  jl_cmd->add_option("--distribution", jl.distribution, "gaussian, rademacher or sparse(s)")->capture_default_str();
  jl_cmd->add_option("--d", jl.d, "input dimension for synthetic data")->capture_default_str();
  jl_cmd->add_option("--n", jl.n, "number of synthetic vectors")->capture_default_str();
  jl_cmd->add_option("--data", jl.data, "dataset file (.tcuj) instead of synthetic vectors");
  jl_cmd->add_option("--trials", jl.trials, "independent transforms for the distortion estimate")
      ->capture_default_str();

  JoinCommand join;
  std::string join_out;
  auto* join_cmd = app.add_subcommand("join", "similarity join by brute force and/or LSH");
  add_common(join_cmd, join.common, join_out);
  join_cmd->add_option("--dist", join.dist, "hamming, l2sq or cosine")->capture_default_str();
  join_cmd->add_option("--r", join.r, "join threshold")->capture_default_str();
  join_cmd->add_option("--approx-c", join.approx_c, "approximation factor c > 1")->capture_default_str();
  join_cmd->add_option("--family", join.family, "bitsample or simhash")->capture_default_str();
  join_cmd->add_option("--amplify", join.amplify, "independent LSH runs, union of results")->capture_default_str();
  join_cmd->add_option("--mode", join.mode, "brute, lsh or both")->capture_default_str();
  join_cmd->add_option("--data", join.data, "dataset prefix written by gen");
  join_cmd->add_option("--n", join.n, "points per side when generating")->capture_default_str();
  join_cmd->add_option("--d", join.d, "dimension when generating")->capture_default_str();
  join_cmd->add_option("--planted", join.planted, "planted pairs when generating")->capture_default_str();
  join_cmd->add_option("--background", join.background, "background distance when generating")
      ->capture_default_str();
  join_cmd->add_flag("--drop-self-pairs", join.drop_self_pairs, "omit pairs with equal ids");

  SweepCommand sweep;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "grid over m, n, d with pass/fail thresholds");
  add_common(sweep_cmd, sweep.join.common, sweep_out);
  sweep_cmd->add_option("--scenario", sweep.scenario, "brute, lsh or jl")->capture_default_str();
  sweep_cmd->add_option("--ms", sweep.ms, "tile sizes")->delimiter(',')->required();
  sweep_cmd->add_option("--ns", sweep.ns, "point counts")->delimiter(',')->required();
  sweep_cmd->add_option("--ds", sweep.ds, "dimensions")->delimiter(',')->required();
  sweep_cmd->add_option("--r", sweep.join.r, "join threshold")->capture_default_str();
  sweep_cmd->add_option("--approx-c", sweep.join.approx_c, "approximation factor")->capture_default_str();
  sweep_cmd->add_option("--dist", sweep.join.dist, "join distance")->capture_default_str();
  sweep_cmd->add_option("--family", sweep.join.family, "LSH family")->capture_default_str();
  sweep_cmd->add_option("--planted", sweep.join.planted, "planted pairs per cell (capped at n)")
      ->capture_default_str();
  sweep_cmd->add_option("--background", sweep.join.background, "background distance")->capture_default_str();
  sweep_cmd->add_option("--eps", sweep.jl.eps, "JL distortion")->capture_default_str();
  sweep_cmd->add_option("--delta", sweep.jl.delta, "JL failure probability")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen_cmd) {
      const auto paths = cmd_gen(gen);
      std::cerr << "wrote " << paths.p.string() << ", " << paths.q.string() << ", " << paths.truth.string() << '\n';
    } else if (*jl_cmd) {
      emit(cmd_jl(jl), jl_out);
    } else if (*join_cmd) {
      emit(cmd_join(join), join_out);
    } else if (*sweep_cmd) {
      sweep.jl.common = sweep.join.common;
      const SweepOutcome outcome = cmd_sweep(sweep);
      emit(outcome.report, sweep_out);
      for (const auto& f : outcome.failures) std::cerr << "FAIL: " << f << '\n';
      if (!outcome.passed) return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
