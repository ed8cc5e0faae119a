#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcusim/dataset.hpp"
#include "tcusim/report.hpp"
#include "tcusim/tcu.hpp"

namespace tcusim::bench {

/// tau given as "m", "m^1.5" (or "m^3/2"), or a rational such as "4096", "5/2", "2.5".
TcuConfig make_config(std::uint64_t m, const std::string& tau_spec);

struct CommonOptions {
  std::uint64_t m = 256;
  std::string tau = "m";
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct GenCommand {
  std::size_t n = 64;
  std::size_t d = 32;
  std::string dist = "hamming";
  std::size_t planted = 4;
  double r = 1.0;
  double background = 8.0;
  std::uint64_t seed = 1;
  std::string out = "dataset";  // path prefix
};

struct DatasetPaths {
  std::filesystem::path p;
  std::filesystem::path q;
  std::filesystem::path truth;
  static DatasetPaths from_prefix(const std::string& prefix);
};

/// Writes <out>_P.tcuj, <out>_Q.tcuj and <out>_truth.csv.
DatasetPaths cmd_gen(const GenCommand& cmd);

struct JlCommand {
  CommonOptions common;
  double eps = 0.25;
  double delta = 0.05;
  std::size_t zeta = 2;
  double c_const = 4.0;
  std::string distribution = "gaussian";
  std::string data;  // dataset file; synthetic Gaussian vectors when empty
  std::size_t n = 16;
  std::size_t d = 4096;
  std::size_t trials = 0;  // independent transforms of one unit vector
};

/// Rows jl_batch (whole dataset through one transform), jl_single (first
/// vector alone) and, when trials > 0, jl_trials (distortion Monte Carlo).
Report cmd_jl(const JlCommand& cmd);

struct JoinCommand {
  CommonOptions common;
  std::string dist = "hamming";
  double r = 4.0;
  double approx_c = 12.0;
  std::string family = "bitsample";
  std::size_t amplify = 1;
  std::string mode = "both";  // brute, lsh or both
  std::string data;           // dataset prefix from gen; planted instance when empty
  std::size_t n = 1024;
  std::size_t d = 128;
  std::size_t planted = 128;
  double background = 32.0;
  bool drop_self_pairs = false;
};

Report cmd_join(const JoinCommand& cmd);

struct SweepCommand {
  std::string scenario = "brute";  // brute, lsh or jl
  std::vector<std::uint64_t> ms;
  std::vector<std::size_t> ns;
  std::vector<std::size_t> ds;
  JlCommand jl;
  JoinCommand join;
};

struct SweepOutcome {
  Report report;
  bool passed = true;
  std::vector<std::string> failures;
};

/// One row per (m, n, d) cell, sorted by cell key. Grid-level checks: the
/// fitted cost constants must satisfy max/min <= 4 (jl) or <= 8 (lsh).
SweepOutcome cmd_sweep(const SweepCommand& cmd);

}  // namespace tcusim::bench
