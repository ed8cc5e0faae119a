#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tcusim/bench.hpp"

using namespace tcusim;
using namespace tcusim::bench;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string csv(const Report& r) {
  std::ostringstream out;
  r.write_csv(out);
  return out.str();
}

}  // namespace

TEST_CASE("tau strings") {
  CHECK(make_config(256, "m").tau() == Rational(256));
  CHECK(make_config(256, "m^1.5").tau() == Rational(4096));
  CHECK(make_config(256, "m^3/2").tau() == Rational(4096));
  CHECK(make_config(256, "5/2").tau() == Rational(5, 2));
  CHECK(make_config(256, "100").tau() == Rational(100));
  CHECK_THROWS(make_config(255, "m"));
  CHECK_THROWS(make_config(256, "-3"));
  CHECK_THROWS(make_config(256, "fast"));
}

TEST_CASE("report rows: exact speedup and CSV formatting") {
  ReportRow row;
  row.scenario = "x";
  row.tcu_time = Rational(3);
  row.ram_flops = 10;
  CHECK(*row.speedup() == Rational(10, 3));
  row.recall = 0.1;
  Report r;
  r.add(row);
  const auto lines = lines_of(csv(r));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == Report::header());
  CHECK(lines[1].find("3.3333333333333335") != std::string::npos);
  CHECK(lines[1].find(",0.10000000000000001,") != std::string::npos);

  ReportRow idle;
  CHECK_FALSE(idle.speedup().has_value());
}

TEST_CASE("gen writes the dataset triple") {
  const auto dir = std::filesystem::temp_directory_path() / "tcusim_bench_gen";
  std::filesystem::create_directories(dir);
  GenCommand g;
  g.out = (dir / "run").string();
  const auto paths = cmd_gen(g);
  CHECK(std::filesystem::exists(paths.p));
  CHECK(std::filesystem::exists(paths.q));
  std::ifstream truth(paths.truth);
  CHECK(read_pairs_csv(truth).size() == 4);

  JoinCommand j;
  j.data = g.out;
  j.r = 1;
  j.approx_c = 4;
  j.common.m = 16;
  const Report rep = cmd_join(j);
  REQUIRE(rep.rows().size() == 2);
  CHECK(rep.rows()[0].scenario == "brute");
  CHECK(*rep.rows()[0].recall_truth == 1.0);
  CHECK(rep.rows()[0].pass);
  j.dist = "cosine";
  CHECK_THROWS(cmd_join(j));  // dataset kind must match
  std::filesystem::remove_all(dir);
}

TEST_CASE("join: brute-force speedup is sqrt(m) at tau = m and 1 at tau = m^1.5") {
  JoinCommand j;
  j.mode = "brute";
  j.n = 256;
  j.d = 128;
  j.planted = 16;
  j.common.m = 64;
  const ReportRow lin = cmd_join(j).rows().at(0);
  CHECK(*lin.speedup() == Rational(8));
  CHECK(lin.pass);
  j.common.tau = "m^1.5";
  const ReportRow classic = cmd_join(j).rows().at(0);
  CHECK(*classic.speedup() == Rational(1));
  CHECK(classic.tcu_time / lin.tcu_time == Rational(8));
}

TEST_CASE("join: lsh row has candidate statistics and a fitted constant") {
  JoinCommand j;
  j.mode = "both";
  j.n = 256;
  j.d = 128;
  j.planted = 64;
  j.common.m = 64;
  const Report rep = cmd_join(j);
  REQUIRE(rep.rows().size() == 2);
  const ReportRow& lsh = rep.rows()[1];
  CHECK(lsh.scenario == "lsh");
  CHECK(lsh.candidates.has_value());
  CHECK(*lsh.fitted_constant > 0);
  CHECK(*lsh.recall <= 1.0);
  CHECK(lsh.note.find("factor d") != std::string::npos);

  j.mode = "sideways";
  CHECK_THROWS(cmd_join(j));
  j.mode = "lsh";
  j.family = "minhash";
  CHECK_THROWS(cmd_join(j));
}

TEST_CASE("jl: rows, padding and the distortion trial row") {
  JlCommand c;
  c.d = 1024;
  c.n = 8;
  c.eps = 0.5;
  c.delta = 0.1;
  c.trials = 20;
  c.common.m = 1024;  // k = 37 >= tile side 32, so no padding
  const Report rep = cmd_jl(c);
  REQUIRE(rep.rows().size() == 3);
  CHECK(rep.rows()[0].scenario == "jl_batch");
  CHECK(rep.rows()[0].ram_flops == 1024ull * 37 * 8);
  CHECK(rep.rows()[1].ram_flops == 1024ull * 37);
  CHECK(rep.rows()[2].n == 20);

  c.eps = 0.9;
  c.delta = 0.5;  // k = 4 < 32: padded schedule, output truncated back to 4
  c.trials = 0;
  const Report padded = cmd_jl(c);
  REQUIRE(padded.rows().size() == 2);
  CHECK(padded.rows()[0].k == 4);

  c.eps = 1.5;
  CHECK_THROWS(cmd_jl(c));
}

TEST_CASE("sweep: cardinality, ordering, empty grid") {
  SweepCommand s;
  s.scenario = "brute";
  SweepOutcome empty = cmd_sweep(s);
  CHECK(empty.report.rows().empty());
  CHECK(lines_of(csv(empty.report)) == std::vector<std::string>{Report::header()});

  s.ms = {256, 16, 64};
  s.ns = {64, 32, 128};
  s.ds = {64};
  s.join.planted = 8;
  s.join.background = 12;
  const SweepOutcome out = cmd_sweep(s);
  REQUIRE(out.report.rows().size() == 9);
  CHECK(out.passed);
  for (std::size_t i = 1; i < 9; ++i) CHECK(out.report.rows()[i - 1].sort_key() < out.report.rows()[i].sort_key());
  CHECK(out.report.rows().front().m == 16);
  CHECK(out.report.rows().front().n == 32);

  s.scenario = "bogus";
  CHECK_THROWS(cmd_sweep(s));
}

TEST_CASE("sweep outcome mirrors the per-row verdicts") {
  SweepCommand s;
  s.scenario = "lsh";
  s.ms = {16};
  s.ns = {64};
  s.ds = {64};
  s.join.r = 4;
  s.join.approx_c = 4;
  s.join.planted = 64;
  s.join.background = 20;
  SweepOutcome ok = cmd_sweep(s);
  CHECK(ok.report.rows().size() == 1);
  // A fitted-constant spread check needs at least two cells; a single cell
  // only fails on its own thresholds.
  CHECK(ok.passed == ok.report.all_pass());
}
