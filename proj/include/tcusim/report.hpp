#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcusim/distances.hpp"
#include "tcusim/rational.hpp"
#include "tcusim/tcu.hpp"

namespace tcusim {

/// One CSV line. speedup = ram_flops / tcu_time, where ram_flops is the
/// scalar baseline for the same logical work.
struct ReportRow {
  std::string scenario;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::uint64_t m = 0;
  Rational tau;
  std::uint64_t seed = 0;
  std::size_t tables = 0;
  std::uint64_t tile_mults = 0;
  Rational tcu_time;
  std::uint64_t ram_flops = 0;
  std::optional<std::size_t> pairs;
  std::optional<double> recall;
  std::optional<double> recall_truth;
  std::optional<double> failure_rate;
  std::optional<CandidateCounts> candidates;
  std::optional<double> far_per_point;
  std::optional<double> bound;
  std::optional<double> fitted_constant;
  bool pass = true;
  std::string note;

  /// Exact ram_flops / tcu_time; nullopt when no TCU time was charged.
  std::optional<Rational> speedup() const;
  /// Key used to order sweep output.
  std::string sort_key() const;
};

class Report {
 public:
  static const std::string& header();

  void add(ReportRow row) { rows_.push_back(std::move(row)); }
  void append(const Report& other) { rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end()); }
  const std::vector<ReportRow>& rows() const { return rows_; }
  std::vector<ReportRow>& rows() { return rows_; }
  bool all_pass() const;
  void sort_rows();

  /// Doubles are printed with 17 significant digits; unset fields are empty.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<ReportRow> rows_;
};

std::string format_double(double v);

}  // namespace tcusim
