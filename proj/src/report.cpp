#include "tcusim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace tcusim {

namespace {

template <typename T>
std::string opt(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

std::string padded(std::uint64_t v, int width) {
  std::string s = std::to_string(v);
  return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<Rational> ReportRow::speedup() const {
  if (tcu_time == Rational(0)) return std::nullopt;
  return Rational(static_cast<std::int64_t>(ram_flops)) / tcu_time;
}

std::string ReportRow::sort_key() const {
  return scenario + '|' + padded(m, 20) + '|' + padded(n, 20) + '|' + padded(d, 20) + '|' + padded(seed, 20);
}

const std::string& Report::header() {
  static const std::string h =
      "scenario,n,d,k,m,tau,seed,tables,tile_mults,tcu_time,ram_flops,speedup,pairs,recall,recall_truth,"
      "failure_rate,near,approx,far,far_per_point,bound,fitted_constant,pass,note";
  return h;
}

bool Report::all_pass() const {
  return std::all_of(rows_.begin(), rows_.end(), [](const ReportRow& r) { return r.pass; });
}

void Report::sort_rows() {
  std::stable_sort(rows_.begin(), rows_.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.sort_key() < b.sort_key(); });
}

void Report::write_csv(std::ostream& out) const {
  out << header() << '\n';
  for (const auto& r : rows_) {
    const auto speed = r.speedup();
    out << r.scenario << ',' << r.n << ',' << r.d << ',' << r.k << ',' << r.m << ',' << format_double(r.tau.to_double())
        << ',' << r.seed << ',' << r.tables << ',' << r.tile_mults << ',' << format_double(r.tcu_time.to_double())
        << ',' << r.ram_flops << ',' << (speed ? format_double(speed->to_double()) : std::string()) << ','
        << opt(r.pairs) << ',' << opt(r.recall) << ',' << opt(r.recall_truth) << ',' << opt(r.failure_rate) << ','
        << (r.candidates ? std::to_string(r.candidates->near) : std::string()) << ','
        << (r.candidates ? std::to_string(r.candidates->approx) : std::string()) << ','
        << (r.candidates ? std::to_string(r.candidates->far) : std::string()) << ',' << opt(r.far_per_point) << ','
        << opt(r.bound) << ',' << opt(r.fitted_constant) << ',' << (r.pass ? "true" : "false") << ',' << r.note
        << '\n';
  }
}

}  // namespace tcusim
