#include "aqmsim/csv.hpp"

#include <array>
#include <charconv>

#include "aqmsim/config.hpp"

namespace aqmsim::cli {

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // no negative zero
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::scientific, 11);
  return std::string(buf.data(), res.ptr);
}

std::string csv_header(bool sweep) {
  std::string h = "scenario,schema_version,seed,seed_source,";
  if (sweep) h += "sweep_parameter,sweep_value,";
  h += "replication_count,class,offered_rate,throughput,loss_prob,mark_rate,mql,utilization,"
       "mean_response,ci_throughput,ci_loss_prob,ci_mark_rate,ci_mql,ci_utilization,ci_mean_response\n";
  return h;
}

namespace {

void write_row(std::ostream& out, const sim::ClassMetrics& m, const std::string& label,
               std::size_t replications, const CsvContext& ctx, std::optional<double> sweep_value) {
  out << ctx.scenario << ',' << kSchemaVersion << ',' << ctx.seed << ',' << ctx.seed_source << ',';
  if (ctx.sweep_parameter) {
    out << *ctx.sweep_parameter << ',' << format_number(sweep_value.value_or(0.0)) << ',';
  }
  out << replications << ',' << label << ',' << format_number(m.offered_rate) << ','
      << format_number(m.value.throughput) << ',' << format_number(m.value.loss_prob) << ','
      << format_number(m.value.mark_rate) << ',' << format_number(m.value.mql) << ','
      << format_number(m.value.utilization) << ',' << format_number(m.value.mean_response) << ','
      << format_number(m.ci_half_width.throughput) << ',' << format_number(m.ci_half_width.loss_prob)
      << ',' << format_number(m.ci_half_width.mark_rate) << ',' << format_number(m.ci_half_width.mql)
      << ',' << format_number(m.ci_half_width.utilization) << ','
      << format_number(m.ci_half_width.mean_response) << '\n';
}

}  // namespace

void write_report_rows(std::ostream& out, const sim::MetricsReport& report, const CsvContext& ctx,
                       std::optional<double> sweep_value) {
  for (std::size_t i = 0; i < report.per_class.size(); ++i) {
    write_row(out, report.per_class[i], std::to_string(i + 1), report.replications, ctx, sweep_value);
  }
  write_row(out, report.aggregate, "all", report.replications, ctx, sweep_value);
}

}  // namespace aqmsim::cli
