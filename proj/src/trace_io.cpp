#include "manibo/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace manibo {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const RunTrace& trace, bool with_wall_time) {
  os << kTraceCsvHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    os << r.iter << ',' << format_double(r.f_next) << ',' << format_double(r.f_best)
       << ',';
    if (r.oracle_distance) os << format_double(std::log10(*r.oracle_distance));
    os << ',';
    if (with_wall_time) os << format_double(r.wall_ms);
    os << '\n';
  }
}

}  // namespace manibo
