#pragma once

#include <iosfwd>
#include <string>

#include "manibo/bo.hpp"

namespace manibo {

inline constexpr const char* kTraceCsvHeader = "iter,f_next,f_best,err_to_oracle,wall_ms";

/// Decimal with 17 significant digits; "inf", "-inf", "nan" otherwise.
std::string format_double(double v);

/// One header line, then one row per record. err_to_oracle is log10 of the
/// oracle distance (empty without an oracle). wall_ms is left empty unless
/// `with_wall_time`, so that equal seeds give byte-identical files.
void write_trace_csv(std::ostream& os, const RunTrace& trace, bool with_wall_time);

}  // namespace manibo
