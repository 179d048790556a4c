#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace chlu {

// Number formatting and parsing for the text artifacts. Both directions go
// through std::to_chars / std::from_chars: locale independent, correctly
// rounded, and byte deterministic. format_double emits the shortest string
// that round-trips bit exactly; format_double_17 pins 17 significant digits
// for the checkpoint layer, which also round-trips every double.
std::string format_double(double v);
std::string format_double_17(double v);
std::string format_u64(std::uint64_t v);

// Parse a full token; the entire input must be consumed.
double parse_double(std::string_view s);        // FormatError on junk
std::uint64_t parse_u64(std::string_view s);
std::int64_t parse_i64(std::string_view s);

} // namespace chlu
