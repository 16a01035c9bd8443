#pragma once

#include <string>
#include <string_view>

namespace tsadapt {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

// Strict, locale-independent parse of a full string; throws InvalidInput
// on trailing garbage or empty input. Non-finite values are accepted here;
// callers that require finiteness check separately.
double parse_double(std::string_view text);

} // namespace tsadapt
