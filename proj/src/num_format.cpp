#include "tsadapt/num_format.hpp"

#include <charconv>
#include <system_error>

#include "tsadapt/errors.hpp"

namespace tsadapt {

std::string format_double(double value) {
    char buf[64];
    auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end || text.empty()) {
        throw InvalidInput("cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

} // namespace tsadapt
