#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>

namespace r2vf {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

/// Whole-string parse; surrounding blanks allowed, nothing else.
std::optional<double> parse_double(std::string_view text);

}  // namespace r2vf
