#pragma once

#include <charconv>
#include <string>

namespace dynamap {

// Shortest decimal text that parses back to exactly the same double.
inline std::string format_shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace dynamap
