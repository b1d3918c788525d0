#pragma once

#include <stdexcept>
#include <string>

namespace dynamap {

// Bad input data, file, or parameter. The CLI maps this to exit code 1;
// any other exception maps to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dynamap
