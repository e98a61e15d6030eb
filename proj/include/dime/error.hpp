#pragma once

#include <stdexcept>
#include <string>

namespace dime {

// Rejected input: a precondition on arguments or configuration failed.
// The CLI maps this to exit code 2.
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure during an otherwise valid computation: PSD violation,
// eigensolver non-convergence, optimizer divergence, degenerate anchor.
// The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble (unreadable input, unwritable output). Exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dime
