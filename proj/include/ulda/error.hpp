#pragma once

#include <stdexcept>
#include <string>

namespace ulda {

/// Failure category. The CLI maps these onto its exit codes.
enum class ErrorKind {
    kUsage = 1,    // bad parameters or invocation
    kData = 2,     // malformed or inconsistent input data
    kNumeric = 3,  // numerical failure (degenerate covariance, singular system, ...)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void usage_error(const std::string& what) { throw Error(ErrorKind::kUsage, what); }
[[noreturn]] inline void data_error(const std::string& what) { throw Error(ErrorKind::kData, what); }
[[noreturn]] inline void numeric_error(const std::string& what) { throw Error(ErrorKind::kNumeric, what); }

}  // namespace ulda
