#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace memflow {

// Base class for every error this library throws deliberately.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke a documented precondition (bad dimensions, out-of-range
// index, inconsistent configuration passed programmatically).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// The mathematics produced a non-finite value (overflowing exponential,
// division blow-up) inside an otherwise valid call.
class DomainError : public Error {
public:
    using Error::Error;
};

// An integration run exceeded the blow-up guard; reports how many rows
// were still valid.
class TruncationError : public Error {
public:
    TruncationError(const std::string& msg, size_t last_valid_index)
        : Error(msg), last_valid_index_(last_valid_index) {}
    size_t last_valid_index() const { return last_valid_index_; }

private:
    size_t last_valid_index_;
};

// A file did not start with the expected magic/version.
class FormatError : public Error {
public:
    using Error::Error;
};

// A file has the right magic but inconsistent contents (truncated payload,
// header/payload size mismatch).
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Operating-system level I/O failure (cannot open/read/write/rename).
class IoError : public Error {
public:
    using Error::Error;
};

// A configuration file or flag set is syntactically or semantically invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A dataset build admitted no trajectory at all.
class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

// printf-style message helper (the toolchain here has no std::format).
inline std::string msgf(const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 1, 2)))
#endif
    ;

inline std::string msgf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list args2;
    va_copy(args2, args);
    int len = std::vsnprintf(nullptr, 0, fmt, args);
    va_end(args);
    std::string out;
    if (len > 0) {
        out.resize(static_cast<size_t>(len));
        std::vsnprintf(out.data(), static_cast<size_t>(len) + 1, fmt, args2);
    }
    va_end(args2);
    return out;
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace memflow
