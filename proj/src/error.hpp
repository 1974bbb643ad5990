#pragma once

#include <stdexcept>
#include <string>

namespace cuphaptics {

enum class ErrorCode {
    InvalidInput,
    Config,
    Parse,
    Io,
    DegenerateChannel,
    ModelLoad,
};

// Every failure raised by the library carries one of the codes above; the
// C layer maps them onto status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline Error invalid_input(const std::string& msg) { return {ErrorCode::InvalidInput, msg}; }
inline Error config_error(const std::string& msg) { return {ErrorCode::Config, msg}; }
inline Error parse_error(const std::string& msg) { return {ErrorCode::Parse, msg}; }
inline Error io_error(const std::string& msg) { return {ErrorCode::Io, msg}; }

}  // namespace cuphaptics
