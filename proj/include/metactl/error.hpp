#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metactl {

enum class ErrorCode {
    grounding_mismatch,
    unknown_entity,
    stale_kb,
    invalid_command,
    unknown_design,
    malformed_csv,
    malformed_record,
    invalid_argument,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every metactl component; `code()` identifies the contract
/// that was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace metactl
