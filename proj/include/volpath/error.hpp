#pragma once

#include <stdexcept>
#include <string>

namespace volpath {

enum class ErrorCode {
    undefined_at_diagonal,
    quadrature_nonconvergence,
    factorization_failure,
    grid_mismatch,
    domain,
    out_of_band,
    degenerate_vega,
    sigma_hat_near_zero,
    nonpositive_xi,
    unsupported_model,
    not_convolution,
    invalid_argument,
    config,
};

const char* to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so the
// CLI can map it onto an exit status and a structured message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool ok, const std::string& message,
                    ErrorCode code = ErrorCode::invalid_argument) {
    if (!ok) fail(code, message);
}

}  // namespace volpath
