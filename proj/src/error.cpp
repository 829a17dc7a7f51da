#include "volpath/error.hpp"

namespace volpath {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::undefined_at_diagonal: return "undefined-at-diagonal";
        case ErrorCode::quadrature_nonconvergence: return "quadrature-nonconvergence";
        case ErrorCode::factorization_failure: return "factorization-failure";
        case ErrorCode::grid_mismatch: return "grid-mismatch";
        case ErrorCode::domain: return "domain";
        case ErrorCode::out_of_band: return "out-of-band";
        case ErrorCode::degenerate_vega: return "degenerate-vega";
        case ErrorCode::sigma_hat_near_zero: return "sigma-hat-near-zero";
        case ErrorCode::nonpositive_xi: return "nonpositive-xi";
        case ErrorCode::unsupported_model: return "unsupported-model";
        case ErrorCode::not_convolution: return "not-convolution";
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::config: return "config";
    }
    return "unknown";
}

}  // namespace volpath
