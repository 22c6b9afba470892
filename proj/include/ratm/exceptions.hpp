#pragma once

#include <stdexcept>
#include <string>

namespace ratm {

/// A row or model admits no valid probability distribution.
struct feasibility_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Value iteration failed to reach the requested tolerance.
struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Caller broke an API contract (e.g. observation present without a measurement).
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// A brute-force computation exceeded its size budget.
struct size_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An experiment configuration failed to parse or validate.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File input/output failure.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ratm
