#pragma once

#include <stdexcept>
#include <string>

namespace uie {

// Invalid input data: malformed files, untokenizable text, bad schemas.
// CLI maps this family to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: stepping a dead cursor, querying an accepting state, a frozen
// reference model changing under a trainer. CLI maps this to exit code 3.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace uie
