#pragma once

#include <stdexcept>
#include <string>

namespace chronocal {

/// Bad input data: malformed records, schema violations, id mismatches.
/// The CLI maps this to exit status 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation does not hold for otherwise well-formed
/// input (e.g. a single-class label set handed to AUCROC). Exit status 2.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace chronocal
