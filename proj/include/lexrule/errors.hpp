#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lexrule {

enum class ErrorCode {
    BadIdentifier,
    DuplicateEntry,
    SelfReference,
    DuplicateHead,
    CyclicDependency,
    SyntaxError,
    SchemaError,
    UnknownStrategy,
    GuardTripped,
    DegenerateParams,
    NonPropositional,
    UnsupportedShape,
    OrphanException,
    TooManyLeaves,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `detail` carries the offending
// identifiers (a cycle path, a duplicated head, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::vector<std::string> detail = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::vector<std::string>& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::vector<std::string> detail_;
};

}  // namespace lexrule
