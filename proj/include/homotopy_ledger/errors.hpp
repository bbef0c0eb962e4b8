#pragma once

#include <stdexcept>
#include <string>

namespace hl {

struct LocalityMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BoundExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DescriptorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A hom matrix that does not carry relations into relations.
struct NotWellDefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hl
