#pragma once

#include <stdexcept>
#include <string>

namespace hetprobe {

/// Caller supplied an argument outside the documented domain.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy number (step-size
/// exhaustion, non-finite intermediate, overflow of exact arithmetic).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The request is well formed but the model has no formula for it.
class UnsupportedConfiguration : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw InputError(message);
}

} // namespace detail
} // namespace hetprobe
