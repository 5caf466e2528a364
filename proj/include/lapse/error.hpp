#ifndef LAPSE_ERROR_HPP
#define LAPSE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace lapse {

enum class ErrorKind {
    schema,
    parse,
    empty_input,
    negative_lapse,
    missing_value,
    type,
    insufficient_data,
    category,
    shape,
    parameter,
    undefined_score,
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and tests)
/// can branch on the category without parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message)
{
    if (!condition) { fail(kind, message); }
}

} // namespace lapse

#endif
