#include "lapse/error.hpp"

namespace lapse {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::schema: return "schema";
    case ErrorKind::parse: return "parse";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::negative_lapse: return "negative_lapse";
    case ErrorKind::missing_value: return "missing_value";
    case ErrorKind::type: return "type";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::category: return "category";
    case ErrorKind::shape: return "shape";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::undefined_score: return "undefined_score";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

} // namespace lapse
