#include "aes/error.hpp"

namespace aes {

const char* kind_name(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
    case ErrorKind::numeric: return "numeric";
    }
    return "unknown";
}

}  // namespace aes
