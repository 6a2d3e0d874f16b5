#include "zyn/error.hpp"

namespace zyn {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::BackendTimeout: return "BackendTimeout";
        case ErrorCode::BackendProtocolError: return "BackendProtocolError";
        case ErrorCode::TokenNotFound: return "TokenNotFound";
        case ErrorCode::AllCandidatesFailed: return "AllCandidatesFailed";
        case ErrorCode::KeyOutOfRange: return "KeyOutOfRange";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::Cancelled: return "Cancelled";
    }
    return "Unknown";
}

}  // namespace zyn
