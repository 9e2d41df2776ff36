#include "augtrunc/error.hpp"

namespace augtrunc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::NegativeDeficit: return "NegativeDeficit";
        case ErrorCode::SingularComplement: return "SingularComplement";
        case ErrorCode::NoClosedClass: return "NoClosedClass";
        case ErrorCode::MultipleClosedClasses: return "MultipleClosedClasses";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::RouteMismatch: return "RouteMismatch";
        case ErrorCode::ZeroRate: return "ZeroRate";
        case ErrorCode::NotSingleBirth: return "NotSingleBirth";
        case ErrorCode::NotSingleDeath: return "NotSingleDeath";
        case ErrorCode::NotBirthDeath: return "NotBirthDeath";
        case ErrorCode::TailNotConverged: return "TailNotConverged";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::CapExceeded: return "CapExceeded";
        case ErrorCode::TooFewRows: return "TooFewRows";
    }
    return "Unknown";
}

}  // namespace augtrunc
