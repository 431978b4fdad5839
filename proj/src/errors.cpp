#include "wedge/errors.hpp"

namespace wedge {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::BoundaryCase: return "BoundaryCase";
        case ErrorKind::SingularDenominator: return "SingularDenominator";
        case ErrorKind::DegenerateStart: return "DegenerateStart";
        case ErrorKind::HitZero: return "HitZero";
        case ErrorKind::StepFailure: return "StepFailure";
        case ErrorKind::NotSingularCase: return "NotSingularCase";
        case ErrorKind::IllPosedCurve: return "IllPosedCurve";
        case ErrorKind::RootsNotReal: return "RootsNotReal";
        case ErrorKind::OrderingUnsupported: return "OrderingUnsupported";
        case ErrorKind::IllPosedForThisXi: return "IllPosedForThisXi";
        case ErrorKind::IllPosedAlways: return "IllPosedAlways";
        case ErrorKind::MertonIllPosed: return "MertonIllPosed";
        case ErrorKind::Insolvent: return "Insolvent";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

}  // namespace wedge
