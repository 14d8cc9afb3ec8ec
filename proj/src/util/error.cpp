#include "fairhub/error.hpp"

namespace fairhub {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::ValidationError: return "ValidationError";
        case Errc::InvalidOrcid: return "InvalidOrcid";
        case Errc::InvalidUrl: return "InvalidUrl";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::PathViolation: return "PathViolation";
        case Errc::RatingOutOfRange: return "RatingOutOfRange";
        case Errc::InvalidLabCode: return "InvalidLabCode";
        case Errc::MissingConstruct: return "MissingConstruct";
        case Errc::FutureBirthDate: return "FutureBirthDate";
        case Errc::HeaderMismatch: return "HeaderMismatch";
        case Errc::RowValidationError: return "RowValidationError";
        case Errc::NotAZip: return "NotAZip";
        case Errc::NotTiff: return "NotTiff";
        case Errc::TruncatedTiff: return "TruncatedTiff";
        case Errc::MissingDimensions: return "MissingDimensions";
        case Errc::BinaryGarbage: return "BinaryGarbage";
        case Errc::MappingError: return "MappingError";
        case Errc::PrefixNotConfigured: return "PrefixNotConfigured";
        case Errc::InvalidCredentials: return "InvalidCredentials";
        case Errc::Unauthenticated: return "Unauthenticated";
        case Errc::AccessDenied: return "AccessDenied";
        case Errc::Unauthorized: return "Unauthorized";
        case Errc::TanMismatch: return "TanMismatch";
        case Errc::NotFound: return "NotFound";
        case Errc::UnknownUser: return "UnknownUser";
        case Errc::UnknownGroup: return "UnknownGroup";
        case Errc::UnknownSubproject: return "UnknownSubproject";
        case Errc::UnknownPid: return "UnknownPid";
        case Errc::UnknownPackage: return "UnknownPackage";
        case Errc::UnknownFile: return "UnknownFile";
        case Errc::UnknownArticle: return "UnknownArticle";
        case Errc::UnknownAsset: return "UnknownAsset";
        case Errc::UnknownAntibody: return "UnknownAntibody";
        case Errc::UnknownLine: return "UnknownLine";
        case Errc::UnknownCellLine: return "UnknownCellLine";
        case Errc::UnknownNotebook: return "UnknownNotebook";
        case Errc::UnknownCase: return "UnknownCase";
        case Errc::UnknownEndpoint: return "UnknownEndpoint";
        case Errc::DuplicateOrcid: return "DuplicateOrcid";
        case Errc::DuplicateName: return "DuplicateName";
        case Errc::DuplicateLink: return "DuplicateLink";
        case Errc::DuplicateDoi: return "DuplicateDoi";
        case Errc::ConcurrentConflict: return "ConcurrentConflict";
        case Errc::TanAlreadyConsumed: return "TanAlreadyConsumed";
        case Errc::PidAlreadyBound: return "PidAlreadyBound";
        case Errc::IllegalTransition: return "IllegalTransition";
        case Errc::IllegalState: return "IllegalState";
        case Errc::ServiceUnreachable: return "ServiceUnreachable";
        case Errc::UpstreamUnavailable: return "UpstreamUnavailable";
        case Errc::NamingServiceUnavailable: return "NamingServiceUnavailable";
        case Errc::StorageFull: return "StorageFull";
        case Errc::ChecksumMismatch: return "ChecksumMismatch";
        case Errc::Internal: return "Internal";
    }
    return "Internal";
}

int http_status(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidCredentials:
        case Errc::Unauthenticated:
            return 401;
        case Errc::AccessDenied:
        case Errc::Unauthorized:
        case Errc::TanMismatch:
            return 403;
        case Errc::NotFound:
        case Errc::UnknownUser:
        case Errc::UnknownGroup:
        case Errc::UnknownSubproject:
        case Errc::UnknownPid:
        case Errc::UnknownPackage:
        case Errc::UnknownFile:
        case Errc::UnknownArticle:
        case Errc::UnknownAsset:
        case Errc::UnknownAntibody:
        case Errc::UnknownLine:
        case Errc::UnknownCellLine:
        case Errc::UnknownNotebook:
        case Errc::UnknownCase:
        case Errc::UnknownEndpoint:
            return 404;
        case Errc::DuplicateOrcid:
        case Errc::DuplicateName:
        case Errc::DuplicateLink:
        case Errc::DuplicateDoi:
        case Errc::ConcurrentConflict:
        case Errc::TanAlreadyConsumed:
        case Errc::PidAlreadyBound:
        case Errc::IllegalTransition:
        case Errc::IllegalState:
            return 409;
        case Errc::ServiceUnreachable:
        case Errc::UpstreamUnavailable:
        case Errc::NamingServiceUnavailable:
            return 502;
        case Errc::StorageFull:
            return 507;
        case Errc::ChecksumMismatch:
        case Errc::Internal:
            return 500;
        default:
            return 400;
    }
}

} // namespace fairhub
