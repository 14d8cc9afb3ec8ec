/**
 * @file error.hpp
 * @brief Error codes shared by every fairhub module
 *
 * Operations report failures by throwing fairhub::Error. The code is the
 * machine-readable part that the gateway puts into API error bodies and
 * maps onto an HTTP status.
 */

#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairhub {

enum class Errc {
    // validation (400)
    ValidationError,
    InvalidOrcid,
    InvalidUrl,
    InvalidArgument,
    PathViolation,
    RatingOutOfRange,
    InvalidLabCode,
    MissingConstruct,
    FutureBirthDate,
    HeaderMismatch,
    RowValidationError,
    NotAZip,
    NotTiff,
    TruncatedTiff,
    MissingDimensions,
    BinaryGarbage,
    MappingError,
    PrefixNotConfigured,
    // authentication (401)
    InvalidCredentials,
    Unauthenticated,
    // access (403)
    AccessDenied,
    Unauthorized,
    TanMismatch,
    // unknown entity (404)
    NotFound,
    UnknownUser,
    UnknownGroup,
    UnknownSubproject,
    UnknownPid,
    UnknownPackage,
    UnknownFile,
    UnknownArticle,
    UnknownAsset,
    UnknownAntibody,
    UnknownLine,
    UnknownCellLine,
    UnknownNotebook,
    UnknownCase,
    UnknownEndpoint,
    // conflict (409)
    DuplicateOrcid,
    DuplicateName,
    DuplicateLink,
    DuplicateDoi,
    ConcurrentConflict,
    TanAlreadyConsumed,
    PidAlreadyBound,
    IllegalTransition,
    IllegalState,
    // upstream / infrastructure
    ServiceUnreachable,
    UpstreamUnavailable,
    NamingServiceUnavailable,
    StorageFull,
    ChecksumMismatch,
    Internal,
};

[[nodiscard]] std::string_view to_string(Errc code) noexcept;

/// HTTP status the gateway answers with for @p code.
[[nodiscard]] int http_status(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, nlohmann::json details = nullptr)
        : std::runtime_error(message), code_(code), details_(std::move(details)) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }
    [[nodiscard]] const nlohmann::json& details() const noexcept { return details_; }

private:
    Errc code_;
    nlohmann::json details_;
};

} // namespace fairhub
