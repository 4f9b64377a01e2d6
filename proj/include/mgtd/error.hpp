#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgtd {

enum class ErrorCode {
    InvalidArgument,
    Io,
    FileNotFound,
    MalformedRow,
    UnknownLabelValue,
    TooFewDocuments,
    EmptyCorpus,
    SingleClassCorpus,
    ZeroWords,
    ZeroSentences,
    MalformedLine,
    ConflictingDuplicate,
    MissingCategory,
    EmptyTrainingSet,
    SingleClassTraining,
    DimensionMismatch,
    NegativeFeature,
    MixedDimensions,
    EmptyEnsemble,
    VersionMismatch,
    ChecksumMismatch,
    LengthMismatch,
    EmptyMatrix,
    TooFewSamples,
    MissingPlaceholder,
    EmptyText,
    EndpointUnreachable,
    AuthFailure,
    RateLimited,
    MissingAsset,
    CategoryCountMismatch,
    DownloadFailed,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::UnknownLabelValue: return "UnknownLabelValue";
        case ErrorCode::TooFewDocuments: return "TooFewDocuments";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::SingleClassCorpus: return "SingleClassCorpus";
        case ErrorCode::ZeroWords: return "ZeroWords";
        case ErrorCode::ZeroSentences: return "ZeroSentences";
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::ConflictingDuplicate: return "ConflictingDuplicate";
        case ErrorCode::MissingCategory: return "MissingCategory";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::SingleClassTraining: return "SingleClassTraining";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NegativeFeature: return "NegativeFeature";
        case ErrorCode::MixedDimensions: return "MixedDimensions";
        case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::EndpointUnreachable: return "EndpointUnreachable";
        case ErrorCode::AuthFailure: return "AuthFailure";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::MissingAsset: return "MissingAsset";
        case ErrorCode::CategoryCountMismatch: return "CategoryCountMismatch";
        case ErrorCode::DownloadFailed: return "DownloadFailed";
    }
    return "Unknown";
}

/// Every failure raised by the toolkit carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mgtd
