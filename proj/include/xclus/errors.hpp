#pragma once

#include <stdexcept>
#include <string>

namespace xclus {

enum class Errc {
    // data pipeline
    MissingFile,
    HeaderMismatch,
    EmptyTable,
    UnsupportedAggregator,
    AllMissingColumn,
    UnknownLevel,
    OverlappingRoles,
    UnknownFeature,
    // clustering
    DegenerateInput,
    NotSymmetric,
    RangeTooSmall,
    NoValidCell,
    // validity
    TooFewClusters,
    CoincidentCentroids,
    CoincidentCenters,
    EmptySample,
    RowMismatch,
    // surrogate
    SingleClass,
    ShapeMismatch,
    // explainers
    DegenerateNeighborhood,
    UnknownClass,
    NoCounterfactualFound,
    EmptyData,
    // thesaurus
    NoSuccessfulRun,
    EmptyExemplarBank,
    VersionMismatch,
    CorruptFile,
    // llm bridge
    FingerprintMismatch,
    BankTooSmall,
    EndpointUnreachable,
    HttpStatus,
    Timeout,
    StubKeyMissing,
    Unparseable,
    // quality
    EmptyText,
    NoWords,
    TooFewCommonFeatures,
    ZeroGainVector,
    DimensionMismatch,
    // configuration / CLI
    ConfigError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Errors caused by bad inputs/configuration map to CLI exit code 2; the rest to 1.
bool is_validation_error(Errc code);

}  // namespace xclus
