#include "xclus/errors.hpp"

namespace xclus {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::MissingFile: return "MissingFile";
        case Errc::HeaderMismatch: return "HeaderMismatch";
        case Errc::EmptyTable: return "EmptyTable";
        case Errc::UnsupportedAggregator: return "UnsupportedAggregator";
        case Errc::AllMissingColumn: return "AllMissingColumn";
        case Errc::UnknownLevel: return "UnknownLevel";
        case Errc::OverlappingRoles: return "OverlappingRoles";
        case Errc::UnknownFeature: return "UnknownFeature";
        case Errc::DegenerateInput: return "DegenerateInput";
        case Errc::NotSymmetric: return "NotSymmetric";
        case Errc::RangeTooSmall: return "RangeTooSmall";
        case Errc::NoValidCell: return "NoValidCell";
        case Errc::TooFewClusters: return "TooFewClusters";
        case Errc::CoincidentCentroids: return "CoincidentCentroids";
        case Errc::CoincidentCenters: return "CoincidentCenters";
        case Errc::EmptySample: return "EmptySample";
        case Errc::RowMismatch: return "RowMismatch";
        case Errc::SingleClass: return "SingleClass";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::DegenerateNeighborhood: return "DegenerateNeighborhood";
        case Errc::UnknownClass: return "UnknownClass";
        case Errc::NoCounterfactualFound: return "NoCounterfactualFound";
        case Errc::EmptyData: return "EmptyData";
        case Errc::NoSuccessfulRun: return "NoSuccessfulRun";
        case Errc::EmptyExemplarBank: return "EmptyExemplarBank";
        case Errc::VersionMismatch: return "VersionMismatch";
        case Errc::CorruptFile: return "CorruptFile";
        case Errc::FingerprintMismatch: return "FingerprintMismatch";
        case Errc::BankTooSmall: return "BankTooSmall";
        case Errc::EndpointUnreachable: return "EndpointUnreachable";
        case Errc::HttpStatus: return "HttpStatus";
        case Errc::Timeout: return "Timeout";
        case Errc::StubKeyMissing: return "StubKeyMissing";
        case Errc::Unparseable: return "Unparseable";
        case Errc::EmptyText: return "EmptyText";
        case Errc::NoWords: return "NoWords";
        case Errc::TooFewCommonFeatures: return "TooFewCommonFeatures";
        case Errc::ZeroGainVector: return "ZeroGainVector";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

bool is_validation_error(Errc code) {
    switch (code) {
        case Errc::MissingFile:
        case Errc::HeaderMismatch:
        case Errc::EmptyTable:
        case Errc::UnsupportedAggregator:
        case Errc::UnknownLevel:
        case Errc::OverlappingRoles:
        case Errc::UnknownFeature:
        case Errc::RangeTooSmall:
        case Errc::RowMismatch:
        case Errc::ShapeMismatch:
        case Errc::UnknownClass:
        case Errc::VersionMismatch:
        case Errc::FingerprintMismatch:
        case Errc::BankTooSmall:
        case Errc::EmptyExemplarBank:
        case Errc::DimensionMismatch:
        case Errc::ConfigError:
            return true;
        default:
            return false;
    }
}

}  // namespace xclus
