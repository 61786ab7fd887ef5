#include "dal/error.hpp"

namespace dal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingMixedSizeTable: return "MissingMixedSizeTable";
    case ErrorCode::SizeExceedsDataset: return "SizeExceedsDataset";
    case ErrorCode::DepthExceedsTree: return "DepthExceedsTree";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::DuplicateConfiguration: return "DuplicateConfiguration";
    case ErrorCode::NonPositivePerformance: return "NonPositivePerformance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptDocument: return "CorruptDocument";
    case ErrorCode::EmptyDivision: return "EmptyDivision";
    case ErrorCode::NoPoints: return "NoPoints";
    case ErrorCode::PointBeyondReference: return "PointBeyondReference";
    case ErrorCode::NonPartition: return "NonPartition";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonPositiveActual: return "NonPositiveActual";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::TooFewResults: return "TooFewResults";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::MissingMixedSizeTable:
    case ErrorCode::SizeExceedsDataset:
    case ErrorCode::DepthExceedsTree:
    case ErrorCode::InvalidSpec:
      return 2;
    case ErrorCode::MalformedCsv:
    case ErrorCode::DuplicateConfiguration:
    case ErrorCode::NonPositivePerformance:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::EmptyTrainingSet:
    case ErrorCode::InsufficientSamples:
    case ErrorCode::VersionMismatch:
    case ErrorCode::CorruptDocument:
    case ErrorCode::Io:
      return 3;
    default:
      return 1;
  }
}

}  // namespace dal
