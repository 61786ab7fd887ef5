#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dal {

enum class ErrorCode {
  // configuration
  InvalidConfig,
  MissingMixedSizeTable,
  SizeExceedsDataset,
  DepthExceedsTree,
  InvalidSpec,
  // data
  MalformedCsv,
  DuplicateConfiguration,
  NonPositivePerformance,
  DimensionMismatch,
  EmptyTrainingSet,
  InsufficientSamples,
  VersionMismatch,
  CorruptDocument,
  // everything else is an internal/library-usage error
  EmptyDivision,
  NoPoints,
  PointBeyondReference,
  NonPartition,
  EmptySet,
  LengthMismatch,
  NonPositiveActual,
  EmptyGroup,
  TooFewResults,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Process exit status used by the command line tool: 2 for configuration
/// problems, 3 for data problems, 1 otherwise.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dal
