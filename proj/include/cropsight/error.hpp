#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cropsight {

// Stable error identifiers. The numeric values are mirrored by cs_status in
// the C API, so append only.
enum class ErrorCode : int {
  Ok = 0,
  DecodeError = 1,
  UnsupportedFormat = 2,
  EmptyImage = 3,
  InvalidParams = 4,
  InvalidBinCount = 5,
  DegenerateHistogram = 6,
  DimensionMismatch = 7,
  SingleClassDataset = 8,
  EmptyDataset = 9,
  NoSpots = 10,
  CorruptModel = 11,
  PlacementFailure = 12,
  IoError = 13,
  CycleDetected = 14,
  DanglingChild = 15,
  LeafWithoutEntry = 16,
  UnknownNode = 17,
  InvalidPath = 18,
  NotFound = 19,
  Undiagnosable = 20,
  InvalidTaxonomy = 21,
  InvalidConfig = 22,
  PayloadTooLarge = 23,
  Internal = 24,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cropsight
