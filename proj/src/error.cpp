#include "cropsight/error.hpp"

namespace cropsight {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidBinCount: return "InvalidBinCount";
    case ErrorCode::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NoSpots: return "NoSpots";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DanglingChild: return "DanglingChild";
    case ErrorCode::LeafWithoutEntry: return "LeafWithoutEntry";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Undiagnosable: return "Undiagnosable";
    case ErrorCode::InvalidTaxonomy: return "InvalidTaxonomy";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace cropsight
