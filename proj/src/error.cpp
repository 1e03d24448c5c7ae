// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
#include "mathesis/error.hpp"

namespace mathesis {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingBinding: return "MissingBinding";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::Timeout: return "Timeout";
    case Errc::TransportError: return "TransportError";
    case Errc::BackendRefused: return "BackendRefused";
    case Errc::NoLeanContent: return "NoLeanContent";
    case Errc::UnparseableJudgement: return "UnparseableJudgement";
    case Errc::NoRatingsFound: return "NoRatingsFound";
    case Errc::UnknownRatingLabel: return "UnknownRatingLabel";
    case Errc::InvalidCounts: return "InvalidCounts";
    case Errc::ScoringFailed: return "ScoringFailed";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::UnsplittableStatement: return "UnsplittableStatement";
    case Errc::SchemaError: return "SchemaError";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnknownProblemId: return "UnknownProblemId";
    case Errc::LedgerSchemaError: return "LedgerSchemaError";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace mathesis
