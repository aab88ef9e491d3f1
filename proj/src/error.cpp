#include "tru/error.hpp"

namespace tru {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownArea: return "unknown-area";
    case ErrorCode::kUnknownObject: return "unknown-object";
    case ErrorCode::kAlreadyOpen: return "already-open";
    case ErrorCode::kDuplicateObject: return "duplicate-object";
    case ErrorCode::kInvalidGraph: return "invalid-graph";
    case ErrorCode::kEmptyBelief: return "empty-belief";
    case ErrorCode::kMissingSupplement: return "missing-supplement";
    case ErrorCode::kSpuriousSupplement: return "spurious-supplement";
    case ErrorCode::kGeneratorFailure: return "generator-failure";
    case ErrorCode::kEmptyResult: return "empty-result";
    case ErrorCode::kSchemaError: return "schema-error";
    case ErrorCode::kUnknownKitchen: return "unknown-kitchen";
    case ErrorCode::kInvalidDifficulty: return "invalid-difficulty";
    case ErrorCode::kConfigError: return "config-error";
    case ErrorCode::kUnknownArtifact: return "unknown-artifact";
  }
  return "unknown";
}

}  // namespace tru
