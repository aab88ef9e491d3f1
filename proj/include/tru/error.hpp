#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tru {

enum class ErrorCode {
  kUnknownArea,
  kUnknownObject,
  kAlreadyOpen,
  kDuplicateObject,
  kInvalidGraph,
  kEmptyBelief,
  kMissingSupplement,
  kSpuriousSupplement,
  kGeneratorFailure,
  kEmptyResult,
  kSchemaError,
  kUnknownKitchen,
  kInvalidDifficulty,
  kConfigError,
  kUnknownArtifact,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library carries one of the codes above so
// callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tru
