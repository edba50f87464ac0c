#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tabbench {

enum class ErrorCode {
  Io,
  SchemaMismatch,
  Parse,
  UnknownCategory,
  EmptyTable,
  DegenerateSplit,
  LayoutMismatch,
  DimensionMismatch,
  NonScalarRoot,
  ShapeMismatch,
  InvalidArgument,
  NonFiniteLoss,
  InsufficientData,
  KindMismatch,
  NotCategorical,
  NotContinuous,
  AllZeroExpected,
  EmptyColumn,
  TaskMismatch,
  SingleClassTrainingSet,
  EmptyTest,
  DegenerateInput,
  NoCheckpoints,
  Config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// Non-fatal conditions (dropped rows, classes absent from a test set, ...)
// are reported here. Default sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace tabbench
