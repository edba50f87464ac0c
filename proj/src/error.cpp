#include "tabbench/error.hpp"

#include <iostream>
#include <mutex>

namespace tabbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonScalarRoot: return "NonScalarRoot";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::NotCategorical: return "NotCategorical";
    case ErrorCode::NotContinuous: return "NotContinuous";
    case ErrorCode::AllZeroExpected: return "AllZeroExpected";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::TaskMismatch: return "TaskMismatch";
    case ErrorCode::SingleClassTrainingSet: return "SingleClassTrainingSet";
    case ErrorCode::EmptyTest: return "EmptyTest";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NoCheckpoints: return "NoCheckpoints";
    case ErrorCode::Config: return "ConfigError";
  }
  return "UnknownError";
}

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = s ? std::move(s) : [](std::string_view) {};
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  sink()(message);
}

}  // namespace tabbench
