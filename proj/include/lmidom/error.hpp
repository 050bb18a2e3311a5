#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lmidom {

enum class ErrorCode {
  kDimensionMismatch,
  kNotSymmetric,
  kNotPsd,
  kZeroNotInterior,
  kNotMonic,
  kDegenerate,
  kUnbounded,
  kNearSingular,
  kNoConvergence,
  kInvalidArgument,
  kUnsupported,
  kDegenerateSample,
  kIndeterminate,
  kParse,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kZeroNotInterior: return "ZeroNotInterior";
    case ErrorCode::kNotMonic: return "NotMonic";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kNearSingular: return "NearSingular";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kIndeterminate: return "Indeterminate";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by psd_factor / monicize when a matrix has a clearly negative
/// eigenvalue.
class NotPsdError : public Error {
 public:
  NotPsdError(double eigenvalue, const std::string& what)
      : Error(ErrorCode::kNotPsd, what), eigenvalue_(eigenvalue) {}

  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// A malformed input file. line is 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::string field, const std::string& what)
      : Error(ErrorCode::kParse, file + ":" + std::to_string(line) + (field.empty() ? "" : ": field '" + field + "'") +
                                     ": " + what),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

}  // namespace lmidom
