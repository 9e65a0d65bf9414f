#pragma once

#include <stdexcept>
#include <string>

namespace mixlab {

/// Base of every error raised by the library. The `kind()` string is stable
/// and is what the lab runner reports in its JSON envelope.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define MIXLAB_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

MIXLAB_DEFINE_ERROR(InvalidMeasure)
MIXLAB_DEFINE_ERROR(MismatchedSupportSize)
MIXLAB_DEFINE_ERROR(InvalidParameter)
MIXLAB_DEFINE_ERROR(MidpointOutsideDomain)
MIXLAB_DEFINE_ERROR(QuadratureNonConvergence)
MIXLAB_DEFINE_ERROR(NonDifferentiablePoint)
MIXLAB_DEFINE_ERROR(DegenerateXi)
MIXLAB_DEFINE_ERROR(LengthMismatch)
MIXLAB_DEFINE_ERROR(BudgetExceeded)
MIXLAB_DEFINE_ERROR(RootBracketingFailed)
MIXLAB_DEFINE_ERROR(InvalidPath)
MIXLAB_DEFINE_ERROR(AllProposalsRejected)

#undef MIXLAB_DEFINE_ERROR

/// Configuration error carrying the JSON path of the offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error("SchemaError", path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace mixlab
