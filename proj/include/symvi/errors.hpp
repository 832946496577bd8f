#pragma once

#include <stdexcept>
#include <string>

namespace symvi {

/// Base class for every error raised by the library. `kind()` is the stable
/// identifier used in CLI output and reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SYMVI_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

SYMVI_DEFINE_ERROR(InvalidInput)
SYMVI_DEFINE_ERROR(NotASubalgebra)
SYMVI_DEFINE_ERROR(UnsupportedSpace)
SYMVI_DEFINE_ERROR(CalibrationFailure)
SYMVI_DEFINE_ERROR(UnsupportedHypersurface)
SYMVI_DEFINE_ERROR(BackendMismatch)
SYMVI_DEFINE_ERROR(TopologyMismatch)
SYMVI_DEFINE_ERROR(RankTooSmall)

#undef SYMVI_DEFINE_ERROR

/// Raised when a theorem's hypothesis does not hold for the given input.
/// `hypothesis()` names the violated condition ("rank", "genericity", ...).
class HypothesisNotMet : public Error {
 public:
  HypothesisNotMet(std::string hypothesis, const std::string& what)
      : Error("HypothesisNotMet", hypothesis + ": " + what),
        hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

}  // namespace symvi
