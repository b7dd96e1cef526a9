#pragma once

#include <stdexcept>
#include <string>

namespace eclat {

// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorCategory {
  kConfig,      // malformed or invalid input files
  kInfeasible,  // the instance admits no stable design
  kNumerical,   // runtime numerical failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define ECLAT_DEFINE_ERROR(Name, Category)                   \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what)                   \
        : Error(ErrorCategory::Category, #Name ": " + what) {} \
  }

ECLAT_DEFINE_ERROR(ParseError, kConfig);
ECLAT_DEFINE_ERROR(SchemaError, kConfig);
ECLAT_DEFINE_ERROR(BadMarginals, kConfig);

ECLAT_DEFINE_ERROR(PortCapacityExceeded, kInfeasible);
ECLAT_DEFINE_ERROR(NegativeResidualBandwidth, kInfeasible);
ECLAT_DEFINE_ERROR(UnstableQueue, kInfeasible);
ECLAT_DEFINE_ERROR(NoFeasibleWeights, kInfeasible);
ECLAT_DEFINE_ERROR(NoFeasibleSchedule, kInfeasible);
ECLAT_DEFINE_ERROR(InfeasibleInitialization, kInfeasible);

ECLAT_DEFINE_ERROR(NoPerfectMatching, kNumerical);
ECLAT_DEFINE_ERROR(NumericalFailure, kNumerical);

#undef ECLAT_DEFINE_ERROR

}  // namespace eclat
