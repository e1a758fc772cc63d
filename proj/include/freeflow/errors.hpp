#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace freeflow {

using cplx = std::complex<double>;

// Base for every error raised by the library. `code()` is a stable
// machine-readable tag used by the CLI and the Python bindings.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

#define FREEFLOW_DEFINE_ERROR(Name)                                     \
  class Name : public Error {                                           \
  public:                                                               \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  };

FREEFLOW_DEFINE_ERROR(DomainError)
FREEFLOW_DEFINE_ERROR(InvalidInput)
FREEFLOW_DEFINE_ERROR(QuadratureFailure)
FREEFLOW_DEFINE_ERROR(MissingTailMetadata)
FREEFLOW_DEFINE_ERROR(NotNevanlinna)
FREEFLOW_DEFINE_ERROR(ExtrapolationUnstable)
FREEFLOW_DEFINE_ERROR(OutsideInversionDomain)
FREEFLOW_DEFINE_ERROR(PoleOnPath)
FREEFLOW_DEFINE_ERROR(NotContaining)
FREEFLOW_DEFINE_ERROR(OutsideImage)
FREEFLOW_DEFINE_ERROR(StepUnderflow)
FREEFLOW_DEFINE_ERROR(ConfigError)

#undef FREEFLOW_DEFINE_ERROR

// Newton failed to converge. Keeps the iterate history for diagnostics.
class NewtonDivergence : public Error {
public:
  NewtonDivergence(const std::string& what, std::vector<cplx> trace = {})
      : Error("NewtonDivergence", what), trace_(std::move(trace)) {}
  const std::vector<cplx>& trace() const noexcept { return trace_; }

private:
  std::vector<cplx> trace_;
};

// A black-box evaluator threw or returned garbage at `point`.
class EvaluatorFailure : public Error {
public:
  EvaluatorFailure(const std::string& what, cplx point)
      : Error("EvaluatorFailure", what), point_(point) {}
  cplx point() const noexcept { return point_; }

private:
  cplx point_;
};

std::string toString(cplx z);

}  // namespace freeflow
