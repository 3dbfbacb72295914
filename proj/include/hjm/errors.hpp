#pragma once

#include <stdexcept>
#include <string>

namespace hjm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidCurveError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class GridError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class SpecError : public Error { using Error::Error; };
class IntegrabilityError : public Error { using Error::Error; };
class SchemeViolationError : public Error { using Error::Error; };
class InsufficientSampleError : public Error { using Error::Error; };
class ResourceError : public Error { using Error::Error; };

}  // namespace hjm
