#pragma once

#include <stdexcept>
#include <string>

namespace weakstat {

/// Base class for every validation or precondition failure raised by the
/// library. Front ends catch this to print clean diagnostics instead of
/// stack traces.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

class NonSquareError : public Error {
  public:
    using Error::Error;
};

class DimMismatchError : public Error {
  public:
    using Error::Error;
};

class NotHermitianError : public Error {
  public:
    using Error::Error;
};

/// A constructed value violates one of its structural invariants
/// (trace, positivity, idempotency, norm, finiteness).
class ValidationError : public Error {
  public:
    using Error::Error;
};

class StrengthTooLargeError : public Error {
  public:
    using Error::Error;
};

class ZeroProbabilityOutcomeError : public Error {
  public:
    using Error::Error;
};

class IncompletePvmError : public Error {
  public:
    using Error::Error;
};

class SingularGramError : public Error {
  public:
    using Error::Error;
};

class InsufficientPostSelectionError : public Error {
  public:
    using Error::Error;
};

class BadDimensionError : public Error {
  public:
    using Error::Error;
};

class WrongScenarioError : public Error {
  public:
    using Error::Error;
};

class MissingEventsError : public Error {
  public:
    using Error::Error;
};

} // namespace weakstat
