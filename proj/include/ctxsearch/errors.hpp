#pragma once

#include <stdexcept>
#include <string>

namespace ctxsearch {

// Root of every error raised by the library. Callers that only care about
// "something went wrong in a run" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A fit or regression whose inputs do not determine a unique answer.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// Unregularized logistic fit on data whose labels are all identical.
class SeparationDivergence : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

// Two learned intercepts too close to recover the utility scale from.
class DegenerateReconstruction : public Error {
 public:
  using Error::Error;
};

// A label cap was hit. Subclasses carry whatever partial state the
// interrupted procedure had built.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctxsearch
