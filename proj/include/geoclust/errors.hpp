#pragma once

#include <stdexcept>
#include <string>

namespace geoclust {

// Error taxonomy mirrors the CLI exit codes:
//   ValidationError     -> exit 2 (bad inputs, bad config, contract violations by the caller)
//   DegenerateDataError -> exit 3 (inputs that are formally valid but carry no usable signal,
//                                  e.g. an all-zero dissimilarity matrix or series that never
//                                  overlap in time)
//   InternalError       -> exit 4 (an invariant the engine itself guarantees was broken)
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoclust
