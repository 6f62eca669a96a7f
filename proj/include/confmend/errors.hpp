#pragma once

#include <stdexcept>
#include <string>

namespace confmend {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lexical, grammatical or semantic error in an input document.
struct SyntaxError : Error {
  int line;
  int col;
  SyntaxError(int line_, int col_, const std::string& message)
      : Error("line " + std::to_string(line_) + ":" + std::to_string(col_) +
              ": " + message),
        line(line_),
        col(col_) {}
};

struct DuplicateIdError : Error {
  using Error::Error;
};

struct UnknownAttributeError : Error {
  using Error::Error;
};

struct InadmissibleValueError : Error {
  using Error::Error;
};

struct MissingBindingError : Error {
  using Error::Error;
};

// A solve problem references a variable that is neither fixed nor free.
struct IncompleteCoverageError : Error {
  using Error::Error;
};

struct CalledOnUnsatError : Error {
  using Error::Error;
};

struct NotInfringingError : Error {
  using Error::Error;
};

// Path enumeration exceeded the configured cap; callers fall back to
// whole-scope solving.
struct PathExplosionError : Error {
  using Error::Error;
};

struct GenerationFailureError : Error {
  using Error::Error;
};

}  // namespace confmend
