#pragma once

#include <stdexcept>
#include <string>

namespace ergo {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Syntax error with source position (1-based line/column).
struct ParseError : Error {
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " at line " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_),
        col(col_) {}
  int line;
  int col;
};

/// Stable tags for analysis refusals, so callers and tests can match on the
/// condition rather than on message text.
enum class ErrorKind {
  IrreducibleLoop,        // DFS back edge whose target does not dominate its source
  OuterInductionMutated,  // extraction precondition violated
  Nondeterministic,       // deterministic evaluation hit >1 enabled alternative
  NonTerminating,         // step / evaluation budget exhausted
  DomainViolation,        // closed-form evaluated outside its validity domain
  Eval,                   // runtime error in concrete or numeric evaluation
  Model,                  // malformed or incomplete energy model
  Fixture,                // malformed memory / input fixture
  Validation,             // module failed ir validation
};

const char* to_string(ErrorKind kind);

struct AnalysisError : Error {
  AnalysisError(ErrorKind kind_, const std::string& msg)
      : Error(std::string(to_string(kind_)) + ": " + msg), kind(kind_) {}
  ErrorKind kind;
};

}  // namespace ergo
