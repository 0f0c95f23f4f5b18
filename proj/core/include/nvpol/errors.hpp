// Error taxonomy shared across the library.
//
// Input-shaped problems (bad config text, bad pulse program text, bad data
// files) derive from ParseFailure; problems detected while computing (fit
// did not converge, no feasible protocol, singular linear algebra) derive
// from NumericFailure. The command line tool maps these to distinct exit
// codes.
#pragma once

#include <stdexcept>
#include <string>

namespace nvpol {

struct ParseFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : ParseFailure {
  using ParseFailure::ParseFailure;
};

struct ProgramError : ParseFailure {
  ProgramError(const std::string& what, int line_, int column_)
      : ParseFailure(what), line(line_), column(column_) {}
  int line = 0;
  int column = 0;
};

struct DataError : ParseFailure {
  using ParseFailure::ParseFailure;
};

struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nvpol
