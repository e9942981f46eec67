#ifndef SPANPARSE_ERRORS_H_
#define SPANPARSE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace spanparse {

// Malformed input data: treebank syntax, inconsistent files, bad spans.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bracketed-text syntax error; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(int line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Incompatible tensor shapes or widths.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/inf encountered during training or gradient checking.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spanparse

#endif  // SPANPARSE_ERRORS_H_
