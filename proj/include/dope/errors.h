#pragma once

#include <stdexcept>
#include <string>

namespace dope {

class DopeError : public std::runtime_error
{
 public:
  explicit DopeError(const std::string & msg) : std::runtime_error(msg) {}
};

// bad input data: contract, model, program text
class DataError : public DopeError
{
 public:
  explicit DataError(const std::string & msg) : DopeError(msg) {}
};

class ParseError : public DataError
{
 public:
  ParseError(int line, int col, const std::string & msg)
      : DataError(std::to_string(line) + ":" + std::to_string(col) + ": "
                  + msg),
        line_(line),
        col_(col)
  {
  }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// well-formed syntax, bad meaning (undeclared variable, role violation)
class SemanticError : public DataError
{
 public:
  SemanticError(const std::string & var, const std::string & msg)
      : DataError(msg), var_(var)
  {
  }
  const std::string & variable() const { return var_; }

 private:
  std::string var_;
};

class EvalError : public DopeError
{
 public:
  explicit EvalError(const std::string & msg) : DopeError(msg) {}
};

// construct or operator outside the supported fragment
class UnsupportedError : public DopeError
{
 public:
  explicit UnsupportedError(const std::string & msg) : DopeError(msg) {}
};

}  // namespace dope
