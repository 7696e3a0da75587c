#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "iecclone/model.hpp"

namespace iecclone {

/// Syntax error in ST text or XML input. Line and column are 1-based; zero
/// means unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line = 0, int column = 0);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Input is well-formed but uses a construct the toolkit does not model
/// (REPEAT loops, Instruction List bodies, ...).
class UnsupportedConstructError : public ParseError {
 public:
  UnsupportedConstructError(const std::string& construct, int line, int column);
  UnsupportedConstructError(const std::string& construct,
                            const std::string& message);

  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

/// Parses a statement list. Comments, pragmas and layout are discarded, so
/// inputs that differ only in those parse to equal values.
StBody parseStructuredText(std::string_view text);

/// Parses a single expression; the whole input must be consumed.
Expression parseExpression(std::string_view text);

/// ST source for a statement list or expression; parsing the output yields
/// an equal value.
std::string printStructuredText(const StBody& body);
std::string printExpression(const Expression& expr);

}  // namespace iecclone
