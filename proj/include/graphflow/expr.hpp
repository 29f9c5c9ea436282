/* Arithmetic expressions for initial-data fixtures.
 *
 * Grammar: identifiers x and y (chart coordinates), numeric literals,
 * + - * / with the usual precedence, unary minus, parentheses, and the
 * functions sin, cos, exp. The unicode glyphs for minus, times, and
 * divide are accepted as synonyms. Parsing happens once at scenario
 * build time; evaluation is allocation-free.
 */
#pragma once

#include <string>
#include <vector>

#include "graphflow/core.hpp"

namespace graphflow {

class Expression {
 public:
  // Throws FormatError naming the offending position on any parse problem.
  static Expression parse(const std::string& text);

  double eval(double x, double y = 0.0) const;

  const std::string& text() const { return text_; }

  // 'n' literal, 'x'/'y' identifiers, '+','-','*','/' binary, 'm' negate,
  // 's' sin, 'c' cos, 'e' exp.
  struct Node {
    char op = 'n';
    double value = 0.0;
    int a = -1;
    int b = -1;
  };

 private:
  std::vector<Node> nodes_;
  int root_ = -1;
  std::string text_;
};

}  // namespace graphflow
