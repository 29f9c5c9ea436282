#include "graphflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace graphflow {

namespace {

struct Token {
  char kind;     // 'n' number, 'i' ident, one of "+-*/()", or 0 for end
  double value = 0.0;
  std::string ident;
  std::size_t pos = 0;
};

[[noreturn]] void fail(const std::string& text, std::size_t pos,
                       const std::string& what) {
  throw FormatError("expression \"" + text + "\": " + what + " at position " +
                    std::to_string(pos));
}

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    // Unicode synonyms: U+2212 minus, U+00D7 times, U+00F7 divide.
    if (c == 0xE2 && i + 2 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x88 &&
        static_cast<unsigned char>(text[i + 2]) == 0x92) {
      out.push_back({'-', 0.0, "", i});
      i += 3;
      continue;
    }
    if (c == 0xC3 && i + 1 < text.size()) {
      const unsigned char d = static_cast<unsigned char>(text[i + 1]);
      if (d == 0x97 || d == 0xB7) {
        out.push_back({d == 0x97 ? '*' : '/', 0.0, "", i});
        i += 2;
        continue;
      }
    }
    if (c == '+' || c == '-' || c == '*' || c == '/' || c == '(' || c == ')') {
      out.push_back({static_cast<char>(c), 0.0, "", i});
      ++i;
      continue;
    }
    if (std::isdigit(c) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(text.c_str() + i, &end);
      if (end == text.c_str() + i) fail(text, i, "bad number");
      out.push_back({'n', v, "", i});
      i = static_cast<std::size_t>(end - text.c_str());
      continue;
    }
    if (std::isalpha(c)) {
      std::size_t j = i;
      while (j < text.size() &&
             std::isalpha(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
      out.push_back({'i', 0.0, text.substr(i, j - i), i});
      i = j;
      continue;
    }
    fail(text, i, "unexpected character");
  }
  out.push_back({0, 0.0, "", text.size()});
  return out;
}

class Parser {
 public:
  Parser(const std::string& text, std::vector<Token> toks,
         std::vector<Expression::Node>* nodes)
      : text_(text), toks_(std::move(toks)), nodes_(nodes) {}

  int parse_all() {
    const int r = sum();
    if (cur().kind != 0) fail(text_, cur().pos, "trailing input");
    return r;
  }

 private:
  using Node = Expression::Node;

  const Token& cur() const { return toks_[at_]; }
  void advance() { ++at_; }

  int make(char op, double value, int a, int b) {
    nodes_->push_back({op, value, a, b});
    return static_cast<int>(nodes_->size()) - 1;
  }

  int sum() {
    int lhs = product();
    while (cur().kind == '+' || cur().kind == '-') {
      const char op = cur().kind;
      advance();
      lhs = make(op, 0.0, lhs, product());
    }
    return lhs;
  }

  int product() {
    int lhs = unary();
    while (cur().kind == '*' || cur().kind == '/') {
      const char op = cur().kind;
      advance();
      lhs = make(op, 0.0, lhs, unary());
    }
    return lhs;
  }

  int unary() {
    if (cur().kind == '-') {
      advance();
      return make('m', 0.0, unary(), -1);
    }
    return primary();
  }

  int primary() {
    const Token t = cur();
    if (t.kind == 'n') {
      advance();
      return make('n', t.value, -1, -1);
    }
    if (t.kind == '(') {
      advance();
      const int inner = sum();
      if (cur().kind != ')') fail(text_, cur().pos, "expected ')'");
      advance();
      return inner;
    }
    if (t.kind == 'i') {
      advance();
      if (t.ident == "x") return make('x', 0.0, -1, -1);
      if (t.ident == "y") return make('y', 0.0, -1, -1);
      char fn = 0;
      if (t.ident == "sin") fn = 's';
      if (t.ident == "cos") fn = 'c';
      if (t.ident == "exp") fn = 'e';
      if (fn == 0) fail(text_, t.pos, "unknown identifier '" + t.ident + "'");
      if (cur().kind != '(') fail(text_, cur().pos, "expected '(' after function");
      advance();
      const int arg = sum();
      if (cur().kind != ')') fail(text_, cur().pos, "expected ')'");
      advance();
      return make(fn, 0.0, arg, -1);
    }
    fail(text_, t.pos, "expected a value");
  }

  const std::string& text_;
  std::vector<Token> toks_;
  std::vector<Node>* nodes_;
  std::size_t at_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  Parser p(text, lex(text), &e.nodes_);
  e.root_ = p.parse_all();
  return e;
}

double Expression::eval(double x, double y) const {
  // Nodes are appended children-first, so a single forward sweep evaluates
  // the whole tree.
  std::vector<double> val(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& nd = nodes_[i];
    const double a = nd.a >= 0 ? val[static_cast<std::size_t>(nd.a)] : 0.0;
    const double b = nd.b >= 0 ? val[static_cast<std::size_t>(nd.b)] : 0.0;
    switch (nd.op) {
      case 'n': val[i] = nd.value; break;
      case 'x': val[i] = x; break;
      case 'y': val[i] = y; break;
      case '+': val[i] = a + b; break;
      case '-': val[i] = a - b; break;
      case '*': val[i] = a * b; break;
      case '/': val[i] = a / b; break;
      case 'm': val[i] = -a; break;
      case 's': val[i] = std::sin(a); break;
      case 'c': val[i] = std::cos(a); break;
      case 'e': val[i] = std::exp(a); break;
      default: break;
    }
  }
  return val[static_cast<std::size_t>(root_)];
}

}  // namespace graphflow
