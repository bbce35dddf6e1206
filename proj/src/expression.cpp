#include "lcdrop/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace lcdrop {

struct Expression::Node {
  enum class Kind { constant, variable, unary_minus, binary, call } kind = Kind::constant;
  double value = 0.0;
  int slot = 0;
  std::string op;  // operator symbol or function name
  std::vector<std::unique_ptr<Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

struct FunctionInfo {
  int arity;
};

const std::map<std::string, FunctionInfo>& functions() {
  static const std::map<std::string, FunctionInfo> table = {
      {"tanh", {1}}, {"sqrt", {1}}, {"abs", {1}},   {"exp", {1}}, {"log", {1}},
      {"sin", {1}},  {"cos", {1}},  {"atan2", {2}}, {"min", {2}}, {"max", {2}},
      {"if", {3}},
  };
  return table;
}

class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    NodePtr root = parse_or();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression '" + src_ + "': " + what + " at column " +
                          std::to_string(pos_ + 1));
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(const std::string& tok) {
    skip_space();
    if (src_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(std::string(1, c))) fail(std::string("expected '") + c + "'");
  }

  static NodePtr binary(std::string op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::binary;
    n->op = std::move(op);
    n->args.push_back(std::move(lhs));
    n->args.push_back(std::move(rhs));
    return n;
  }

  NodePtr parse_or() {
    NodePtr lhs = parse_and();
    while (accept("||")) lhs = binary("||", std::move(lhs), parse_and());
    return lhs;
  }

  NodePtr parse_and() {
    NodePtr lhs = parse_compare();
    while (accept("&&")) lhs = binary("&&", std::move(lhs), parse_compare());
    return lhs;
  }

  NodePtr parse_compare() {
    NodePtr lhs = parse_additive();
    for (const char* op : {"<=", ">=", "==", "!=", "<", ">"}) {
      if (accept(op)) return binary(op, std::move(lhs), parse_additive());
    }
    return lhs;
  }

  NodePtr parse_additive() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept("+")) {
        lhs = binary("+", std::move(lhs), parse_term());
      } else if (accept("-")) {
        lhs = binary("-", std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept("*")) {
        lhs = binary("*", std::move(lhs), parse_unary());
      } else if (accept("/")) {
        lhs = binary("/", std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept("-")) {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::unary_minus;
      n->args.push_back(parse_unary());
      return n;
    }
    if (accept("+")) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept("^")) return binary("^", std::move(base), parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_or();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_unique<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = src_.substr(start, pos_ - start);
      skip_space();
      if (pos_ < src_.size() && src_[pos_] == '(') return parse_call(name);
      for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (vars_[k] == name) {
          auto n = std::make_unique<Node>();
          n->kind = Node::Kind::variable;
          n->slot = static_cast<int>(k);
          return n;
        }
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr parse_call(const std::string& name) {
    const auto it = functions().find(name);
    if (it == functions().end()) fail("unknown function '" + name + "'");
    expect('(');
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::call;
    n->op = name;
    if (!accept(")")) {
      do {
        n->args.push_back(parse_or());
      } while (accept(","));
      expect(')');
    }
    if (static_cast<int>(n->args.size()) != it->second.arity) {
      fail(name + " expects " + std::to_string(it->second.arity) + " argument(s)");
    }
    return n;
  }

  const std::string& src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const double* vals) {
  switch (n.kind) {
    case Node::Kind::constant:
      return n.value;
    case Node::Kind::variable:
      return vals[n.slot];
    case Node::Kind::unary_minus:
      return -eval(*n.args[0], vals);
    case Node::Kind::binary: {
      const double a = eval(*n.args[0], vals);
      const double b = eval(*n.args[1], vals);
      switch (n.op[0]) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        case '^': return std::pow(a, b);
        case '<': return n.op.size() == 1 ? (a < b) : (a <= b);
        case '>': return n.op.size() == 1 ? (a > b) : (a >= b);
        case '=': return a == b;
        case '!': return a != b;
        case '&': return (a != 0.0) && (b != 0.0);
        case '|': return (a != 0.0) || (b != 0.0);
      }
      break;
    }
    case Node::Kind::call: {
      const std::string& f = n.op;
      if (f == "if") return eval(*n.args[0], vals) != 0.0 ? eval(*n.args[1], vals) : eval(*n.args[2], vals);
      const double a = eval(*n.args[0], vals);
      if (f == "tanh") return std::tanh(a);
      if (f == "sqrt") return std::sqrt(a);
      if (f == "abs") return std::abs(a);
      if (f == "exp") return std::exp(a);
      if (f == "log") return std::log(a);
      if (f == "sin") return std::sin(a);
      if (f == "cos") return std::cos(a);
      const double b = eval(*n.args[1], vals);
      if (f == "atan2") return std::atan2(a, b);
      if (f == "min") return std::min(a, b);
      if (f == "max") return std::max(a, b);
      break;
    }
  }
  throw ExpressionError("corrupt expression tree");
}

}  // namespace

Expression Expression::parse(const std::string& source, const std::vector<std::string>& variables) {
  Expression e;
  e.source_ = source;
  e.root_ = Parser(e.source_, variables).parse();
  return e;
}

double Expression::evaluate(const double* values) const {
  if (!root_) throw ExpressionError("evaluating an empty expression");
  return eval(*root_, values);
}

}  // namespace lcdrop
