#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcdrop {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Small arithmetic language for initial and boundary data.
///
///   numbers, variables, ( ), + - * / ^, unary -, comparisons
///   (< <= > >= == !=, yielding 1 or 0), && ||, and the functions
///   tanh sqrt abs exp log sin cos atan2 min max if(cond, a, b).
///
/// Variables are resolved at parse time against a fixed list of names and
/// supplied positionally at evaluation.
class Expression {
 public:
  Expression() = default;
  /// Throws ExpressionError with the offending column on syntax errors or
  /// unknown identifiers.
  static Expression parse(const std::string& source, const std::vector<std::string>& variables);

  double evaluate(const double* values) const;
  double evaluate(const std::vector<double>& values) const { return evaluate(values.data()); }
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace lcdrop
