#pragma once

// Small infix expression language over the chart variables x, y, z.
//
// Grammar (precedence ^ > unary minus > * / > + -, ^ is right associative):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'x' | 'y' | 'z' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := sqrt | sin | cos | exp | ln

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace finsler::expr {

enum class Op { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Sqrt, Sin, Cos, Exp, Ln };

class Expression {
 public:
  struct Node;

  Expression();  // the constant 0
  static Expression constant(double value);
  static Expression variable(int index);
  static Expression unary(Op op, Expression operand);
  static Expression binary(Op op, Expression lhs, Expression rhs);

  Op op() const;
  double value() const;     // Constant only
  int variable_index() const;  // Variable only
  const Expression& lhs() const;
  const Expression& rhs() const;

  bool is_constant() const { return op() == Op::Constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  /// Largest variable index referenced, or -1 for constant expressions.
  int max_variable() const;

  /// Tree-walking evaluation; throws EvalError outside the expression's domain.
  double evaluate(std::span<const double> vars) const;

  /// Symbolic partial derivative with constant folding.
  Expression derivative(int variable) const;

  /// Replaces variable i with replacements[i].
  Expression substitute(std::span<const Expression> replacements) const;

  /// Canonical text; parse(to_string()) reproduces the same tree.
  std::string to_string() const;

  bool structurally_equal(const Expression& other) const;

 private:
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& a, const Expression& b);
Expression sqrt(const Expression& a);
Expression sin(const Expression& a);
Expression cos(const Expression& a);

/// Parses one expression; throws ParseError with line/column (1-based, relative to text,
/// offset by the given origin).
Expression parse(std::string_view text, int line = 1, int column = 1);

/// Flat postfix form of an expression for repeated evaluation.
class Program {
 public:
  Program() = default;
  explicit Program(const Expression& e);

  double operator()(const double* vars) const;
  bool empty() const { return code_.empty(); }

 private:
  struct Instruction {
    Op op;
    double value;
    int variable;
  };
  std::vector<Instruction> code_;
  int max_depth_ = 0;
};

}  // namespace finsler::expr
